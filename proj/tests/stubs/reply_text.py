import sys

sys.stdin.readline()
print("all good")
