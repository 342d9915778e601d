import json
import sys

request = json.loads(sys.stdin.readline())
budget = request.get("budget", 450)
total = sum(v for k, v in request.items() if k.startswith("q_"))
print(json.dumps([total - budget]))
