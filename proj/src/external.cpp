#include "qnopt/external.hpp"

#include <cerrno>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstring>
#include <mutex>

#include <fcntl.h>
#include <poll.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "qnopt/errors.hpp"

extern char **environ;

namespace qnopt {

using nlohmann::ordered_json;
using Reason = ExternalObjectiveError::Reason;

namespace {

ordered_json value_json(const ParamSpec *spec, const ParamValue &value) {
  if (const auto *label = std::get_if<std::string>(&value)) {
    return *label;
  }
  const double x = std::get<double>(value);
  const bool integral = spec ? spec->kind() == ParamKind::integer
                             : (std::floor(x) == x && std::abs(x) < 9e15);
  if (integral) {
    return static_cast<long long>(x);
  }
  return x;
}

class Fd {
public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(const Fd &) = delete;
  Fd &operator=(const Fd &) = delete;
  Fd(Fd &&o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Fd &operator=(Fd &&o) noexcept {
    reset();
    fd_ = std::exchange(o.fd_, -1);
    return *this;
  }
  ~Fd() { reset(); }

  [[nodiscard]] int get() const noexcept { return fd_; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

private:
  int fd_ = -1;
};

std::pair<Fd, Fd> make_pipe() {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) {
    throw ExternalObjectiveError(Reason::spawn_failed,
                                 std::string("pipe: ") + std::strerror(errno));
  }
  return {Fd(fds[0]), Fd(fds[1])};
}

class FileActions {
public:
  FileActions() { posix_spawn_file_actions_init(&actions_); }
  ~FileActions() { posix_spawn_file_actions_destroy(&actions_); }
  FileActions(const FileActions &) = delete;
  FileActions &operator=(const FileActions &) = delete;
  posix_spawn_file_actions_t *get() { return &actions_; }

private:
  posix_spawn_file_actions_t actions_;
};

void ignore_sigpipe() {
  // A child that exits without reading its request must surface as a write
  // error, not terminate this process.
  static std::once_flag once;
  std::call_once(once, [] { std::signal(SIGPIPE, SIG_IGN); });
}

} // namespace

std::string encode_request(const SearchSpace &space, const ConfigPoint &config,
                           const std::string &seed_key, std::uint64_t seed) {
  if (config.values.size() != space.size()) {
    throw DimensionError("configuration arity does not match the space");
  }
  ordered_json doc = ordered_json::object();
  for (std::size_t i = 0; i < space.size(); ++i) {
    doc[space.params()[i].name()] =
        value_json(&space.params()[i], config.values[i]);
  }
  for (const auto &[name, value] : space.fixed()) {
    doc[name] = value_json(nullptr, value);
  }
  if (!seed_key.empty()) {
    doc[seed_key] = seed;
  }
  return doc.dump() + "\n";
}

std::vector<double> decode_reply(const std::string &line,
                                 std::optional<std::size_t> expected) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(line);
  } catch (const ordered_json::parse_error &e) {
    throw ExternalObjectiveError(Reason::malformed_reply,
                                 "reply is not valid JSON: " + line, e.what());
  }
  if (!doc.is_array()) {
    throw ExternalObjectiveError(Reason::malformed_reply,
                                 "reply is not a JSON array: " + line);
  }
  std::vector<double> out;
  for (const auto &v : doc) {
    if (!v.is_number()) {
      throw ExternalObjectiveError(Reason::malformed_reply,
                                   "reply contains a non-numeric entry: " + line);
    }
    out.push_back(v.get<double>());
  }
  if (expected && out.size() != *expected) {
    throw ExternalObjectiveError(
        Reason::malformed_reply,
        "reply has " + std::to_string(out.size()) + " values, expected " +
            std::to_string(*expected));
  }
  return out;
}

ProcessResult run_process(const std::vector<std::string> &argv,
                          const std::string &input, double timeout_seconds) {
  if (argv.empty()) {
    throw ExternalObjectiveError(Reason::spawn_failed, "empty command");
  }
  ignore_sigpipe();
  auto [in_read, in_write] = make_pipe();
  auto [out_read, out_write] = make_pipe();
  auto [err_read, err_write] = make_pipe();

  FileActions actions;
  posix_spawn_file_actions_adddup2(actions.get(), in_read.get(), STDIN_FILENO);
  posix_spawn_file_actions_adddup2(actions.get(), out_write.get(), STDOUT_FILENO);
  posix_spawn_file_actions_adddup2(actions.get(), err_write.get(), STDERR_FILENO);

  std::vector<char *> args;
  for (const auto &a : argv) args.push_back(const_cast<char *>(a.c_str()));
  args.push_back(nullptr);

  pid_t pid = 0;
  const int rc =
      ::posix_spawnp(&pid, args[0], actions.get(), nullptr, args.data(), environ);
  if (rc != 0) {
    throw ExternalObjectiveError(Reason::spawn_failed,
                                 "cannot spawn '" + argv[0] + "': " +
                                     std::strerror(rc));
  }
  in_read.reset();
  out_write.reset();
  err_write.reset();

  ProcessResult result;
  const auto deadline =
      std::chrono::steady_clock::now() +
      std::chrono::duration_cast<std::chrono::steady_clock::duration>(
          std::chrono::duration<double>(timeout_seconds));
  std::size_t written = 0;
  if (input.empty()) in_write.reset();
  ::fcntl(in_write.get(), F_SETFL, O_NONBLOCK);

  bool timed_out = false;
  while (out_read.get() >= 0 || err_read.get() >= 0) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      timed_out = true;
      break;
    }
    pollfd fds[3];
    nfds_t count = 0;
    auto add = [&](const Fd &fd, short events) {
      if (fd.get() >= 0) fds[count++] = {fd.get(), events, 0};
    };
    add(out_read, POLLIN);
    add(err_read, POLLIN);
    add(in_write, POLLOUT);
    const int ready = ::poll(fds, count, static_cast<int>(std::min<long long>(
                                             left.count(), 1000)));
    if (ready < 0) {
      if (errno == EINTR) continue;
      break;
    }
    for (nfds_t i = 0; i < count; ++i) {
      if (fds[i].revents == 0) continue;
      if (fds[i].fd == in_write.get()) {
        const ssize_t w = ::write(in_write.get(), input.data() + written,
                                  input.size() - written);
        if (w > 0) written += static_cast<std::size_t>(w);
        if (w < 0 && errno != EAGAIN) written = input.size();
        if (written >= input.size()) in_write.reset();
        continue;
      }
      char buf[4096];
      const ssize_t r = ::read(fds[i].fd, buf, sizeof buf);
      const bool is_out = fds[i].fd == out_read.get();
      if (r > 0) {
        (is_out ? result.out : result.err).append(buf, static_cast<std::size_t>(r));
      } else if (r == 0 || (errno != EAGAIN && errno != EINTR)) {
        (is_out ? out_read : err_read).reset();
      }
    }
  }
  in_write.reset();

  int status = 0;
  if (timed_out) {
    ::kill(pid, SIGKILL);
    ::waitpid(pid, &status, 0);
    throw ExternalObjectiveError(Reason::timeout,
                                 "'" + argv[0] + "' exceeded the " +
                                     std::to_string(timeout_seconds) +
                                     " s timeout",
                                 result.err);
  }
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status)
                                       : 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
  return result;
}

std::vector<double> external_objective(const ExternalCommand &command,
                                       const SearchSpace &space,
                                       const ConfigPoint &config,
                                       std::size_t objective_count,
                                       std::uint64_t seed) {
  const auto request = encode_request(space, config, command.seed_key, seed);
  const auto result = run_process(command.argv, request, command.timeout_seconds);
  if (result.exit_code != 0) {
    throw ExternalObjectiveError(Reason::nonzero_exit,
                                 "'" + command.argv[0] + "' exited with status " +
                                     std::to_string(result.exit_code),
                                 result.err);
  }
  const auto newline = result.out.find('\n');
  const std::string line = result.out.substr(0, newline);
  try {
    return decode_reply(line, objective_count);
  } catch (const ExternalObjectiveError &e) {
    throw ExternalObjectiveError(e.reason(), e.what(), result.err);
  }
}

ExternalObjective::ExternalObjective(ExternalCommand command, SearchSpace space,
                                     std::size_t objective_count,
                                     std::vector<std::string> names)
    : command_(std::move(command)), space_(std::move(space)),
      count_(objective_count), names_(std::move(names)) {
  if (command_.argv.empty()) throw DomainError("external command is empty");
  if (count_ == 0) throw DomainError("external objective needs >= 1 output");
  if (!(command_.timeout_seconds > 0.0)) {
    throw DomainError("external objective timeout must be positive");
  }
  if (!names_.empty() && names_.size() != count_) {
    throw DimensionError("objective name list does not match objective count");
  }
}

std::vector<double> ExternalObjective::run(const ConfigPoint &config,
                                           std::uint64_t seed) const {
  return external_objective(command_, space_, config, count_, seed);
}

std::vector<std::string> ExternalObjective::objective_names() const {
  return names_.empty() ? Objective::objective_names() : names_;
}

} // namespace qnopt
