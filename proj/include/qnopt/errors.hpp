#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qnopt {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A value or setting lies outside its admissible domain.
class DomainError : public Error {
public:
  using Error::Error;
};

class DimensionError : public Error {
public:
  using Error::Error;
};

class InsufficientDataError : public Error {
public:
  using Error::Error;
};

class ConvergenceError : public Error {
public:
  ConvergenceError(const std::string &what, double residual_gap)
      : Error(what), residual_gap_(residual_gap) {}

  [[nodiscard]] double residual_gap() const noexcept { return residual_gap_; }

private:
  double residual_gap_;
};

// One objective run failed while evaluating a configuration.
class EvaluationError : public Error {
public:
  EvaluationError(const std::string &what, std::string config,
                  std::size_t run_index)
      : Error(what), config_(std::move(config)), run_index_(run_index) {}

  [[nodiscard]] const std::string &config() const noexcept { return config_; }
  [[nodiscard]] std::size_t run_index() const noexcept { return run_index_; }

private:
  std::string config_;
  std::size_t run_index_;
};

class ExternalObjectiveError : public Error {
public:
  enum class Reason { spawn_failed, nonzero_exit, malformed_reply, timeout };

  ExternalObjectiveError(Reason reason, const std::string &what,
                         std::string diagnostics = {})
      : Error(what), reason_(reason), diagnostics_(std::move(diagnostics)) {}

  [[nodiscard]] Reason reason() const noexcept { return reason_; }
  [[nodiscard]] const std::string &diagnostics() const noexcept {
    return diagnostics_;
  }

private:
  Reason reason_;
  std::string diagnostics_;
};

class DegenerateSampleError : public Error {
public:
  using Error::Error;
};

class EmptyReportError : public Error {
public:
  using Error::Error;
};

// A study configuration is missing a setting, has the wrong type, or refers
// to a file that does not exist.
class ConfigError : public Error {
public:
  using Error::Error;
};

// Input text (config, CSV, edge list) could not be parsed. Line is 1-based,
// 0 when unknown.
class ParseError : public Error {
public:
  ParseError(const std::string &what, std::size_t line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

} // namespace qnopt
