#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qnopt/objective.hpp"
#include "qnopt/param_space.hpp"

namespace qnopt {

// A child process that answers one request line with one reply line.
//
// Request: a single JSON object followed by '\n'. Keys are the configurable
// parameter names in search-space order, then fixed parameters in name
// order, then `seed_key` (if set) holding the run seed as an unsigned
// integer. Integer parameters are JSON integers, continuous parameters JSON
// numbers in shortest round-trip form, labels JSON strings.
// Reply: a JSON array of exactly `objective_count` numbers followed by '\n'.
// The first line of stdout is the reply; anything after it is ignored.
struct ExternalCommand {
  std::vector<std::string> argv;
  double timeout_seconds = 60.0;
  std::string seed_key; // empty: the seed is not sent
};

std::string encode_request(const SearchSpace &space, const ConfigPoint &config,
                           const std::string &seed_key = {},
                           std::uint64_t seed = 0);

// Throws ExternalObjectiveError(malformed_reply) unless `line` is a JSON
// array of numbers (of length `expected` when given).
std::vector<double> decode_reply(const std::string &line,
                                 std::optional<std::size_t> expected = {});

struct ProcessResult {
  int exit_code = 0;
  std::string out;
  std::string err;
};

// Spawns argv[0] (PATH lookup), feeds `input` on stdin, and collects stdout
// and stderr. Kills the child and throws a timeout error once
// `timeout_seconds` elapse.
ProcessResult run_process(const std::vector<std::string> &argv,
                          const std::string &input, double timeout_seconds);

std::vector<double> external_objective(const ExternalCommand &command,
                                       const SearchSpace &space,
                                       const ConfigPoint &config,
                                       std::size_t objective_count,
                                       std::uint64_t seed = 0);

class ExternalObjective final : public Objective {
public:
  ExternalObjective(ExternalCommand command, SearchSpace space,
                    std::size_t objective_count,
                    std::vector<std::string> names = {});

  [[nodiscard]] std::size_t objective_count() const override { return count_; }
  [[nodiscard]] std::vector<double> run(const ConfigPoint &config,
                                        std::uint64_t seed) const override;
  [[nodiscard]] std::vector<std::string> objective_names() const override;

private:
  ExternalCommand command_;
  SearchSpace space_;
  std::size_t count_;
  std::vector<std::string> names_;
};

} // namespace qnopt
