#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qnopt/acquisition.hpp"
#include "qnopt/objective.hpp"
#include "qnopt/param_space.hpp"
#include "qnopt/surrogate/model.hpp"

namespace qnopt {

struct EvalRecord {
  ConfigPoint config;
  std::vector<double> mean_utilities;
  std::size_t sample_count = 0;
  // Row-major n x m per-run utilities; empty when over the retention cap.
  std::vector<double> raw_samples;
  std::size_t cycle = 0;

  [[nodiscard]] double aggregate() const;
};

struct CycleLimit {
  std::size_t cycles = 10;
};

struct WallClockLimit {
  double seconds = 60.0;
};

using RunLimit = std::variant<CycleLimit, WallClockLimit>;

struct RunSettings {
  RunLimit limit = CycleLimit{};
  std::size_t n = 20;   // runs per evaluation
  std::size_t l = 5;    // proposals per cycle
  double d = 4.0;       // exploitation degree
  std::size_t k0 = 0;   // initial design size; 0 means l
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::size_t folds = 5;
  // Raw per-run samples are kept until this many values are stored.
  std::size_t raw_sample_cap = 1'000'000;
  ModelSettings models;
  double base_samples = 10.0;
  double growth = 1e4;

  [[nodiscard]] std::size_t initial_size() const noexcept { return k0 > 0 ? k0 : l; }
  void validate() const;
};

struct TimingProfile {
  double simulation = 0.0; // seconds
  double training = 0.0;
  double acquisition = 0.0;
  double remaining = 0.0;
  std::size_t cycles_completed = 0;

  [[nodiscard]] double total() const noexcept {
    return simulation + training + acquisition + remaining;
  }
  [[nodiscard]] double fraction(double part) const noexcept;
};

struct CycleLog {
  std::size_t cycle = 0;
  std::size_t dataset_size = 0;
  double best_aggregate = 0.0;
  std::optional<double> rf_mae;
  std::optional<double> svr_mae;
  std::string model_kind; // empty for cycle 0 and baselines
};

struct OptimizationResult {
  std::vector<EvalRecord> records;
  std::size_t best = 0; // index into records
  TimingProfile profile;
  std::vector<CycleLog> log;
  bool truncated = false;

  [[nodiscard]] const EvalRecord &best_record() const { return records.at(best); }
};

// Called after every cycle with the log line and all records so far.
using CycleCallback =
    std::function<void(const CycleLog &, const std::vector<EvalRecord> &)>;

// n independent runs with seeds derive_seed(seed, {run}); the sample means
// are accumulated in run order, so the result does not depend on `workers`.
EvalRecord evaluate(const Objective &objective, const SearchSpace &space,
                    const ConfigPoint &config, std::size_t n, std::uint64_t seed,
                    std::size_t workers = 1, bool keep_raw = true);

// Evaluates several configurations concurrently; config i uses seeds[i].
std::vector<EvalRecord> evaluate_batch(const Objective &objective,
                                       const SearchSpace &space,
                                       const std::vector<ConfigPoint> &configs,
                                       std::size_t n,
                                       const std::vector<std::uint64_t> &seeds,
                                       std::size_t workers, bool keep_raw);

// Index of the record with the largest aggregate utility (earliest on ties).
std::size_t best_index(const std::vector<EvalRecord> &records);

// Indices of the `count` records with the largest aggregate, best first; ties
// keep insertion order.
std::vector<std::size_t> top_indices(const std::vector<EvalRecord> &records,
                                     std::size_t count);

Dataset to_dataset(const SearchSpace &space,
                   const std::vector<EvalRecord> &records);

OptimizationResult run(const SearchSpace &space, const Objective &objective,
                       const RunSettings &settings,
                       const CycleCallback &on_cycle = {});

} // namespace qnopt
