#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "qnopt/optimizer.hpp"
#include "qnopt/pareto.hpp"
#include "qnopt/study.hpp"

namespace qnopt {

inline constexpr const char *kVersion = "0.1.0";

// Seed, settings and the effective config; replaying load_study on a
// metadata.json reproduces the run.
nlohmann::ordered_json run_metadata(const Study &study);

// Runs the study's method and writes into `out_dir`:
//   dataset.csv    flushed after every cycle
//   dataset.json   records with config objects and sample counts
//   metadata.json  run metadata plus worker count and truncation flag
//   profile.json / profile.csv   time per phase and fractions
//   cycles.csv     per-cycle log (dataset size, best, CV errors, model)
//   best.json      best configuration and its utilities
// `progress`, when given, receives one line per cycle.
OptimizationResult cmd_optimize(const Study &study,
                                const std::filesystem::path &out_dir,
                                std::ostream *progress = nullptr);

struct ConfirmStats {
  std::vector<std::string> names;
  std::vector<double> mean;
  std::vector<double> standard_error;
  double aggregate_mean = 0.0;
  double aggregate_standard_error = 0.0;
  std::size_t runs = 0;
};

// n_exec fresh runs of `config`; standard errors use the n-1 deviation.
ConfirmStats confirm(const Study &study, const ConfigPoint &config);

// Reads a best.json written by cmd_optimize, confirms it and writes
// confirm.json into `out_dir`.
ConfirmStats cmd_confirm(const Study &study,
                         const std::filesystem::path &best_file,
                         const std::filesystem::path &out_dir);

// Reads a dataset CSV (the space comes from its metadata line unless
// `space` is given) and writes pareto_report.csv and pareto_summary.json.
pareto::ParetoReport cmd_pareto(const std::filesystem::path &dataset,
                                const SearchSpace *space,
                                const std::filesystem::path &out_dir);

} // namespace qnopt
