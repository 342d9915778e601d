#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "qnopt/param_space.hpp"

namespace qnopt::pareto {

// Indices (ascending) of the vectors not dominated by any other vector. A
// vector dominates another when it is >= in every component and > in one;
// exact duplicates therefore never exclude each other.
std::vector<std::size_t>
dominating_set(const std::vector<std::vector<double>> &objectives);

// O(n^2 m) reference used by the tests.
std::vector<std::size_t>
dominating_set_bruteforce(const std::vector<std::vector<double>> &objectives);

struct UniformReference {
  double lo = 0.0;
  double hi = 1.0;
};
// Normal with the sample mean and (n-1) standard deviation of the values.
struct NormalReference {};

using Reference = std::variant<UniformReference, NormalReference>;

// Two-sided Kolmogorov-Smirnov statistic of `values` against `reference`.
double ks_distance(std::span<const double> values, const Reference &reference);

// Linear interpolation between order statistics, p in [0, 100].
double percentile(std::span<const double> values, double p);

// Population standard deviation.
double stddev(std::span<const double> values);

struct ParamSummary {
  std::string name;
  double median = 0.0;
  double p2_5 = 0.0;
  double p97_5 = 0.0;
  double std = 0.0;
  // Empty when undefined (fewer than two values, or zero variance for the
  // normal reference).
  std::optional<double> ks_uniform;
  std::optional<double> ks_normal;

  [[nodiscard]] bool closer_to_uniform() const {
    return ks_uniform && ks_normal && *ks_uniform < *ks_normal;
  }
};

struct ParetoReport {
  std::vector<std::size_t> dominating_indices;
  std::size_t record_count = 0;
  std::vector<ParamSummary> params;

  [[nodiscard]] double dominating_fraction() const {
    return record_count == 0 ? 0.0
                             : static_cast<double>(dominating_indices.size()) /
                                   static_cast<double>(record_count);
  }
};

// objectives[i] holds the mean utilities of configs[i]. Ordinal and
// categorical parameters are summarized by label index, with the uniform
// reference spanning all indices.
ParetoReport summarize(const std::vector<std::vector<double>> &objectives,
                       const std::vector<ConfigPoint> &configs,
                       const SearchSpace &space);

} // namespace qnopt::pareto
