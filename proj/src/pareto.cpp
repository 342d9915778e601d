#include "qnopt/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <type_traits>
#include <numeric>

#include "qnopt/errors.hpp"

namespace qnopt::pareto {

namespace {

// Sum of squared deviations; exactly 0 when all values are equal, where the
// rounded mean would otherwise leave a tiny residue.
double sum_squares(std::span<const double> values, double mean) {
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) return 0.0;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return ss;
}

void check_dimensions(const std::vector<std::vector<double>> &objectives) {
  if (objectives.empty()) return;
  const std::size_t m = objectives.front().size();
  if (m == 0) throw DimensionError("objective vectors must be non-empty");
  for (std::size_t i = 0; i < objectives.size(); ++i) {
    if (objectives[i].size() != m) {
      throw DimensionError("objective vector " + std::to_string(i) + " has " +
                           std::to_string(objectives[i].size()) +
                           " components, expected " + std::to_string(m));
    }
  }
}

bool dominates(const std::vector<double> &a, const std::vector<double> &b) {
  bool strict = false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] < b[k]) return false;
    if (a[k] > b[k]) strict = true;
  }
  return strict;
}

} // namespace

std::vector<std::size_t>
dominating_set(const std::vector<std::vector<double>> &objectives) {
  check_dimensions(objectives);
  // In descending lexicographic order every dominator precedes what it
  // dominates, and anything dominated is also dominated by a front member.
  std::vector<std::size_t> order(objectives.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return objectives[b] < objectives[a];
  });

  std::vector<std::size_t> front; // representatives of distinct kept vectors
  std::vector<std::size_t> out;
  for (std::size_t g = 0; g < order.size();) {
    std::size_t h = g + 1;
    while (h < order.size() && objectives[order[h]] == objectives[order[g]]) ++h;
    const auto &candidate = objectives[order[g]];
    const bool beaten = std::any_of(front.begin(), front.end(), [&](std::size_t f) {
      return dominates(objectives[f], candidate);
    });
    if (!beaten) {
      front.push_back(order[g]);
      out.insert(out.end(), order.begin() + static_cast<std::ptrdiff_t>(g),
                 order.begin() + static_cast<std::ptrdiff_t>(h));
    }
    g = h;
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t>
dominating_set_bruteforce(const std::vector<std::vector<double>> &objectives) {
  check_dimensions(objectives);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < objectives.size(); ++i) {
    bool beaten = false;
    for (std::size_t j = 0; j < objectives.size() && !beaten; ++j) {
      beaten = j != i && dominates(objectives[j], objectives[i]);
    }
    if (!beaten) out.push_back(i);
  }
  return out;
}

double ks_distance(std::span<const double> values, const Reference &reference) {
  const std::size_t n = values.size();
  if (n < 2) throw DegenerateSampleError("KS distance needs at least 2 values");
  std::vector<double> x(values.begin(), values.end());
  std::sort(x.begin(), x.end());

  auto cdf = std::visit(
      [&](const auto &ref) -> std::function<double(double)> {
        using T = std::decay_t<decltype(ref)>;
        if constexpr (std::is_same_v<T, UniformReference>) {
          if (!(ref.hi > ref.lo)) {
            throw DomainError("uniform reference needs lo < hi");
          }
          return [lo = ref.lo, hi = ref.hi](double v) {
            return std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
          };
        } else {
          const double mean =
              std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
          const double sd =
              std::sqrt(sum_squares(x, mean) / static_cast<double>(n - 1));
          if (!(sd > 0.0)) {
            throw DegenerateSampleError(
                "normal reference is undefined for a zero-variance sample");
          }
          return [mean, sd](double v) {
            return 0.5 * std::erfc(-(v - mean) / (sd * std::sqrt(2.0)));
          };
        }
      },
      reference);

  double d = 0.0;
  const auto nn = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, static_cast<double>(i + 1) / nn - f,
                  f - static_cast<double>(i) / nn});
  }
  return std::clamp(d, 0.0, 1.0);
}

double percentile(std::span<const double> values, double p) {
  if (values.empty()) throw InsufficientDataError("percentile of an empty sample");
  if (!(p >= 0.0 && p <= 100.0)) throw DomainError("percentile must lie in [0, 100]");
  std::vector<double> x(values.begin(), values.end());
  std::sort(x.begin(), x.end());
  const double h = (static_cast<double>(x.size()) - 1.0) * p / 100.0;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

double stddev(std::span<const double> values) {
  if (values.empty()) throw InsufficientDataError("stddev of an empty sample");
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) /
                      static_cast<double>(values.size());
  return std::sqrt(sum_squares(values, mean) / static_cast<double>(values.size()));
}

ParetoReport summarize(const std::vector<std::vector<double>> &objectives,
                       const std::vector<ConfigPoint> &configs,
                       const SearchSpace &space) {
  if (objectives.size() != configs.size()) {
    throw DimensionError("need one objective vector per configuration");
  }
  ParetoReport report;
  report.record_count = objectives.size();
  report.dominating_indices = dominating_set(objectives);
  if (report.dominating_indices.empty()) {
    throw EmptyReportError("no records to summarize");
  }

  for (std::size_t p = 0; p < space.size(); ++p) {
    const auto &spec = space.params()[p];
    std::vector<double> v;
    v.reserve(report.dominating_indices.size());
    for (auto i : report.dominating_indices) {
      if (configs[i].values.size() != space.size()) {
        throw DimensionError("configuration " + std::to_string(i) +
                             " does not match the search space");
      }
      v.push_back(numeric_value(spec, configs[i].values[p]));
    }
    ParamSummary s;
    s.name = spec.name();
    s.median = percentile(v, 50.0);
    s.p2_5 = percentile(v, 2.5);
    s.p97_5 = percentile(v, 97.5);
    s.std = stddev(v);
    UniformReference bounds{spec.min(), spec.max()};
    if (!spec.is_numeric()) {
      bounds = {0.0, static_cast<double>(spec.values().size() - 1)};
    }
    if (v.size() >= 2) {
      if (bounds.hi > bounds.lo) s.ks_uniform = ks_distance(v, bounds);
      if (s.std > 0.0) s.ks_normal = ks_distance(v, NormalReference{});
    }
    report.params.push_back(std::move(s));
  }
  return report;
}

} // namespace qnopt::pareto
