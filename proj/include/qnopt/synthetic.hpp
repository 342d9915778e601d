#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "qnopt/objective.hpp"
#include "qnopt/param_space.hpp"

namespace qnopt {

enum class SyntheticFunction { sphere, rosenbrock, uniform, constant, sleep };

const char *to_string(SyntheticFunction f) noexcept;
std::optional<SyntheticFunction> parse_synthetic_function(const std::string &text);

// Cheap test objectives, all to be maximized.
//   sphere:     -sum x_i^2 + noise * N(0,1)
//   rosenbrock: -sum 100 (x_{i+1} - x_i^2)^2 + (1 - x_i)^2 + noise * N(0,1)
//   uniform:    independent U(0,1) draws, one per objective
//   constant:   `value` for every objective
//   sleep:      sleeps `sleep_ms`, then returns `value`
struct SyntheticSettings {
  SyntheticFunction function = SyntheticFunction::sphere;
  double noise = 0.0;
  double value = 0.0;
  double sleep_ms = 50.0;
  std::size_t objectives = 1; // uniform/constant/sleep only

  void validate() const;
};

class SyntheticObjective final : public Objective {
public:
  explicit SyntheticObjective(SyntheticSettings settings);

  [[nodiscard]] std::size_t objective_count() const override {
    return settings_.objectives;
  }
  [[nodiscard]] std::vector<double> run(const ConfigPoint &config,
                                        std::uint64_t seed) const override;

private:
  SyntheticSettings settings_;
};

// Continuous x0..x{dim-1} on [lower, upper].
SearchSpace box_space(std::size_t dim, double lower, double upper);

} // namespace qnopt
