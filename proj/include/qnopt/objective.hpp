#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qnopt/param_space.hpp"

namespace qnopt {

// Stochastic black box: one call is one simulation run returning one utility
// per objective. Implementations must be safe to call concurrently and must
// derive all randomness from `seed`.
class Objective {
public:
  virtual ~Objective() = default;

  [[nodiscard]] virtual std::size_t objective_count() const = 0;
  [[nodiscard]] virtual std::vector<double> run(const ConfigPoint &config,
                                                std::uint64_t seed) const = 0;

  // Column labels for the per-objective utilities; defaults to U0, U1, ...
  [[nodiscard]] virtual std::vector<std::string> objective_names() const;
  // Simulated time covered by one run (seconds or slots); 0 if not meaningful.
  [[nodiscard]] virtual double simulated_duration() const { return 0.0; }
};

class FunctionObjective final : public Objective {
public:
  using Fn = std::function<std::vector<double>(const ConfigPoint &, std::uint64_t)>;

  FunctionObjective(std::size_t count, Fn fn,
                    std::vector<std::string> names = {});

  [[nodiscard]] std::size_t objective_count() const override { return count_; }
  [[nodiscard]] std::vector<double> run(const ConfigPoint &config,
                                        std::uint64_t seed) const override {
    return fn_(config, seed);
  }
  [[nodiscard]] std::vector<std::string> objective_names() const override;

private:
  std::size_t count_;
  Fn fn_;
  std::vector<std::string> names_;
};

} // namespace qnopt
