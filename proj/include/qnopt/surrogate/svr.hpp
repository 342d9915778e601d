#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "qnopt/surrogate/dataset.hpp"

namespace qnopt {

struct SvrSettings {
  double C = 1.0;
  double epsilon = 0.1;
  // RBF width; unset means 1 / (dim * variance of the standardized features).
  std::optional<double> gamma;
  // Stopping threshold on the maximal KKT violation of the dual.
  double tolerance = 1e-3;
  std::size_t max_iterations = 1'000'000;
};

// Per-column affine map to zero mean and unit variance; constant columns map
// to zero.
class Standardizer {
public:
  Standardizer() = default;
  Standardizer(std::vector<double> mean, std::vector<double> scale);

  static Standardizer fit(const Dataset &data);

  [[nodiscard]] std::vector<double> apply(std::span<const double> x) const;
  void apply_into(std::span<const double> x, std::span<double> out) const;

  [[nodiscard]] const std::vector<double> &mean() const noexcept { return mean_; }
  [[nodiscard]] const std::vector<double> &scale() const noexcept { return scale_; }

private:
  std::vector<double> mean_;
  std::vector<double> scale_; // 0 marks a constant column
};

struct SvrDualSolution {
  std::vector<double> coef; // alpha_i - alpha_i^*, one per training row
  double bias = 0.0;
  std::size_t iterations = 0;
  double gap = 0.0; // final maximal KKT violation
};

// Solves the epsilon-insensitive SVR dual
//   min 1/2 (a - a*)' K (a - a*) + eps * sum(a + a*) - z'(a - a*)
//   s.t. sum(a - a*) = 0, 0 <= a_i, a*_i <= C * weight_i
// by sequential minimal optimization with second-order working set
// selection. `kernel` is the n x n Gram matrix in row-major order; empty
// weights mean 1 for every row. Throws ConvergenceError if the iteration cap
// is hit before the violation drops below `tolerance`.
SvrDualSolution solve_svr_dual(std::span<const double> kernel,
                               std::span<const double> targets, double C,
                               double epsilon, double tolerance,
                               std::size_t max_iterations,
                               std::span<const double> weights = {});

// Single-output RBF support-vector regressor on standardized features.
class SvrHead {
public:
  SvrHead() = default;
  SvrHead(std::vector<std::vector<double>> support, std::vector<double> coef,
          double bias);

  // `x` must already be standardized.
  [[nodiscard]] double decision(std::span<const double> x, double gamma) const;

  [[nodiscard]] const std::vector<std::vector<double>> &support() const noexcept {
    return support_;
  }
  [[nodiscard]] const std::vector<double> &coef() const noexcept { return coef_; }
  [[nodiscard]] double bias() const noexcept { return bias_; }

private:
  std::vector<std::vector<double>> support_;
  std::vector<double> coef_;
  double bias_ = 0.0;
};

double rbf_kernel(std::span<const double> a, std::span<const double> b,
                  double gamma);

} // namespace qnopt
