#include "qnopt/surrogate/svr.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "qnopt/errors.hpp"

namespace qnopt {

Standardizer::Standardizer(std::vector<double> mean, std::vector<double> scale)
    : mean_(std::move(mean)), scale_(std::move(scale)) {
  if (mean_.size() != scale_.size()) {
    throw DimensionError("standardizer mean/scale length mismatch");
  }
}

Standardizer Standardizer::fit(const Dataset &data) {
  const std::size_t dim = data.feature_dim();
  const double n = static_cast<double>(data.size());
  std::vector<double> mean(dim, 0.0);
  std::vector<double> scale(dim, 0.0);
  for (std::size_t r = 0; r < data.size(); ++r) {
    const auto x = data.features(r);
    for (std::size_t j = 0; j < dim; ++j) mean[j] += x[j];
  }
  for (auto &m : mean) m /= n;
  for (std::size_t r = 0; r < data.size(); ++r) {
    const auto x = data.features(r);
    for (std::size_t j = 0; j < dim; ++j) {
      scale[j] += (x[j] - mean[j]) * (x[j] - mean[j]);
    }
  }
  for (std::size_t j = 0; j < dim; ++j) {
    const double sd = std::sqrt(scale[j] / n);
    scale[j] = sd > 1e-12 * (1.0 + std::abs(mean[j])) ? sd : 0.0;
  }
  return Standardizer(std::move(mean), std::move(scale));
}

void Standardizer::apply_into(std::span<const double> x,
                              std::span<double> out) const {
  for (std::size_t j = 0; j < mean_.size(); ++j) {
    out[j] = scale_[j] > 0.0 ? (x[j] - mean_[j]) / scale_[j] : 0.0;
  }
}

std::vector<double> Standardizer::apply(std::span<const double> x) const {
  if (x.size() != mean_.size()) {
    throw DimensionError("standardizer expects " + std::to_string(mean_.size()) +
                         " features, got " + std::to_string(x.size()));
  }
  std::vector<double> out(x.size());
  apply_into(x, out);
  return out;
}

double rbf_kernel(std::span<const double> a, std::span<const double> b,
                  double gamma) {
  double d2 = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    d2 += d * d;
  }
  return std::exp(-gamma * d2);
}

SvrDualSolution solve_svr_dual(std::span<const double> kernel,
                               std::span<const double> targets, double C,
                               double epsilon, double tolerance,
                               std::size_t max_iterations,
                               std::span<const double> weights) {
  const std::size_t n = targets.size();
  if (n == 0) {
    throw InsufficientDataError("SVR needs at least one training row");
  }
  if (kernel.size() != n * n) {
    throw DimensionError("kernel matrix does not match the number of targets");
  }
  if (!weights.empty() && weights.size() != n) {
    throw DimensionError("SVR weight vector length mismatch");
  }
  if (!(C > 0.0) || !(epsilon >= 0.0) || !(tolerance > 0.0)) {
    throw DomainError("SVR requires C > 0, epsilon >= 0, tolerance > 0");
  }

  // Variables t < n are alpha_t (sign +1), t >= n are alpha*_{t-n} (sign -1).
  const std::size_t l = 2 * n;
  constexpr double tau = 1e-12;
  auto row = [n](std::size_t t) { return t < n ? t : t - n; };
  auto sign = [n](std::size_t t) { return t < n ? 1.0 : -1.0; };
  auto K = [&](std::size_t a, std::size_t b) {
    return kernel[row(a) * n + row(b)];
  };
  auto Q = [&](std::size_t a, std::size_t b) {
    return sign(a) * sign(b) * K(a, b);
  };
  std::vector<double> upper(l);
  for (std::size_t t = 0; t < l; ++t) {
    upper[t] = C * (weights.empty() ? 1.0 : weights[row(t)]);
  }

  std::vector<double> alpha(l, 0.0);
  std::vector<double> grad(l);
  for (std::size_t t = 0; t < n; ++t) {
    grad[t] = epsilon - targets[t];
    grad[t + n] = epsilon + targets[t];
  }
  auto at_upper = [&](std::size_t t) { return alpha[t] >= upper[t]; };
  auto at_lower = [&](std::size_t t) { return alpha[t] <= 0.0; };

  SvrDualSolution sol;
  std::size_t iter = 0;
  double gap = std::numeric_limits<double>::infinity();
  for (;;) {
    // i maximizes -y_t G_t over the "up" set.
    double gmax = -std::numeric_limits<double>::infinity();
    std::size_t i = l;
    for (std::size_t t = 0; t < l; ++t) {
      if (sign(t) > 0) {
        if (!at_upper(t) && -grad[t] >= gmax) {
          gmax = -grad[t];
          i = t;
        }
      } else if (!at_lower(t) && grad[t] >= gmax) {
        gmax = grad[t];
        i = t;
      }
    }
    double gmax2 = -std::numeric_limits<double>::infinity();
    std::size_t j = l;
    double best_obj = std::numeric_limits<double>::infinity();
    if (i < l) {
      for (std::size_t t = 0; t < l; ++t) {
        if (sign(t) > 0) {
          if (at_lower(t)) continue;
          const double grad_diff = gmax + grad[t];
          gmax2 = std::max(gmax2, grad[t]);
          if (grad_diff > 0.0) {
            double quad = K(i, i) + K(t, t) - 2.0 * sign(i) * Q(i, t);
            if (quad <= 0.0) quad = tau;
            const double obj = -(grad_diff * grad_diff) / quad;
            if (obj <= best_obj) {
              best_obj = obj;
              j = t;
            }
          }
        } else {
          if (at_upper(t)) continue;
          const double grad_diff = gmax - grad[t];
          gmax2 = std::max(gmax2, -grad[t]);
          if (grad_diff > 0.0) {
            double quad = K(i, i) + K(t, t) + 2.0 * sign(i) * Q(i, t);
            if (quad <= 0.0) quad = tau;
            const double obj = -(grad_diff * grad_diff) / quad;
            if (obj <= best_obj) {
              best_obj = obj;
              j = t;
            }
          }
        }
      }
    }
    gap = (i < l) ? gmax + gmax2 : 0.0;
    if (i >= l || j >= l || gap < tolerance) {
      break;
    }
    if (iter >= max_iterations) {
      throw ConvergenceError("SVR dual did not converge within " +
                                 std::to_string(max_iterations) +
                                 " iterations (gap " + std::to_string(gap) + ")",
                             gap);
    }
    ++iter;

    const double ci = upper[i];
    const double cj = upper[j];
    const double old_i = alpha[i];
    const double old_j = alpha[j];
    const double qij = Q(i, j);
    if (sign(i) != sign(j)) {
      double quad = K(i, i) + K(j, j) + 2.0 * qij;
      if (quad <= 0.0) quad = tau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > ci - cj) {
        if (alpha[i] > ci) {
          alpha[i] = ci;
          alpha[j] = ci - diff;
        }
      } else if (alpha[j] > cj) {
        alpha[j] = cj;
        alpha[i] = cj + diff;
      }
    } else {
      double quad = K(i, i) + K(j, j) - 2.0 * qij;
      if (quad <= 0.0) quad = tau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > ci) {
        if (alpha[i] > ci) {
          alpha[i] = ci;
          alpha[j] = sum - ci;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > cj) {
        if (alpha[j] > cj) {
          alpha[j] = cj;
          alpha[i] = sum - cj;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }

    const double di = alpha[i] - old_i;
    const double dj = alpha[j] - old_j;
    for (std::size_t t = 0; t < l; ++t) {
      grad[t] += Q(i, t) * di + Q(j, t) * dj;
    }
  }

  // Offset from the free variables, or the midpoint of the feasible range.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < l; ++t) {
    const double yg = sign(t) * grad[t];
    if (at_upper(t)) {
      if (sign(t) < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (at_lower(t)) {
      if (sign(t) > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho =
      n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);

  sol.coef.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    sol.coef[t] = alpha[t] - alpha[t + n];
  }
  sol.bias = -rho;
  sol.iterations = iter;
  sol.gap = gap;
  return sol;
}

SvrHead::SvrHead(std::vector<std::vector<double>> support,
                 std::vector<double> coef, double bias)
    : support_(std::move(support)), coef_(std::move(coef)), bias_(bias) {
  if (support_.size() != coef_.size()) {
    throw DimensionError("SVR support/coefficient length mismatch");
  }
}

double SvrHead::decision(std::span<const double> x, double gamma) const {
  double f = bias_;
  for (std::size_t s = 0; s < support_.size(); ++s) {
    f += coef_[s] * rbf_kernel(support_[s], x, gamma);
  }
  return f;
}

} // namespace qnopt
