#include "qnopt/surrogate/dataset.hpp"

#include <cmath>
#include <string>

#include "qnopt/errors.hpp"

namespace qnopt {

Dataset::Dataset(std::size_t feature_dim, std::size_t target_dim)
    : feature_dim_(feature_dim), target_dim_(target_dim) {
  if (feature_dim == 0) {
    throw DimensionError("dataset feature dimension must be positive");
  }
  if (target_dim == 0) {
    throw DimensionError("dataset needs at least one target column");
  }
}

void Dataset::add(std::span<const double> features,
                  std::span<const double> targets) {
  if (features.size() != feature_dim_ || targets.size() != target_dim_) {
    throw DimensionError("dataset row has shape (" +
                         std::to_string(features.size()) + ", " +
                         std::to_string(targets.size()) + "), expected (" +
                         std::to_string(feature_dim_) + ", " +
                         std::to_string(target_dim_) + ")");
  }
  for (double v : features) {
    if (!std::isfinite(v)) throw DomainError("non-finite feature value");
  }
  for (double v : targets) {
    if (!std::isfinite(v)) throw DomainError("non-finite target value");
  }
  features_.insert(features_.end(), features.begin(), features.end());
  targets_.insert(targets_.end(), targets.begin(), targets.end());
  ++rows_;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out(feature_dim_, target_dim_);
  out.features_.reserve(rows.size() * feature_dim_);
  out.targets_.reserve(rows.size() * target_dim_);
  for (auto r : rows) {
    const auto f = features(r);
    const auto t = targets(r);
    out.features_.insert(out.features_.end(), f.begin(), f.end());
    out.targets_.insert(out.targets_.end(), t.begin(), t.end());
    ++out.rows_;
  }
  return out;
}

} // namespace qnopt
