#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace qnopt {

// Row-major table of (features, targets) pairs sharing fixed dimensions.
class Dataset {
public:
  Dataset(std::size_t feature_dim, std::size_t target_dim);

  // Throws DimensionError on a size mismatch, DomainError on non-finite data.
  void add(std::span<const double> features, std::span<const double> targets);

  [[nodiscard]] std::size_t size() const noexcept { return rows_; }
  [[nodiscard]] bool empty() const noexcept { return rows_ == 0; }
  [[nodiscard]] std::size_t feature_dim() const noexcept { return feature_dim_; }
  [[nodiscard]] std::size_t target_dim() const noexcept { return target_dim_; }

  [[nodiscard]] std::span<const double> features(std::size_t row) const {
    return {features_.data() + row * feature_dim_, feature_dim_};
  }
  [[nodiscard]] std::span<const double> targets(std::size_t row) const {
    return {targets_.data() + row * target_dim_, target_dim_};
  }
  [[nodiscard]] double target(std::size_t row, std::size_t column) const {
    return targets_[row * target_dim_ + column];
  }

  [[nodiscard]] Dataset subset(std::span<const std::size_t> rows) const;

private:
  std::size_t feature_dim_;
  std::size_t target_dim_;
  std::size_t rows_ = 0;
  std::vector<double> features_;
  std::vector<double> targets_;
};

} // namespace qnopt
