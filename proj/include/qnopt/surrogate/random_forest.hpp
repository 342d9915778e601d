#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qnopt/surrogate/dataset.hpp"

namespace qnopt {

struct RfSettings {
  std::size_t n_trees = 100;
  std::size_t max_depth = 0; // 0: unlimited
  std::size_t min_samples_split = 2;
  std::size_t max_features = 0; // 0: max(1, ceil(dim / 3))
  bool bootstrap = true;
};

// Binary CART regression tree stored as a flat node array; node 0 is the
// root. A node with left < 0 is a leaf.
class RegressionTree {
public:
  struct Node {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };

  RegressionTree() = default;
  explicit RegressionTree(std::vector<Node> nodes);

  static RegressionTree leaf(double value);

  // Fits column `target` of `data` on the given (possibly repeated) rows.
  static RegressionTree fit(const Dataset &data, std::size_t target,
                            std::span<const std::size_t> rows,
                            const RfSettings &settings, std::uint64_t seed);

  [[nodiscard]] double predict(std::span<const double> features) const;
  [[nodiscard]] const std::vector<Node> &nodes() const noexcept { return nodes_; }
  [[nodiscard]] std::size_t depth() const;

private:
  std::vector<Node> nodes_;
};

class RandomForest {
public:
  RandomForest() = default;
  explicit RandomForest(std::vector<RegressionTree> trees);

  // Tree k trains on a bootstrap resample drawn from derive_seed(seed, {k}),
  // so the result does not depend on `workers`.
  static RandomForest fit(const Dataset &data, std::size_t target,
                          const RfSettings &settings, std::uint64_t seed,
                          std::size_t workers = 1);

  [[nodiscard]] double predict(std::span<const double> features) const;
  [[nodiscard]] const std::vector<RegressionTree> &trees() const noexcept {
    return trees_;
  }

private:
  std::vector<RegressionTree> trees_;
};

} // namespace qnopt
