#include "qnopt/surrogate/random_forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qnopt/errors.hpp"
#include "qnopt/parallel.hpp"
#include "qnopt/random.hpp"

namespace qnopt {

namespace {

struct SplitCandidate {
  int feature = -1;
  double threshold = 0.0;
  double sse = 0.0;
  std::size_t left_count = 0;
};

class TreeBuilder {
public:
  TreeBuilder(const Dataset &data, std::size_t target,
              const RfSettings &settings, std::uint64_t seed)
      : data_(data), target_(target), settings_(settings), rng_(seed) {
    const std::size_t dim = data.feature_dim();
    mtry_ = settings.max_features > 0
                ? std::min(settings.max_features, dim)
                : std::max<std::size_t>(1, (dim + 2) / 3);
    feature_order_.resize(dim);
    std::iota(feature_order_.begin(), feature_order_.end(), 0);
  }

  std::vector<RegressionTree::Node> build(std::vector<std::size_t> rows) {
    nodes_.clear();
    grow(rows, 0);
    return std::move(nodes_);
  }

private:
  double y(std::size_t row) const { return data_.target(row, target_); }
  double x(std::size_t row, std::size_t f) const {
    return data_.features(row)[f];
  }

  int grow(std::vector<std::size_t> &rows, std::size_t depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();

    double sum = 0.0;
    for (auto r : rows) sum += y(r);
    const double mean = sum / static_cast<double>(rows.size());
    double sse = 0.0;
    for (auto r : rows) sse += (y(r) - mean) * (y(r) - mean);
    nodes_[id].value = mean;

    const bool depth_capped =
        settings_.max_depth > 0 && depth >= settings_.max_depth;
    if (depth_capped || rows.size() < settings_.min_samples_split ||
        sse <= 1e-14 * (1.0 + mean * mean) * static_cast<double>(rows.size())) {
      return id;
    }

    const auto split = best_split(rows);
    if (split.feature < 0) {
      return id;
    }

    auto mid = std::partition(rows.begin(), rows.end(), [&](std::size_t r) {
      return x(r, static_cast<std::size_t>(split.feature)) <= split.threshold;
    });
    std::vector<std::size_t> left(rows.begin(), mid);
    std::vector<std::size_t> right(mid, rows.end());
    rows.clear();
    rows.shrink_to_fit();

    nodes_[id].feature = split.feature;
    nodes_[id].threshold = split.threshold;
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  // Searches features in random order; keeps going past mtry until at least
  // one feature admits a split.
  SplitCandidate best_split(const std::vector<std::size_t> &rows) {
    std::shuffle(feature_order_.begin(), feature_order_.end(), rng_);
    SplitCandidate best;
    best.sse = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> sorted(rows);
    std::size_t tried = 0;
    for (auto f : feature_order_) {
      if (tried >= mtry_ && best.feature >= 0) {
        break;
      }
      ++tried;
      std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
        return x(a, f) < x(b, f);
      });
      const std::size_t n = sorted.size();
      double total = 0.0;
      double total_sq = 0.0;
      for (auto r : sorted) {
        total += y(r);
        total_sq += y(r) * y(r);
      }
      double left_sum = 0.0;
      double left_sq = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const double v = y(sorted[i]);
        left_sum += v;
        left_sq += v * v;
        const double a = x(sorted[i], f);
        const double b = x(sorted[i + 1], f);
        if (!(a < b)) {
          continue;
        }
        const double nl = static_cast<double>(i + 1);
        const double nr = static_cast<double>(n - i - 1);
        const double right_sum = total - left_sum;
        const double right_sq = total_sq - left_sq;
        const double sse = (left_sq - left_sum * left_sum / nl) +
                           (right_sq - right_sum * right_sum / nr);
        if (sse < best.sse) {
          double threshold = 0.5 * (a + b);
          if (!(threshold < b)) {
            threshold = a;
          }
          best = {static_cast<int>(f), threshold, sse, i + 1};
        }
      }
    }
    return best;
  }

  const Dataset &data_;
  std::size_t target_;
  const RfSettings &settings_;
  Rng rng_;
  std::size_t mtry_ = 1;
  std::vector<std::size_t> feature_order_;
  std::vector<RegressionTree::Node> nodes_;
};

} // namespace

RegressionTree::RegressionTree(std::vector<Node> nodes)
    : nodes_(std::move(nodes)) {
  if (nodes_.empty()) {
    throw DomainError("regression tree needs at least one node");
  }
  const int n = static_cast<int>(nodes_.size());
  for (const auto &node : nodes_) {
    if (node.left >= 0 && (node.left >= n || node.right < 0 || node.right >= n ||
                           node.feature < 0)) {
      throw DomainError("regression tree has a dangling child index");
    }
  }
}

RegressionTree RegressionTree::leaf(double value) {
  Node node;
  node.value = value;
  return RegressionTree({node});
}

RegressionTree RegressionTree::fit(const Dataset &data, std::size_t target,
                                   std::span<const std::size_t> rows,
                                   const RfSettings &settings,
                                   std::uint64_t seed) {
  if (rows.empty()) {
    throw InsufficientDataError("cannot fit a tree on zero rows");
  }
  TreeBuilder builder(data, target, settings, seed);
  return RegressionTree(
      builder.build(std::vector<std::size_t>(rows.begin(), rows.end())));
}

double RegressionTree::predict(std::span<const double> features) const {
  std::size_t i = 0;
  while (nodes_[i].left >= 0) {
    const auto &node = nodes_[i];
    i = static_cast<std::size_t>(
        features[static_cast<std::size_t>(node.feature)] <= node.threshold
            ? node.left
            : node.right);
  }
  return nodes_[i].value;
}

std::size_t RegressionTree::depth() const {
  std::vector<std::size_t> level(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (nodes_[i].left >= 0) {
      level[static_cast<std::size_t>(nodes_[i].left)] = level[i] + 1;
      level[static_cast<std::size_t>(nodes_[i].right)] = level[i] + 1;
    }
  }
  return deepest;
}

RandomForest::RandomForest(std::vector<RegressionTree> trees)
    : trees_(std::move(trees)) {
  if (trees_.empty()) {
    throw DomainError("random forest needs at least one tree");
  }
}

RandomForest RandomForest::fit(const Dataset &data, std::size_t target,
                               const RfSettings &settings, std::uint64_t seed,
                               std::size_t workers) {
  if (data.empty()) {
    throw InsufficientDataError("cannot fit a random forest on an empty dataset");
  }
  if (settings.n_trees == 0) {
    throw DomainError("random forest needs n_trees >= 1");
  }
  const std::size_t n = data.size();
  std::vector<RegressionTree> trees(settings.n_trees);
  parallel_for(settings.n_trees, workers, [&](std::size_t k) {
    const std::uint64_t tree_seed = derive_seed(seed, {k});
    std::vector<std::size_t> rows(n);
    if (settings.bootstrap) {
      Rng rng(derive_seed(tree_seed, {0xb007}));
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (auto &r : rows) r = pick(rng);
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    trees[k] = RegressionTree::fit(data, target, rows, settings, tree_seed);
  });
  return RandomForest(std::move(trees));
}

double RandomForest::predict(std::span<const double> features) const {
  double sum = 0.0;
  for (const auto &tree : trees_) {
    sum += tree.predict(features);
  }
  return sum / static_cast<double>(trees_.size());
}

} // namespace qnopt
