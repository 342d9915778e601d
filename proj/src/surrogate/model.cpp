#include "qnopt/surrogate/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qnopt/errors.hpp"

namespace qnopt {

using nlohmann::json;

namespace {

constexpr int kModelFormatVersion = 1;

json rf_settings_json(const RfSettings &s) {
  return {{"n_trees", s.n_trees},
          {"max_depth", s.max_depth},
          {"min_samples_split", s.min_samples_split},
          {"max_features", s.max_features},
          {"bootstrap", s.bootstrap}};
}

json svr_settings_json(const SvrSettings &s) {
  json j = {{"C", s.C},
            {"epsilon", s.epsilon},
            {"tolerance", s.tolerance},
            {"max_iterations", s.max_iterations}};
  j["gamma"] = s.gamma ? json(*s.gamma) : json(nullptr);
  return j;
}

} // namespace

const char *to_string(ModelKind kind) noexcept {
  return kind == ModelKind::random_forest ? "random-forest" : "support-vector";
}

TrainedModel::TrainedModel(std::size_t feature_dim, ForestEnsemble forest,
                           std::uint64_t seed, RfSettings settings)
    : feature_dim_(feature_dim), impl_(std::move(forest)) {
  if (std::get<ForestEnsemble>(impl_).heads.empty()) {
    throw DimensionError("model needs at least one objective head");
  }
  metadata_ = {{"seed", seed}, {"hyper", rf_settings_json(settings)}};
}

TrainedModel::TrainedModel(std::size_t feature_dim, SvrEnsemble svr,
                           SvrSettings settings)
    : feature_dim_(feature_dim), impl_(std::move(svr)) {
  const auto &e = std::get<SvrEnsemble>(impl_);
  if (e.heads.empty()) {
    throw DimensionError("model needs at least one objective head");
  }
  if (e.standardizer.mean().size() != feature_dim) {
    throw DimensionError("standardizer width does not match feature_dim");
  }
  metadata_ = {{"hyper", svr_settings_json(settings)}};
}

ModelKind TrainedModel::kind() const noexcept {
  return std::holds_alternative<ForestEnsemble>(impl_) ? ModelKind::random_forest
                                                       : ModelKind::support_vector;
}

std::size_t TrainedModel::target_dim() const noexcept {
  return std::visit([](const auto &e) { return e.heads.size(); }, impl_);
}

void TrainedModel::predict_into(std::span<const double> features,
                                std::span<double> out) const {
  if (features.size() != feature_dim_) {
    throw DimensionError("model expects " + std::to_string(feature_dim_) +
                         " features, got " + std::to_string(features.size()));
  }
  if (out.size() != target_dim()) {
    throw DimensionError("prediction buffer has wrong length");
  }
  if (const auto *f = forest()) {
    for (std::size_t h = 0; h < f->heads.size(); ++h) {
      out[h] = f->heads[h].predict(features);
    }
    return;
  }
  const auto &s = std::get<SvrEnsemble>(impl_);
  thread_local std::vector<double> scaled;
  scaled.resize(feature_dim_);
  s.standardizer.apply_into(features, scaled);
  for (std::size_t h = 0; h < s.heads.size(); ++h) {
    out[h] = s.heads[h].decision(scaled, s.gamma);
  }
}

std::vector<double> TrainedModel::predict(std::span<const double> features) const {
  std::vector<double> out(target_dim());
  predict_into(features, out);
  return out;
}

double TrainedModel::predict_sum(std::span<const double> features) const {
  thread_local std::vector<double> buf;
  buf.resize(target_dim());
  predict_into(features, buf);
  double sum = 0.0;
  for (double v : buf) sum += v;
  return sum;
}

TrainedModel train_rf(const Dataset &data, const RfSettings &settings, Rng &rng,
                      std::size_t workers) {
  if (data.empty()) {
    throw InsufficientDataError("random forest needs at least one row");
  }
  const std::uint64_t seed = rng();
  ForestEnsemble ensemble;
  ensemble.heads.reserve(data.target_dim());
  for (std::size_t h = 0; h < data.target_dim(); ++h) {
    ensemble.heads.push_back(RandomForest::fit(
        data, h, settings, derive_seed(seed, {h}), workers));
  }
  return TrainedModel(data.feature_dim(), std::move(ensemble), seed, settings);
}

TrainedModel train_svr(const Dataset &data, const SvrSettings &settings,
                       std::span<const double> row_weights) {
  if (data.empty()) {
    throw InsufficientDataError("support-vector regression needs at least one row");
  }
  const std::size_t n = data.size();
  const std::size_t dim = data.feature_dim();
  SvrEnsemble ensemble;
  ensemble.standardizer = Standardizer::fit(data);

  std::vector<std::vector<double>> scaled(n);
  double total = 0.0;
  double total_sq = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    scaled[r] = ensemble.standardizer.apply(data.features(r));
    for (double v : scaled[r]) {
      total += v;
      total_sq += v * v;
    }
  }
  if (settings.gamma) {
    ensemble.gamma = *settings.gamma;
  } else {
    const double count = static_cast<double>(n * dim);
    const double mean = total / count;
    const double var = total_sq / count - mean * mean;
    ensemble.gamma = var > 1e-12 ? 1.0 / (static_cast<double>(dim) * var) : 1.0;
  }
  if (!(ensemble.gamma > 0.0)) {
    throw DomainError("RBF gamma must be positive");
  }

  std::vector<double> kernel(n * n);
  for (std::size_t a = 0; a < n; ++a) {
    kernel[a * n + a] = 1.0;
    for (std::size_t b = a + 1; b < n; ++b) {
      const double k = rbf_kernel(scaled[a], scaled[b], ensemble.gamma);
      kernel[a * n + b] = k;
      kernel[b * n + a] = k;
    }
  }

  std::vector<double> targets(n);
  for (std::size_t h = 0; h < data.target_dim(); ++h) {
    for (std::size_t r = 0; r < n; ++r) targets[r] = data.target(r, h);
    const auto sol =
        solve_svr_dual(kernel, targets, settings.C, settings.epsilon,
                       settings.tolerance, settings.max_iterations, row_weights);
    std::vector<std::vector<double>> support;
    std::vector<double> coef;
    for (std::size_t r = 0; r < n; ++r) {
      if (sol.coef[r] != 0.0) {
        support.push_back(scaled[r]);
        coef.push_back(sol.coef[r]);
      }
    }
    ensemble.heads.emplace_back(std::move(support), std::move(coef), sol.bias);
  }
  return TrainedModel(dim, std::move(ensemble), settings);
}

TrainedModel train(const Dataset &data, ModelKind kind,
                   const ModelSettings &settings, Rng &rng) {
  if (kind == ModelKind::random_forest) {
    return train_rf(data, settings.rf, rng, settings.workers);
  }
  return train_svr(data, settings.svr);
}

std::vector<std::vector<std::size_t>> make_folds(std::size_t rows,
                                                 std::size_t folds, Rng &rng) {
  if (folds < 2) {
    throw DomainError("cross-validation needs at least 2 folds");
  }
  if (rows < folds) {
    throw InsufficientDataError("cross-validation with " +
                                std::to_string(folds) + " folds needs at least " +
                                std::to_string(folds) + " rows, got " +
                                std::to_string(rows));
  }
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> out(folds);
  const std::size_t base = rows / folds;
  const std::size_t extra = rows % folds;
  std::size_t pos = 0;
  for (std::size_t k = 0; k < folds; ++k) {
    const std::size_t len = base + (k < extra ? 1 : 0);
    out[k].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                  order.begin() + static_cast<std::ptrdiff_t>(pos + len));
    pos += len;
  }
  return out;
}

double cross_validate(const Dataset &data, ModelKind kind,
                      const std::vector<std::vector<std::size_t>> &folds,
                      const ModelSettings &settings, Rng &rng) {
  double total = 0.0;
  std::vector<double> pred(data.target_dim());
  for (std::size_t k = 0; k < folds.size(); ++k) {
    std::vector<std::size_t> train_rows;
    for (std::size_t other = 0; other < folds.size(); ++other) {
      if (other != k) {
        train_rows.insert(train_rows.end(), folds[other].begin(),
                          folds[other].end());
      }
    }
    const auto model = train(data.subset(train_rows), kind, settings, rng);
    double err = 0.0;
    for (auto r : folds[k]) {
      model.predict_into(data.features(r), pred);
      for (std::size_t h = 0; h < pred.size(); ++h) {
        err += std::abs(pred[h] - data.target(r, h));
      }
    }
    total += err / static_cast<double>(folds[k].size() * data.target_dim());
  }
  return total / static_cast<double>(folds.size());
}

double cross_validate(const Dataset &data, ModelKind kind, std::size_t folds,
                      Rng &rng, const ModelSettings &settings) {
  const auto partition = make_folds(data.size(), folds, rng);
  return cross_validate(data, kind, partition, settings, rng);
}

ModelSelection select_model(const Dataset &data, Rng &rng,
                            const ModelSettings &settings, std::size_t folds) {
  const auto partition = make_folds(data.size(), folds, rng);
  const std::uint64_t cv_seed = rng();
  const std::uint64_t final_seed = rng();

  std::optional<double> rf_mae;
  std::optional<double> svr_mae;
  std::string note;
  std::exception_ptr rf_error;
  try {
    Rng cv_rng(cv_seed);
    rf_mae = cross_validate(data, ModelKind::random_forest, partition, settings,
                            cv_rng);
  } catch (const Error &e) {
    rf_error = std::current_exception();
    note += std::string("random-forest failed: ") + e.what() + "; ";
  }
  try {
    Rng unused(cv_seed);
    svr_mae = cross_validate(data, ModelKind::support_vector, partition,
                             settings, unused);
  } catch (const Error &e) {
    note += std::string("support-vector failed: ") + e.what() + "; ";
  }
  if (!rf_mae && !svr_mae) {
    std::rethrow_exception(rf_error);
  }

  const bool pick_rf = rf_mae && (!svr_mae || *rf_mae <= *svr_mae);
  Rng final_rng(final_seed);
  auto model = train(data, pick_rf ? ModelKind::random_forest
                                   : ModelKind::support_vector,
                     settings, final_rng);
  return {std::move(model), rf_mae, svr_mae, std::move(note)};
}

// Serialization --------------------------------------------------------------

json TrainedModel::to_json() const {
  json doc;
  doc["format"] = "qnopt-model";
  doc["version"] = kModelFormatVersion;
  doc["kind"] = to_string(kind());
  doc["feature_dim"] = feature_dim_;
  doc["metadata"] = metadata_;
  json heads = json::array();
  if (const auto *f = forest()) {
    for (const auto &forest_head : f->heads) {
      json trees = json::array();
      for (const auto &tree : forest_head.trees()) {
        json nodes = json::array();
        for (const auto &n : tree.nodes()) {
          nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
        }
        trees.push_back(std::move(nodes));
      }
      heads.push_back(std::move(trees));
    }
  } else {
    const auto &s = *svr();
    doc["gamma"] = s.gamma;
    doc["mean"] = s.standardizer.mean();
    doc["scale"] = s.standardizer.scale();
    for (const auto &h : s.heads) {
      heads.push_back(
          {{"bias", h.bias()}, {"coef", h.coef()}, {"support", h.support()}});
    }
  }
  doc["heads"] = std::move(heads);
  return doc;
}

TrainedModel TrainedModel::from_json(const json &doc) {
  try {
    if (doc.at("format") != "qnopt-model") {
      throw DomainError("not a qnopt model document");
    }
    if (doc.at("version").get<int>() != kModelFormatVersion) {
      throw DomainError("unsupported model format version " +
                        doc.at("version").dump());
    }
    const auto dim = doc.at("feature_dim").get<std::size_t>();
    const auto kind = doc.at("kind").get<std::string>();
    if (kind == to_string(ModelKind::random_forest)) {
      ForestEnsemble e;
      for (const auto &head : doc.at("heads")) {
        std::vector<RegressionTree> trees;
        for (const auto &nodes : head) {
          std::vector<RegressionTree::Node> parsed;
          for (const auto &n : nodes) {
            parsed.push_back({n.at(0).get<int>(), n.at(1).get<double>(),
                              n.at(2).get<int>(), n.at(3).get<int>(),
                              n.at(4).get<double>()});
          }
          trees.emplace_back(std::move(parsed));
        }
        e.heads.emplace_back(std::move(trees));
      }
      TrainedModel m(dim, std::move(e));
      m.metadata_ = doc.value("metadata", json::object());
      return m;
    }
    if (kind == to_string(ModelKind::support_vector)) {
      SvrEnsemble e;
      e.gamma = doc.at("gamma").get<double>();
      e.standardizer = Standardizer(doc.at("mean").get<std::vector<double>>(),
                                    doc.at("scale").get<std::vector<double>>());
      for (const auto &h : doc.at("heads")) {
        e.heads.emplace_back(
            h.at("support").get<std::vector<std::vector<double>>>(),
            h.at("coef").get<std::vector<double>>(), h.at("bias").get<double>());
      }
      TrainedModel m(dim, std::move(e));
      m.metadata_ = doc.value("metadata", json::object());
      return m;
    }
    throw DomainError("unknown model kind '" + kind + "'");
  } catch (const json::exception &e) {
    throw DomainError(std::string("malformed model document: ") + e.what());
  }
}

} // namespace qnopt
