#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "qnopt/random.hpp"
#include "qnopt/surrogate/dataset.hpp"
#include "qnopt/surrogate/random_forest.hpp"
#include "qnopt/surrogate/svr.hpp"

namespace qnopt {

enum class ModelKind { random_forest, support_vector };

const char *to_string(ModelKind kind) noexcept;

struct ModelSettings {
  RfSettings rf;
  SvrSettings svr;
  std::size_t workers = 1;
};

struct ForestEnsemble {
  std::vector<RandomForest> heads;
};

struct SvrEnsemble {
  Standardizer standardizer;
  double gamma = 1.0;
  std::vector<SvrHead> heads;
};

// Multi-output regressor: one independent single-output predictor per
// objective column. Immutable after construction; predict is reentrant.
class TrainedModel {
public:
  TrainedModel(std::size_t feature_dim, ForestEnsemble forest,
               std::uint64_t seed = 0, RfSettings settings = {});
  TrainedModel(std::size_t feature_dim, SvrEnsemble svr,
               SvrSettings settings = {});

  [[nodiscard]] ModelKind kind() const noexcept;
  [[nodiscard]] std::size_t feature_dim() const noexcept { return feature_dim_; }
  [[nodiscard]] std::size_t target_dim() const noexcept;

  // Throws DimensionError if features.size() != feature_dim().
  [[nodiscard]] std::vector<double> predict(std::span<const double> features) const;
  void predict_into(std::span<const double> features, std::span<double> out) const;
  // Sum over objective heads; avoids allocating the prediction vector.
  [[nodiscard]] double predict_sum(std::span<const double> features) const;

  [[nodiscard]] const ForestEnsemble *forest() const noexcept {
    return std::get_if<ForestEnsemble>(&impl_);
  }
  [[nodiscard]] const SvrEnsemble *svr() const noexcept {
    return std::get_if<SvrEnsemble>(&impl_);
  }

  [[nodiscard]] nlohmann::json to_json() const;
  static TrainedModel from_json(const nlohmann::json &doc);

private:
  std::size_t feature_dim_;
  std::variant<ForestEnsemble, SvrEnsemble> impl_;
  nlohmann::json metadata_;
};

TrainedModel train_rf(const Dataset &data, const RfSettings &settings, Rng &rng,
                      std::size_t workers = 1);

TrainedModel train_svr(const Dataset &data, const SvrSettings &settings,
                       std::span<const double> row_weights = {});

TrainedModel train(const Dataset &data, ModelKind kind,
                   const ModelSettings &settings, Rng &rng);

// Seeded shuffle of row indices split into `folds` near-equal parts (the
// first size % folds parts get one extra row).
std::vector<std::vector<std::size_t>> make_folds(std::size_t rows,
                                                 std::size_t folds, Rng &rng);

// Mean over folds of the per-fold mean absolute error across all held-out
// rows and target columns.
double cross_validate(const Dataset &data, ModelKind kind,
                      const std::vector<std::vector<std::size_t>> &folds,
                      const ModelSettings &settings, Rng &rng);

double cross_validate(const Dataset &data, ModelKind kind, std::size_t folds,
                      Rng &rng, const ModelSettings &settings = {});

struct ModelSelection {
  TrainedModel model;
  std::optional<double> rf_mae;  // empty when that kind failed to train
  std::optional<double> svr_mae;
  std::string note;              // failure diagnostics, if any
};

// Cross-validates both kinds on one shared partition and retrains the one
// with lower MAE on all rows; ties go to the random forest.
ModelSelection select_model(const Dataset &data, Rng &rng,
                            const ModelSettings &settings = {},
                            std::size_t folds = 5);

} // namespace qnopt
