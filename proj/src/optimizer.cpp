#include "qnopt/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qnopt/errors.hpp"
#include "qnopt/parallel.hpp"

namespace qnopt {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

constexpr std::uint64_t kInitTag = 0x1d17;
constexpr std::uint64_t kModelTag = 0x30de1;

} // namespace

double EvalRecord::aggregate() const {
  double sum = 0.0;
  for (double u : mean_utilities) sum += u;
  return sum;
}

void RunSettings::validate() const {
  if (n < 1) throw DomainError("runs per evaluation n must be >= 1");
  if (l < 1) throw DomainError("proposals per cycle l must be >= 1");
  if (!(d >= 1.0)) throw DomainError("exploitation degree d must be >= 1");
  if (folds < 2) throw DomainError("cross-validation folds must be >= 2");
  if (const auto *w = std::get_if<WallClockLimit>(&limit)) {
    if (!(w->seconds > 0.0)) throw DomainError("wall-clock limit must be positive");
  }
}

double TimingProfile::fraction(double part) const noexcept {
  const double t = total();
  return t > 0.0 ? part / t : 0.0;
}

std::vector<EvalRecord> evaluate_batch(const Objective &objective,
                                       const SearchSpace &space,
                                       const std::vector<ConfigPoint> &configs,
                                       std::size_t n,
                                       const std::vector<std::uint64_t> &seeds,
                                       std::size_t workers, bool keep_raw) {
  if (n < 1) {
    throw DomainError("runs per evaluation n must be >= 1");
  }
  if (seeds.size() != configs.size()) {
    throw DimensionError("one seed per configuration is required");
  }
  for (const auto &c : configs) {
    if (auto v = validate(space, c); !v.empty()) {
      throw DomainError("cannot evaluate invalid configuration: " +
                        v.front().message);
    }
  }
  const std::size_t m = objective.objective_count();
  std::vector<double> samples(configs.size() * n * m);

  parallel_for(configs.size() * n, workers, [&](std::size_t job) {
    const std::size_t c = job / n;
    const std::size_t r = job % n;
    std::vector<double> out;
    try {
      out = objective.run(configs[c], derive_seed(seeds[c], {r}));
    } catch (const std::exception &e) {
      throw EvaluationError(std::string("objective run failed: ") + e.what(),
                            describe(space, configs[c]), r);
    }
    if (out.size() != m) {
      throw EvaluationError("objective returned " + std::to_string(out.size()) +
                                " values, expected " + std::to_string(m),
                            describe(space, configs[c]), r);
    }
    for (double v : out) {
      if (!std::isfinite(v)) {
        throw EvaluationError("objective returned a non-finite value",
                              describe(space, configs[c]), r);
      }
    }
    std::copy(out.begin(), out.end(),
              samples.begin() + static_cast<std::ptrdiff_t>(job * m));
  });

  std::vector<EvalRecord> records(configs.size());
  for (std::size_t c = 0; c < configs.size(); ++c) {
    auto &rec = records[c];
    rec.config = configs[c];
    rec.sample_count = n;
    rec.mean_utilities.assign(m, 0.0);
    const auto first = samples.begin() + static_cast<std::ptrdiff_t>(c * n * m);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t j = 0; j < m; ++j) {
        rec.mean_utilities[j] += first[static_cast<std::ptrdiff_t>(r * m + j)];
      }
    }
    for (auto &u : rec.mean_utilities) u /= static_cast<double>(n);
    if (keep_raw) {
      rec.raw_samples.assign(first, first + static_cast<std::ptrdiff_t>(n * m));
    }
  }
  return records;
}

EvalRecord evaluate(const Objective &objective, const SearchSpace &space,
                    const ConfigPoint &config, std::size_t n, std::uint64_t seed,
                    std::size_t workers, bool keep_raw) {
  auto batch = evaluate_batch(objective, space, {config}, n, {seed}, workers,
                              keep_raw);
  return std::move(batch.front());
}

std::size_t best_index(const std::vector<EvalRecord> &records) {
  if (records.empty()) {
    throw InsufficientDataError("no records");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].aggregate() > records[best].aggregate()) {
      best = i;
    }
  }
  return best;
}

std::vector<std::size_t> top_indices(const std::vector<EvalRecord> &records,
                                     std::size_t count) {
  std::vector<std::size_t> idx(records.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return records[a].aggregate() > records[b].aggregate();
  });
  idx.resize(std::min(count, idx.size()));
  return idx;
}

Dataset to_dataset(const SearchSpace &space,
                   const std::vector<EvalRecord> &records) {
  if (records.empty()) {
    throw InsufficientDataError("no records to build a dataset from");
  }
  Dataset data(space.encoded_size(), records.front().mean_utilities.size());
  for (const auto &r : records) {
    data.add(encode(space, r.config), r.mean_utilities);
  }
  return data;
}

OptimizationResult run(const SearchSpace &space, const Objective &objective,
                       const RunSettings &settings,
                       const CycleCallback &on_cycle) {
  settings.validate();
  const auto start = Clock::now();
  OptimizationResult result;
  auto &profile = result.profile;
  const std::size_t m = objective.objective_count();
  std::size_t raw_stored = 0;

  auto evaluate_cycle = [&](std::size_t cycle,
                            const std::vector<ConfigPoint> &configs) {
    std::vector<std::uint64_t> seeds(configs.size());
    for (std::size_t i = 0; i < configs.size(); ++i) {
      seeds[i] = derive_seed(settings.seed, {cycle, i});
    }
    const std::size_t raw_needed = configs.size() * settings.n * m;
    const bool keep_raw = raw_stored + raw_needed <= settings.raw_sample_cap;
    const auto t0 = Clock::now();
    auto batch = evaluate_batch(objective, space, configs, settings.n, seeds,
                                settings.workers, keep_raw);
    profile.simulation += seconds_since(t0);
    if (keep_raw) raw_stored += raw_needed;
    for (auto &rec : batch) {
      rec.cycle = cycle;
      result.records.push_back(std::move(rec));
    }
  };

  auto finish_cycle = [&](CycleLog entry) {
    result.best = best_index(result.records);
    entry.dataset_size = result.records.size();
    entry.best_aggregate = result.records[result.best].aggregate();
    result.log.push_back(entry);
    profile.cycles_completed = entry.cycle + 1;
    if (on_cycle) on_cycle(result.log.back(), result.records);
  };

  // Cycle 0: uniform initial design.
  {
    Rng init_rng(derive_seed(settings.seed, {0, kInitTag}));
    std::vector<ConfigPoint> initial;
    for (std::size_t i = 0; i < settings.initial_size(); ++i) {
      initial.push_back(sample_uniform(space, init_rng));
    }
    evaluate_cycle(0, initial);
    finish_cycle(CycleLog{});
  }

  const auto *cycle_limit = std::get_if<CycleLimit>(&settings.limit);
  const auto *wall_limit = std::get_if<WallClockLimit>(&settings.limit);
  if (wall_limit && seconds_since(start) >= wall_limit->seconds) {
    result.truncated = true;
  }

  AcquisitionSettings acq;
  acq.d = settings.d;
  acq.l = settings.l;
  acq.base_samples = settings.base_samples;
  acq.growth = settings.growth;
  acq.workers = settings.workers;

  for (std::size_t t = 1; !result.truncated; ++t) {
    Progress progress;
    if (cycle_limit) {
      if (t > cycle_limit->cycles) break;
      progress = {static_cast<double>(t), static_cast<double>(cycle_limit->cycles)};
    } else {
      const double elapsed = seconds_since(start);
      if (elapsed >= wall_limit->seconds) break;
      progress = {elapsed, wall_limit->seconds};
    }

    Rng cycle_rng(derive_seed(settings.seed, {t, kModelTag}));
    CycleLog entry;
    entry.cycle = t;

    auto t0 = Clock::now();
    const Dataset data = to_dataset(space, result.records);
    std::optional<TrainedModel> model;
    if (data.size() >= settings.folds) {
      auto selection = select_model(data, cycle_rng, settings.models, settings.folds);
      entry.rf_mae = selection.rf_mae;
      entry.svr_mae = selection.svr_mae;
      model.emplace(std::move(selection.model));
    } else {
      // Too few rows to cross-validate: fit the forest directly.
      model.emplace(train_rf(data, settings.models.rf, cycle_rng,
                             settings.models.workers));
    }
    entry.model_kind = to_string(model->kind());
    profile.training += seconds_since(t0);

    t0 = Clock::now();
    const auto tops = top_indices(result.records, settings.l);
    std::vector<ConfigPoint> centers;
    centers.reserve(settings.l);
    for (std::size_t i = 0; i < settings.l; ++i) {
      centers.push_back(result.records[tops[i % tops.size()]].config);
    }
    const auto proposals = propose(*model, space, centers, progress, acq, cycle_rng);
    profile.acquisition += seconds_since(t0);

    evaluate_cycle(t, proposals);
    finish_cycle(entry);
  }

  const double total = seconds_since(start);
  profile.remaining = std::max(
      0.0, total - profile.simulation - profile.training - profile.acquisition);
  return result;
}

} // namespace qnopt
