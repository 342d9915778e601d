#include "qnopt/baselines.hpp"

#include <chrono>
#include <cmath>

#include "qnopt/acquisition.hpp"
#include "qnopt/errors.hpp"

namespace qnopt {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Shared bookkeeping for the sequential baselines.
class BaselineRun {
public:
  BaselineRun(const SearchSpace &space, const Objective &objective,
              const BaselineSettings &settings)
      : space_(space), objective_(objective), settings_(settings),
        start_(Clock::now()) {
    if (settings.n < 1) throw DomainError("runs per evaluation n must be >= 1");
    if (const auto *b = std::get_if<EvaluationBudget>(&settings.budget)) {
      if (b->evaluations < 1) throw DomainError("budget must allow one evaluation");
    }
  }

  bool exhausted() const {
    if (const auto *b = std::get_if<EvaluationBudget>(&settings_.budget)) {
      return result_.records.size() >= b->evaluations;
    }
    return !result_.records.empty() &&
           seconds_since(start_) >= std::get<WallClockLimit>(settings_.budget).seconds;
  }

  const EvalRecord &evaluate(const ConfigPoint &config) {
    const std::size_t index = result_.records.size();
    const std::size_t m = objective_.objective_count();
    const bool keep_raw = raw_stored_ + settings_.n * m <= settings_.raw_sample_cap;
    const auto t0 = Clock::now();
    auto rec = qnopt::evaluate(objective_, space_, config, settings_.n,
                               derive_seed(settings_.seed, {index}),
                               settings_.workers, keep_raw);
    result_.profile.simulation += seconds_since(t0);
    if (keep_raw) raw_stored_ += settings_.n * m;
    rec.cycle = index;
    result_.records.push_back(std::move(rec));
    if (result_.records.size() == 1 ||
        result_.records.back().aggregate() > result_.records[result_.best].aggregate()) {
      result_.best = index;
    }
    CycleLog entry;
    entry.cycle = index;
    entry.dataset_size = result_.records.size();
    entry.best_aggregate = result_.records[result_.best].aggregate();
    result_.log.push_back(entry);
    return result_.records.back();
  }

  OptimizationResult finish() {
    const double total = seconds_since(start_);
    result_.profile.remaining = std::max(0.0, total - result_.profile.simulation);
    result_.profile.cycles_completed = result_.records.size();
    return std::move(result_);
  }

private:
  const SearchSpace &space_;
  const Objective &objective_;
  const BaselineSettings &settings_;
  Clock::time_point start_;
  OptimizationResult result_;
  std::size_t raw_stored_ = 0;
};

constexpr std::uint64_t kProposalTag = 0x5eed;

} // namespace

void SaSettings::validate() const {
  if (!(initial_temperature > 0.0)) {
    throw DomainError("initial temperature must be positive");
  }
  if (!(neighbor_scale > 0.0 && neighbor_scale <= 1.0)) {
    throw DomainError("neighbor scale must lie in (0, 1]");
  }
}

double fast_temperature(double t0, std::size_t k) {
  return t0 / static_cast<double>(k + 1);
}

double acceptance_probability(double delta, double temperature) {
  if (delta >= 0.0) return 1.0;
  return std::exp(delta / temperature);
}

OptimizationResult random_search(const SearchSpace &space,
                                 const Objective &objective,
                                 const BaselineSettings &settings) {
  BaselineRun state(space, objective, settings);
  Rng rng(derive_seed(settings.seed, {kProposalTag}));
  while (!state.exhausted()) {
    state.evaluate(sample_uniform(space, rng));
  }
  return state.finish();
}

OptimizationResult simulated_annealing(const SearchSpace &space,
                                       const Objective &objective,
                                       const BaselineSettings &settings,
                                       const SaSettings &sa) {
  sa.validate();
  if (const auto *b = std::get_if<EvaluationBudget>(&settings.budget)) {
    if (b->evaluations < 2) {
      throw DomainError("simulated annealing needs a budget of at least 2");
    }
  }
  BaselineRun state(space, objective, settings);
  Rng rng(derive_seed(settings.seed, {kProposalTag}));

  ConfigPoint current = sample_uniform(space, rng);
  double current_value = state.evaluate(current).aggregate();
  for (std::size_t k = 0; !state.exhausted(); ++k) {
    auto candidate = sample_neighbor(space, current, sa.neighbor_scale, rng);
    const double value = state.evaluate(candidate).aggregate();
    const double p = acceptance_probability(
        value - current_value, fast_temperature(sa.initial_temperature, k));
    if (p >= 1.0 || uniform01(rng) < p) {
      current = std::move(candidate);
      current_value = value;
    }
  }
  return state.finish();
}

} // namespace qnopt
