#pragma once

#include <cstddef>
#include <cstdint>
#include <variant>

#include "qnopt/objective.hpp"
#include "qnopt/optimizer.hpp"
#include "qnopt/param_space.hpp"

namespace qnopt {

struct EvaluationBudget {
  std::size_t evaluations = 100;
};

using Budget = std::variant<EvaluationBudget, WallClockLimit>;

struct BaselineSettings {
  Budget budget = EvaluationBudget{};
  std::size_t n = 20;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::size_t raw_sample_cap = 1'000'000;
};

struct SaSettings {
  double initial_temperature = 1.0;
  double neighbor_scale = 0.1; // fixed neighbourhood width, in (0, 1]

  void validate() const;
};

// Fast annealing schedule T0 / (k + 1).
double fast_temperature(double t0, std::size_t k);

// Metropolis acceptance probability: 1 for delta >= 0, else exp(delta / T).
double acceptance_probability(double delta, double temperature);

// Record i has cycle = i (evaluation index).
OptimizationResult random_search(const SearchSpace &space,
                                 const Objective &objective,
                                 const BaselineSettings &settings);

OptimizationResult simulated_annealing(const SearchSpace &space,
                                       const Objective &objective,
                                       const BaselineSettings &settings,
                                       const SaSettings &sa);

} // namespace qnopt
