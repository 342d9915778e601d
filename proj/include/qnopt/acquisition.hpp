#pragma once

#include <cstddef>
#include <vector>

#include "qnopt/param_space.hpp"
#include "qnopt/random.hpp"
#include "qnopt/surrogate/model.hpp"

namespace qnopt {

struct AcquisitionSettings {
  double d = 4.0;           // exploitation degree, >= 1
  std::size_t l = 5;        // proposals per cycle
  double base_samples = 10.0;
  double growth = 1e4;
  std::size_t workers = 1;

  void validate() const;
};

// Progress through the run: cycle indices, or elapsed/total seconds.
struct Progress {
  double t = 0.0;
  double T = 1.0;
};

// Exploration-to-exploitation schedule (1 - ln^2(1 + t/T))^d. t is clamped to
// [0, T].
double transition(double t, double T, double d);

// Neighbourhood sample budget floor(base + growth * t / T), t clamped.
std::size_t sample_count(double t, double T, double base_samples = 10.0,
                         double growth = 1e4);

// Normal(mu, sigma) truncated to [lo, hi] by rejection; after `max_tries`
// rejections the last draw is clamped. sigma <= 0 returns mu.
double truncated_normal(Rng &rng, double mu, double sigma, double lo, double hi,
                        int max_tries = 100);

// Perturbs every parameter of `center` with a neighbourhood of width gamma.
ConfigPoint sample_neighbor(const SearchSpace &space, const ConfigPoint &center,
                            double gamma, Rng &rng);

// One proposal per entry of `top` (in order): the neighbour with the highest
// predicted aggregate utility among sample_count(t, T) draws.
std::vector<ConfigPoint> propose(const TrainedModel &model,
                                 const SearchSpace &space,
                                 const std::vector<ConfigPoint> &top,
                                 Progress progress,
                                 const AcquisitionSettings &settings, Rng &rng);

} // namespace qnopt
