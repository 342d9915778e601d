#include "qnopt/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qnopt/errors.hpp"
#include "qnopt/parallel.hpp"

namespace qnopt {

void AcquisitionSettings::validate() const {
  if (!(d >= 1.0)) throw DomainError("exploitation degree d must be >= 1");
  if (l < 1) throw DomainError("proposals per cycle l must be >= 1");
  if (!(base_samples >= 1.0) || !(growth >= 0.0)) {
    throw DomainError("sample-count constants must satisfy base >= 1, growth >= 0");
  }
}

namespace {

double clamp_progress(double t, double T) {
  if (!(T > 0.0)) {
    throw DomainError("progress limit T must be positive");
  }
  return std::clamp(t, 0.0, T);
}

// Round half to even.
double round_even(double x) {
  const double r = std::round(x);
  if (std::abs(x - std::trunc(x)) == 0.5) {
    return 2.0 * std::round(x / 2.0);
  }
  return r;
}

} // namespace

double transition(double t, double T, double d) {
  if (!(d >= 1.0)) {
    throw DomainError("exploitation degree d must be >= 1");
  }
  t = clamp_progress(t, T);
  const double ln = std::log1p(t / T);
  return std::pow(1.0 - ln * ln, d);
}

std::size_t sample_count(double t, double T, double base_samples,
                         double growth) {
  t = clamp_progress(t, T);
  return static_cast<std::size_t>(std::floor(base_samples + growth * t / T));
}

double truncated_normal(Rng &rng, double mu, double sigma, double lo, double hi,
                        int max_tries) {
  if (!(sigma > 0.0)) {
    return std::clamp(mu, lo, hi);
  }
  std::normal_distribution<double> dist(mu, sigma);
  double x = mu;
  for (int i = 0; i < max_tries; ++i) {
    x = dist(rng);
    if (x >= lo && x <= hi) {
      return x;
    }
  }
  return std::clamp(x, lo, hi);
}

ConfigPoint sample_neighbor(const SearchSpace &space, const ConfigPoint &center,
                            double gamma, Rng &rng) {
  if (center.values.size() != space.size()) {
    throw DimensionError("neighbour center has wrong arity");
  }
  gamma = std::max(gamma, 0.0);
  ConfigPoint out;
  out.values.reserve(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto &p = space.params()[i];
    const auto &c = center.values[i];
    switch (p.kind()) {
    case ParamKind::continuous: {
      const double sigma = gamma * (p.max() - p.min()) / 2.0;
      out.values.emplace_back(
          truncated_normal(rng, std::get<double>(c), sigma, p.min(), p.max()));
      break;
    }
    case ParamKind::integer: {
      const double sigma = gamma * (p.max() - p.min()) / 2.0;
      const double x =
          truncated_normal(rng, std::get<double>(c), sigma, p.min(), p.max());
      const double lo = static_cast<double>(p.integer_low());
      const double hi = static_cast<double>(p.integer_high());
      out.values.emplace_back(std::clamp(round_even(x), lo, hi));
      break;
    }
    case ParamKind::ordinal: {
      const double top = static_cast<double>(p.values().size() - 1);
      const double mu =
          static_cast<double>(*p.index_of(std::get<std::string>(c)));
      const double x = truncated_normal(rng, mu, gamma * top / 2.0, 0.0, top);
      const auto idx = static_cast<std::size_t>(std::clamp(round_even(x), 0.0, top));
      out.values.emplace_back(p.values()[idx]);
      break;
    }
    case ParamKind::categorical: {
      if (uniform01(rng) < gamma) {
        std::uniform_int_distribution<std::size_t> pick(0, p.values().size() - 1);
        out.values.emplace_back(p.values()[pick(rng)]);
      } else {
        out.values.push_back(c);
      }
      break;
    }
    }
  }
  return out;
}

std::vector<ConfigPoint> propose(const TrainedModel &model,
                                 const SearchSpace &space,
                                 const std::vector<ConfigPoint> &top,
                                 Progress progress,
                                 const AcquisitionSettings &settings, Rng &rng) {
  settings.validate();
  if (top.empty()) {
    throw DomainError("acquisition needs at least one top configuration");
  }
  if (model.feature_dim() != space.encoded_size()) {
    throw DimensionError("model feature dimension does not match the space encoding");
  }
  const double gamma = transition(progress.t, progress.T, settings.d);
  const std::size_t draws = std::max<std::size_t>(
      1, sample_count(progress.t, progress.T, settings.base_samples,
                      settings.growth));
  const std::uint64_t base_seed = rng();

  std::vector<ConfigPoint> out(top.size());
  parallel_for(top.size(), settings.workers, [&](std::size_t k) {
    Rng local(derive_seed(base_seed, {k}));
    double best_score = -std::numeric_limits<double>::infinity();
    ConfigPoint best;
    for (std::size_t s = 0; s < draws; ++s) {
      auto candidate = sample_neighbor(space, top[k], gamma, local);
      const double score = model.predict_sum(encode(space, candidate));
      if (best.values.empty() || score > best_score) {
        best_score = score;
        best = std::move(candidate);
      }
    }
    out[k] = std::move(best);
  });
  return out;
}

} // namespace qnopt
