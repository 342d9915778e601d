#include "qnopt/synthetic.hpp"

#include <chrono>
#include <random>
#include <thread>

#include "qnopt/errors.hpp"
#include "qnopt/random.hpp"

namespace qnopt {

const char *to_string(SyntheticFunction f) noexcept {
  switch (f) {
  case SyntheticFunction::sphere: return "sphere";
  case SyntheticFunction::rosenbrock: return "rosenbrock";
  case SyntheticFunction::uniform: return "uniform";
  case SyntheticFunction::constant: return "constant";
  case SyntheticFunction::sleep: return "sleep";
  }
  return "?";
}

std::optional<SyntheticFunction> parse_synthetic_function(const std::string &text) {
  for (auto f : {SyntheticFunction::sphere, SyntheticFunction::rosenbrock,
                 SyntheticFunction::uniform, SyntheticFunction::constant,
                 SyntheticFunction::sleep}) {
    if (text == to_string(f)) return f;
  }
  return std::nullopt;
}

void SyntheticSettings::validate() const {
  if (!(noise >= 0.0)) throw DomainError("noise must be >= 0");
  if (!(sleep_ms >= 0.0)) throw DomainError("sleep_ms must be >= 0");
  if (objectives < 1) throw DomainError("objectives must be >= 1");
  const bool single = function == SyntheticFunction::sphere ||
                      function == SyntheticFunction::rosenbrock;
  if (single && objectives != 1) {
    throw DomainError(std::string(to_string(function)) +
                      " has exactly one objective");
  }
}

SyntheticObjective::SyntheticObjective(SyntheticSettings settings)
    : settings_(settings) {
  settings_.validate();
}

std::vector<double> SyntheticObjective::run(const ConfigPoint &config,
                                            std::uint64_t seed) const {
  Rng rng(seed);
  std::vector<double> x;
  for (const auto &v : config.values) {
    const auto *d = std::get_if<double>(&v);
    if (d == nullptr) throw DomainError("synthetic objectives need numeric parameters");
    x.push_back(*d);
  }
  auto noisy = [&](double f) {
    if (settings_.noise > 0.0) {
      f += settings_.noise * std::normal_distribution<double>(0.0, 1.0)(rng);
    }
    return std::vector<double>{f};
  };
  switch (settings_.function) {
  case SyntheticFunction::sphere: {
    double s = 0.0;
    for (double xi : x) s += xi * xi;
    return noisy(-s);
  }
  case SyntheticFunction::rosenbrock: {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
      const double a = x[i + 1] - x[i] * x[i];
      const double b = 1.0 - x[i];
      s += 100.0 * a * a + b * b;
    }
    return noisy(-s);
  }
  case SyntheticFunction::uniform: {
    std::vector<double> out(settings_.objectives);
    for (auto &o : out) o = uniform01(rng);
    return out;
  }
  case SyntheticFunction::sleep:
    std::this_thread::sleep_for(
        std::chrono::duration<double, std::milli>(settings_.sleep_ms));
    [[fallthrough]];
  case SyntheticFunction::constant:
    return std::vector<double>(settings_.objectives, settings_.value);
  }
  return {};
}

SearchSpace box_space(std::size_t dim, double lower, double upper) {
  if (dim < 1) throw DomainError("dimension must be >= 1");
  std::vector<ParamSpec> params;
  for (std::size_t i = 0; i < dim; ++i) {
    params.push_back(ParamSpec::continuous("x" + std::to_string(i), lower, upper));
  }
  return SearchSpace(std::move(params));
}

} // namespace qnopt
