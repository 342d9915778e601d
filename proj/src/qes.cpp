#include "qnopt/qes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qnopt/errors.hpp"

namespace qnopt::qes {

void Topology::validate() const {
  if (link_lengths.size() < 2) {
    throw DomainError("switch topology needs a server and at least one user");
  }
  if (server_index >= link_lengths.size()) {
    throw DomainError("server index out of range");
  }
  for (double len : link_lengths) {
    if (!(len >= 0.0) || !std::isfinite(len)) {
      throw DomainError("link lengths must be finite and non-negative");
    }
  }
  if (buffer_size < 1) throw DomainError("buffer size must be >= 1");
  if (!(attempt_period > 0.0)) throw DomainError("attempt period must be positive");
  if (!(attenuation >= 0.0)) throw DomainError("attenuation must be non-negative");
  if (!(sim_time > 0.0)) throw DomainError("simulated time must be positive");
}

std::vector<std::size_t> Topology::users() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < link_lengths.size(); ++i) {
    if (i != server_index) out.push_back(i);
  }
  return out;
}

double transmissivity(double length_km, double attenuation) {
  return std::pow(10.0, -(attenuation * length_km) / 10.0);
}

double gen_success_prob(double alpha, double eta) { return 2.0 * eta * alpha; }

double link_werner(double alpha) { return 1.0 - 4.0 / 3.0 * alpha; }

double werner_to_fidelity(double w) { return (3.0 * w + 1.0) / 4.0; }

double fidelity_to_werner(double f) { return (4.0 * f - 1.0) / 3.0; }

double swap_fidelity(const StoredLink &server_link, const StoredLink &user_link) {
  return werner_to_fidelity(server_link.werner * user_link.werner);
}

double hashing_yield(double fidelity) {
  const double f = std::clamp(fidelity, 0.0, 1.0);
  auto xlog2 = [](double x, double arg) {
    return x > 0.0 ? x * std::log2(arg) : 0.0;
  };
  const double inner = 1.0 + xlog2(f, f) + xlog2(1.0 - f, (1.0 - f) / 3.0);
  return std::max(inner, 0.0);
}

double user_utility(const UserStats &stats, const UtilitySettings &settings) {
  const double product = stats.rate * hashing_yield(stats.mean_fidelity);
  if (!(product > 0.0)) {
    return settings.floor;
  }
  return settings.natural_log ? std::log(product) : std::log10(product);
}

Switch::Switch(const Topology &topology)
    : server_(topology.server_index), capacity_(topology.buffer_size),
      buffers_(topology.node_count()) {}

std::optional<SwapEvent> Switch::deliver(std::size_t node, const StoredLink &link) {
  auto &buf = buffers_.at(node);
  if (!buf.empty() && !(link.timestamp > buf.back().timestamp)) {
    throw DomainError("links must arrive in strictly increasing time order");
  }
  if (buf.size() >= capacity_) {
    buf.pop_front();
    ++evictions_;
  }
  StoredLink stored = link;
  stored.owner = node;
  buf.push_back(stored);
  return try_swap(link.timestamp);
}

std::optional<SwapEvent> Switch::try_swap(double now) {
  auto &server = buffers_[server_];
  if (server.empty()) {
    return std::nullopt;
  }
  std::size_t chosen = buffers_.size();
  double oldest = std::numeric_limits<double>::infinity();
  for (std::size_t u = 0; u < buffers_.size(); ++u) {
    if (u == server_ || buffers_[u].empty()) continue;
    if (buffers_[u].front().timestamp < oldest) {
      oldest = buffers_[u].front().timestamp;
      chosen = u;
    }
  }
  if (chosen == buffers_.size()) {
    return std::nullopt;
  }
  const double f = swap_fidelity(server.front(), buffers_[chosen].front());
  server.pop_front();
  buffers_[chosen].pop_front();
  return SwapEvent{chosen, now, f};
}

std::vector<UserStats> simulate(const Topology &topology,
                                const std::vector<double> &alpha, Rng &rng) {
  topology.validate();
  const std::size_t nodes = topology.node_count();
  if (alpha.size() != nodes) {
    throw DimensionError("expected one bright-state population per link");
  }
  for (double a : alpha) {
    if (!(a >= 0.0 && a <= 0.5)) {
      throw DomainError("bright-state population must lie in [0, 0.5]");
    }
  }

  constexpr double never = std::numeric_limits<double>::infinity();
  std::vector<double> rate(nodes);
  std::vector<double> werner(nodes);
  std::vector<double> next(nodes, never);
  auto draw_gap = [&](std::size_t i) {
    std::exponential_distribution<double> gap(rate[i]);
    return gap(rng);
  };
  for (std::size_t i = 0; i < nodes; ++i) {
    const double p = gen_success_prob(
        alpha[i], transmissivity(topology.link_lengths[i], topology.attenuation));
    rate[i] = std::min(p, 1.0) / topology.attempt_period;
    werner[i] = link_werner(alpha[i]);
    if (rate[i] > 0.0) next[i] = draw_gap(i);
  }

  Switch sw(topology);
  std::vector<double> fidelity_sum(nodes, 0.0);
  std::vector<std::size_t> swaps(nodes, 0);
  for (;;) {
    // Earliest pending generation; ties resolve to the lowest link index.
    std::size_t link = 0;
    for (std::size_t i = 1; i < nodes; ++i) {
      if (next[i] < next[link]) link = i;
    }
    const double now = next[link];
    if (!(now <= topology.sim_time)) {
      break;
    }
    if (auto ev = sw.deliver(link, StoredLink{werner[link], now, link})) {
      fidelity_sum[ev->user] += ev->fidelity;
      ++swaps[ev->user];
    }
    double following = now + draw_gap(link);
    if (!(following > now)) following = std::nextafter(now, never);
    next[link] = following;
  }

  std::vector<UserStats> out;
  for (auto u : topology.users()) {
    UserStats s;
    s.swap_count = swaps[u];
    s.rate = static_cast<double>(swaps[u]) / topology.sim_time;
    s.mean_fidelity =
        swaps[u] > 0 ? fidelity_sum[u] / static_cast<double>(swaps[u]) : 0.0;
    out.push_back(s);
  }
  return out;
}

QesObjective::QesObjective(Topology topology, UtilitySettings utility)
    : topology_(std::move(topology)), utility_(utility) {
  topology_.validate();
}

std::size_t QesObjective::objective_count() const {
  return topology_.user_count();
}

std::vector<std::string> QesObjective::objective_names() const {
  std::vector<std::string> names;
  for (auto u : topology_.users()) names.push_back("U_user" + std::to_string(u));
  return names;
}

std::vector<double> QesObjective::run(const ConfigPoint &config,
                                      std::uint64_t seed) const {
  if (config.values.size() != topology_.node_count()) {
    throw DimensionError("QES configuration needs one value per link");
  }
  std::vector<double> alpha;
  for (const auto &v : config.values) alpha.push_back(std::get<double>(v));
  Rng rng(seed);
  const auto stats = simulate(topology_, alpha, rng);
  std::vector<double> utilities;
  for (const auto &s : stats) utilities.push_back(user_utility(s, utility_));
  return utilities;
}

} // namespace qnopt::qes
