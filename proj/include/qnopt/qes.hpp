#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "qnopt/objective.hpp"
#include "qnopt/random.hpp"

namespace qnopt::qes {

// Star around the switch: one link per user plus one link to the server.
struct Topology {
  std::vector<double> link_lengths; // km, indexed by node
  std::size_t server_index = 0;
  std::size_t buffer_size = 20;
  double attempt_period = 1e-3; // seconds
  double attenuation = 0.2;     // dB/km
  double sim_time = 5.0;        // seconds

  void validate() const;
  [[nodiscard]] std::size_t node_count() const noexcept { return link_lengths.size(); }
  [[nodiscard]] std::size_t user_count() const noexcept { return link_lengths.size() - 1; }
  // Node indices of the users, in increasing order.
  [[nodiscard]] std::vector<std::size_t> users() const;
};

struct StoredLink {
  double werner = 1.0;
  double timestamp = 0.0;
  std::size_t owner = 0;
};

struct UserStats {
  double rate = 0.0;          // end-to-end links per second
  double mean_fidelity = 0.0; // 0 when no link was delivered
  std::size_t swap_count = 0;
};

double transmissivity(double length_km, double attenuation = 0.2);
double gen_success_prob(double alpha, double eta);
// Werner parameter of a freshly generated link: 1 - 4/3 alpha.
double link_werner(double alpha);
double werner_to_fidelity(double w);
double fidelity_to_werner(double f);
// End-to-end fidelity after swapping two Werner links.
double swap_fidelity(const StoredLink &server_link, const StoredLink &user_link);

// Hashing-protocol yield max(1 + F log2 F + (1-F) log2((1-F)/3), 0).
double hashing_yield(double fidelity);

struct UtilitySettings {
  double floor = -20.0;
  bool natural_log = true; // false: log10
};

// log(R * D_H(F)), or the floor when the product is not positive.
double user_utility(const UserStats &stats, const UtilitySettings &settings = {});

struct SwapEvent {
  std::size_t user = 0;
  double time = 0.0;
  double fidelity = 0.0;
};

// Memory buffers and first-come-first-served swapping at the switch.
class Switch {
public:
  explicit Switch(const Topology &topology);

  // Stores a fresh link on `node`'s buffer (evicting the oldest when full),
  // then performs at most one swap.
  std::optional<SwapEvent> deliver(std::size_t node, const StoredLink &link);

  [[nodiscard]] const std::deque<StoredLink> &buffer(std::size_t node) const {
    return buffers_.at(node);
  }
  [[nodiscard]] std::size_t evictions() const noexcept { return evictions_; }

private:
  std::optional<SwapEvent> try_swap(double now);

  std::size_t server_;
  std::size_t capacity_;
  std::vector<std::deque<StoredLink>> buffers_;
  std::size_t evictions_ = 0;
};

// alpha per node (users and server), each in [0, 0.5]; alpha = 0 disables
// generation on that link. Returns stats for topology.users() in order.
std::vector<UserStats> simulate(const Topology &topology,
                                const std::vector<double> &alpha, Rng &rng);

// Optimizer adapter: one continuous parameter per link (the bright-state
// population), one utility per user.
class QesObjective final : public Objective {
public:
  QesObjective(Topology topology, UtilitySettings utility = {});

  [[nodiscard]] std::size_t objective_count() const override;
  [[nodiscard]] std::vector<double> run(const ConfigPoint &config,
                                        std::uint64_t seed) const override;
  [[nodiscard]] std::vector<std::string> objective_names() const override;
  [[nodiscard]] double simulated_duration() const override {
    return topology_.sim_time;
  }
  [[nodiscard]] const Topology &topology() const noexcept { return topology_; }

private:
  Topology topology_;
  UtilitySettings utility_;
};

} // namespace qnopt::qes
