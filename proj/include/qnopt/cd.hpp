#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qnopt/objective.hpp"
#include "qnopt/random.hpp"

namespace qnopt::cd {

class Graph {
public:
  Graph(std::size_t nodes, std::vector<std::pair<std::size_t, std::size_t>> edges);

  [[nodiscard]] std::size_t node_count() const noexcept { return adjacency_.size(); }
  [[nodiscard]] const std::vector<std::pair<std::size_t, std::size_t>> &edges() const noexcept {
    return edges_;
  }
  [[nodiscard]] const std::vector<std::size_t> &neighbors(std::size_t v) const {
    return adjacency_.at(v);
  }
  [[nodiscard]] std::size_t degree(std::size_t v) const { return adjacency_.at(v).size(); }
  [[nodiscard]] bool connected() const;
  [[nodiscard]] std::vector<std::size_t> leaves() const;

private:
  std::vector<std::pair<std::size_t, std::size_t>> edges_; // (low, high)
  std::vector<std::vector<std::size_t>> adjacency_;
};

// 1 - 0 - 2: node 0 is the centre.
Graph path3();

// Uniform random labelled tree (Prufer code) conditioned on its leaf count by
// rejection; deterministic in `seed`.
Graph random_tree(std::size_t nodes, std::size_t leaves, std::uint64_t seed);

inline constexpr std::uint64_t kTree20Seed = 20;
inline constexpr std::uint64_t kTree100Seed = 100;
// Seven leaf users out of 20 nodes, and 39 out of 100.
Graph tree20();
Graph tree100();

// Edge list text: one "u v" pair per line; '#' starts a comment. Node count
// is one more than the largest index.
Graph read_edge_list(std::istream &in);
void write_edge_list(std::ostream &out, const Graph &graph);

struct Network {
  Graph graph = path3();
  std::vector<std::size_t> users{0, 1, 2};
  std::size_t r = 5;          // qubits per unit of node degree
  std::size_t max_hops = 10;  // M
  std::size_t cutoff = 28;    // t_cut, in slots
  double p_gen = 0.9;
  double p_cons = 0.225;
  std::size_t sim_slots = 1000;

  void validate() const;
  [[nodiscard]] std::size_t capacity(std::size_t node) const {
    return r * graph.degree(node);
  }
};

struct Link {
  std::size_t a = 0; // a < b
  std::size_t b = 0;
  std::size_t birth = 0;
  std::size_t hops = 1;
};

struct State {
  std::vector<Link> links;
  std::vector<std::size_t> occupied; // qubits in use per node
  std::size_t slot = 0;              // index of the next slot to run
};

State initial_state(const Network &network);

// One slot: cutoff, generation, swaps, consumption.
void step(State &state, const Network &network, std::span<const double> q_swap,
          Rng &rng);

// Distinct partners of every node.
std::vector<std::size_t> virtual_neighbors(const State &state, std::size_t nodes);

// Time-averaged virtual-neighbour count of each user over the slots after
// the cutoff warm-up.
std::vector<double> simulate(const Network &network,
                             std::span<const double> q_swap, Rng &rng);

// Optimizer adapter. Parameter i sets the swap probability of every node in
// groups[i]; by default each node has its own parameter.
class CdObjective final : public Objective {
public:
  explicit CdObjective(Network network,
                       std::vector<std::vector<std::size_t>> groups = {});

  [[nodiscard]] std::size_t objective_count() const override {
    return network_.users.size();
  }
  [[nodiscard]] std::vector<double> run(const ConfigPoint &config,
                                        std::uint64_t seed) const override;
  [[nodiscard]] std::vector<std::string> objective_names() const override;
  [[nodiscard]] double simulated_duration() const override {
    return static_cast<double>(network_.sim_slots);
  }
  [[nodiscard]] const std::vector<std::vector<std::size_t>> &groups() const noexcept {
    return groups_;
  }
  [[nodiscard]] const Network &network() const noexcept { return network_; }

  [[nodiscard]] std::vector<double> swap_vector(const ConfigPoint &config) const;

private:
  Network network_;
  std::vector<std::vector<std::size_t>> groups_;
};

} // namespace qnopt::cd
