#include "qnopt/cd.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>

#include "qnopt/errors.hpp"

namespace qnopt::cd {

Graph::Graph(std::size_t nodes,
             std::vector<std::pair<std::size_t, std::size_t>> edges)
    : adjacency_(nodes) {
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (auto [u, v] : edges) {
    if (u >= nodes || v >= nodes) {
      throw DomainError("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                        ") references a node outside [0, " +
                        std::to_string(nodes) + ")");
    }
    if (u == v) throw DomainError("self-loop on node " + std::to_string(u));
    const auto key = std::minmax(u, v);
    if (!seen.insert(key).second) {
      throw DomainError("duplicate edge (" + std::to_string(key.first) + ", " +
                        std::to_string(key.second) + ")");
    }
    edges_.push_back(key);
    adjacency_[u].push_back(v);
    adjacency_[v].push_back(u);
  }
}

bool Graph::connected() const {
  if (adjacency_.empty()) return false;
  std::vector<bool> seen(adjacency_.size(), false);
  std::queue<std::size_t> todo;
  todo.push(0);
  seen[0] = true;
  std::size_t count = 1;
  while (!todo.empty()) {
    const auto v = todo.front();
    todo.pop();
    for (auto w : adjacency_[v]) {
      if (!seen[w]) {
        seen[w] = true;
        ++count;
        todo.push(w);
      }
    }
  }
  return count == adjacency_.size();
}

std::vector<std::size_t> Graph::leaves() const {
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < adjacency_.size(); ++v) {
    if (adjacency_[v].size() == 1) out.push_back(v);
  }
  return out;
}

Graph path3() { return Graph(3, {{0, 1}, {0, 2}}); }

Graph random_tree(std::size_t nodes, std::size_t leaves, std::uint64_t seed) {
  if (nodes < 3) throw DomainError("random trees need at least 3 nodes");
  if (leaves < 2 || leaves > nodes - 1) {
    throw DomainError("a tree on " + std::to_string(nodes) +
                      " nodes has between 2 and " + std::to_string(nodes - 1) +
                      " leaves");
  }
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, nodes - 1);
  std::vector<std::size_t> code(nodes - 2);
  for (std::size_t attempt = 0;; ++attempt) {
    if (attempt > 1'000'000) {
      throw DomainError("could not sample a tree with the requested leaf count");
    }
    for (auto &c : code) c = pick(rng);
    std::vector<bool> present(nodes, false);
    for (auto c : code) present[c] = true;
    const auto inner = static_cast<std::size_t>(
        std::count(present.begin(), present.end(), true));
    if (nodes - inner == leaves) break;
  }

  std::vector<std::size_t> degree(nodes, 1);
  for (auto c : code) ++degree[c];
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t v = 0; v < nodes; ++v) {
    if (degree[v] == 1) ready.push(v);
  }
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (auto c : code) {
    const auto leaf = ready.top();
    ready.pop();
    edges.emplace_back(leaf, c);
    if (--degree[c] == 1) ready.push(c);
  }
  const auto u = ready.top();
  ready.pop();
  edges.emplace_back(u, ready.top());
  return Graph(nodes, std::move(edges));
}

Graph tree20() { return random_tree(20, 7, kTree20Seed); }
Graph tree100() { return random_tree(100, 39, kTree100Seed); }

Graph read_edge_list(std::istream &in) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::size_t nodes = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    long long u = 0;
    long long v = 0;
    if (!(fields >> u)) continue; // blank
    std::string rest;
    if (!(fields >> v) || (fields >> rest)) {
      throw ParseError("expected two node indices", line_no);
    }
    if (u < 0 || v < 0) throw ParseError("node indices must be non-negative", line_no);
    edges.emplace_back(static_cast<std::size_t>(u), static_cast<std::size_t>(v));
    nodes = std::max({nodes, static_cast<std::size_t>(u) + 1,
                      static_cast<std::size_t>(v) + 1});
  }
  if (edges.empty()) throw ParseError("edge list is empty", 0);
  try {
    return Graph(nodes, std::move(edges));
  } catch (const DomainError &e) {
    throw ParseError(e.what(), 0);
  }
}

void write_edge_list(std::ostream &out, const Graph &graph) {
  for (auto [u, v] : graph.edges()) out << u << ' ' << v << '\n';
}

void Network::validate() const {
  if (graph.node_count() < 2 || !graph.connected()) {
    throw DomainError("network graph must be connected with at least 2 nodes");
  }
  if (users.empty()) throw DomainError("network needs at least one user");
  for (auto u : users) {
    if (u >= graph.node_count()) throw DomainError("user index out of range");
  }
  if (r < 1) throw DomainError("qubits-per-degree multiplier r must be >= 1");
  if (max_hops < 1) throw DomainError("maximum hop count M must be >= 1");
  if (!(p_gen >= 0.0 && p_gen <= 1.0) || !(p_cons >= 0.0 && p_cons <= 1.0)) {
    throw DomainError("generation/consumption probabilities must lie in [0, 1]");
  }
  if (sim_slots < 1) throw DomainError("simulation needs at least one slot");
}

State initial_state(const Network &network) {
  State s;
  s.occupied.assign(network.graph.node_count(), 0);
  return s;
}

namespace {

bool bernoulli(Rng &rng, double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return uniform01(rng) < p;
}

std::size_t other_end(const Link &link, std::size_t node) {
  return link.a == node ? link.b : link.a;
}

Link make_link(std::size_t u, std::size_t v, std::size_t birth, std::size_t hops) {
  return Link{std::min(u, v), std::max(u, v), birth, hops};
}

} // namespace

void step(State &state, const Network &network, std::span<const double> q_swap,
          Rng &rng) {
  const std::size_t nodes = network.graph.node_count();
  if (q_swap.size() != nodes) {
    throw DimensionError("expected one swap probability per node");
  }
  const std::size_t now = state.slot;
  auto &links = state.links;
  auto &occ = state.occupied;

  // (1) cutoff
  std::erase_if(links, [&](const Link &l) {
    if (now - l.birth > network.cutoff) {
      --occ[l.a];
      --occ[l.b];
      return true;
    }
    return false;
  });

  // (2) generation, physical edges in random order
  std::vector<std::size_t> order(network.graph.edges().size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  for (auto e : order) {
    const auto [u, v] = network.graph.edges()[e];
    if (occ[u] < network.capacity(u) && occ[v] < network.capacity(v) &&
        bernoulli(rng, network.p_gen)) {
      links.push_back(make_link(u, v, now, 1));
      ++occ[u];
      ++occ[v];
    }
  }

  // (3) swaps, one attempt per node in random order
  std::vector<bool> alive(links.size(), true);
  std::vector<std::vector<std::size_t>> incident(nodes);
  for (std::size_t i = 0; i < links.size(); ++i) {
    incident[links[i].a].push_back(i);
    incident[links[i].b].push_back(i);
  }
  std::vector<std::size_t> node_order(nodes);
  std::iota(node_order.begin(), node_order.end(), 0);
  std::shuffle(node_order.begin(), node_order.end(), rng);
  for (auto i : node_order) {
    auto &mine = incident[i];
    std::erase_if(mine, [&](std::size_t id) { return !alive[id]; });
    if (mine.size() < 2) continue;
    std::uniform_int_distribution<std::size_t> first(0, mine.size() - 1);
    std::uniform_int_distribution<std::size_t> second(0, mine.size() - 2);
    const std::size_t x = first(rng);
    std::size_t y = second(rng);
    if (y >= x) ++y;
    if (!bernoulli(rng, q_swap[i])) continue;
    const Link &lx = links[mine[x]];
    const Link &ly = links[mine[y]];
    const std::size_t j = other_end(lx, i);
    const std::size_t k = other_end(ly, i);
    const std::size_t hops = lx.hops + ly.hops;
    if (j == k || hops > network.max_hops) continue;
    // j and k each release one qubit and take one for the new link.
    if (occ[j] > network.capacity(j) || occ[k] > network.capacity(k)) continue;
    const Link fresh = make_link(j, k, std::min(lx.birth, ly.birth), hops);
    const std::size_t id_x = mine[x];
    const std::size_t id_y = mine[y];
    alive[id_x] = false;
    alive[id_y] = false;
    occ[i] -= 2;
    links.push_back(fresh);
    alive.push_back(true);
    incident[j].push_back(links.size() - 1);
    incident[k].push_back(links.size() - 1);
  }
  {
    std::size_t w = 0;
    for (std::size_t r = 0; r < links.size(); ++r) {
      if (alive[r]) links[w++] = links[r];
    }
    links.resize(w);
  }

  // (4) consumption: each pair sharing a link uses its oldest one
  std::vector<std::size_t> idx(links.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t p, std::size_t q) {
    const auto &a = links[p];
    const auto &b = links[q];
    if (a.a != b.a) return a.a < b.a;
    if (a.b != b.b) return a.b < b.b;
    if (a.birth != b.birth) return a.birth < b.birth;
    return p < q;
  });
  std::vector<bool> consumed(links.size(), false);
  for (std::size_t g = 0; g < idx.size();) {
    std::size_t h = g + 1;
    while (h < idx.size() && links[idx[h]].a == links[idx[g]].a &&
           links[idx[h]].b == links[idx[g]].b) {
      ++h;
    }
    if (bernoulli(rng, network.p_cons)) {
      consumed[idx[g]] = true;
      --occ[links[idx[g]].a];
      --occ[links[idx[g]].b];
    }
    g = h;
  }
  {
    std::size_t w = 0;
    for (std::size_t r = 0; r < links.size(); ++r) {
      if (!consumed[r]) links[w++] = links[r];
    }
    links.resize(w);
  }

  state.slot = now + 1;
}

std::vector<std::size_t> virtual_neighbors(const State &state, std::size_t nodes) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(state.links.size());
  for (const auto &l : state.links) pairs.emplace_back(l.a, l.b);
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  std::vector<std::size_t> count(nodes, 0);
  for (auto [a, b] : pairs) {
    ++count[a];
    ++count[b];
  }
  return count;
}

std::vector<double> simulate(const Network &network,
                             std::span<const double> q_swap, Rng &rng) {
  network.validate();
  for (double q : q_swap) {
    if (!(q >= 0.0 && q <= 1.0)) {
      throw DomainError("swap probabilities must lie in [0, 1]");
    }
  }
  State state = initial_state(network);
  const std::size_t warmup = std::min(network.cutoff, network.sim_slots - 1);
  std::vector<double> totals(network.users.size(), 0.0);
  std::size_t recorded = 0;
  for (std::size_t s = 0; s < network.sim_slots; ++s) {
    step(state, network, q_swap, rng);
    if (s < warmup) continue;
    const auto vn = virtual_neighbors(state, network.graph.node_count());
    for (std::size_t u = 0; u < network.users.size(); ++u) {
      totals[u] += static_cast<double>(vn[network.users[u]]);
    }
    ++recorded;
  }
  for (auto &t : totals) t /= static_cast<double>(recorded);
  return totals;
}

CdObjective::CdObjective(Network network,
                         std::vector<std::vector<std::size_t>> groups)
    : network_(std::move(network)), groups_(std::move(groups)) {
  network_.validate();
  const std::size_t nodes = network_.graph.node_count();
  if (groups_.empty()) {
    for (std::size_t v = 0; v < nodes; ++v) groups_.push_back({v});
  }
  std::vector<int> covered(nodes, 0);
  for (const auto &g : groups_) {
    for (auto v : g) {
      if (v >= nodes) throw DomainError("swap group references an unknown node");
      ++covered[v];
    }
  }
  for (std::size_t v = 0; v < nodes; ++v) {
    if (covered[v] != 1) {
      throw DomainError("every node must belong to exactly one swap group");
    }
  }
}

std::vector<double> CdObjective::swap_vector(const ConfigPoint &config) const {
  if (config.values.size() != groups_.size()) {
    throw DimensionError("expected one swap probability per group");
  }
  std::vector<double> q(network_.graph.node_count(), 0.0);
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    for (auto v : groups_[g]) q[v] = std::get<double>(config.values[g]);
  }
  return q;
}

std::vector<double> CdObjective::run(const ConfigPoint &config,
                                     std::uint64_t seed) const {
  Rng rng(seed);
  return simulate(network_, swap_vector(config), rng);
}

std::vector<std::string> CdObjective::objective_names() const {
  std::vector<std::string> out;
  for (auto u : network_.users) out.push_back("VN_node" + std::to_string(u));
  return out;
}

} // namespace qnopt::cd
