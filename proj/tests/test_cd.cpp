#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "qnopt/cd.hpp"
#include "qnopt/errors.hpp"

using namespace qnopt;
using namespace qnopt::cd;

namespace {

Network single_edge() {
  Network n;
  n.graph = Graph(2, {{0, 1}});
  n.users = {0, 1};
  n.p_gen = 1.0;
  n.p_cons = 0.0;
  return n;
}

void check_invariants(const State &s, const Network &n) {
  const std::size_t nodes = n.graph.node_count();
  std::vector<std::size_t> incident(nodes, 0);
  for (const auto &l : s.links) {
    CHECK(l.a < l.b);
    CHECK(l.b < nodes);
    CHECK(l.hops >= 1);
    CHECK(l.hops <= n.max_hops);
    CHECK(l.birth < s.slot);
    CHECK(s.slot - 1 - l.birth <= n.cutoff);
    ++incident[l.a];
    ++incident[l.b];
  }
  const auto vn = virtual_neighbors(s, nodes);
  for (std::size_t v = 0; v < nodes; ++v) {
    CHECK(incident[v] == s.occupied[v]);
    CHECK(incident[v] <= n.capacity(v));
    CHECK(vn[v] <= std::min(nodes - 1, n.capacity(v)));
  }
}

std::size_t count_leaves(const Graph &g) { return g.leaves().size(); }

} // namespace

TEST_CASE("graph validation") {
  CHECK_THROWS_AS(Graph(3, {{0, 0}}), DomainError);
  CHECK_THROWS_AS(Graph(3, {{0, 1}, {1, 0}}), DomainError);
  CHECK_THROWS_AS(Graph(2, {{0, 2}}), DomainError);
  const Graph g(4, {{2, 1}, {1, 0}});
  CHECK(g.edges().front() == std::pair<std::size_t, std::size_t>{1, 2});
  CHECK(!g.connected());
  CHECK(path3().connected());
  CHECK(path3().degree(0) == 2);
  CHECK(path3().leaves() == std::vector<std::size_t>{1, 2});
}

TEST_CASE("single edge fills both memories") {
  const auto n = single_edge();
  const std::vector<double> q(2, 0.0);
  State s = initial_state(n);
  Rng rng(1);
  for (std::size_t slot = 0; slot < 100; ++slot) {
    step(s, n, q, rng);
    CHECK(s.slot == slot + 1);
    CHECK(s.links.size() == std::min<std::size_t>(slot + 1, 5));
    CHECK(s.occupied[0] == s.links.size());
    CHECK(s.occupied[1] == s.links.size());
    check_invariants(s, n);
  }
}

TEST_CASE("certain swaps at the centre link the leaves") {
  Network n;
  n.p_gen = 1.0;
  n.p_cons = 0.0;
  const std::vector<double> q{1.0, 0.0, 0.0};
  State s = initial_state(n);
  Rng rng(4);
  for (std::size_t slot = 0; slot < 200; ++slot) {
    step(s, n, q, rng);
    const bool leaf_link = std::any_of(s.links.begin(), s.links.end(), [](const Link &l) {
      return l.a == 1 && l.b == 2;
    });
    if (slot >= 1) CHECK(leaf_link);
    check_invariants(s, n);
  }
  const auto vn = virtual_neighbors(s, 3);
  CHECK(vn[1] >= 1);
  CHECK(vn[2] >= 1);
}

TEST_CASE("zero cutoff keeps only fresh links") {
  Network n;
  n.cutoff = 0;
  n.p_cons = 0.0;
  n.p_gen = 1.0;
  const std::vector<double> q{0.5, 0.5, 0.5};
  State s = initial_state(n);
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    step(s, n, q, rng);
    for (const auto &l : s.links) CHECK(l.birth == s.slot - 1);
  }
}

TEST_CASE("no generation means no neighbours") {
  Network n;
  n.p_gen = 0.0;
  n.sim_slots = 200;
  Rng rng(3);
  const std::vector<double> q{0.5, 0.5, 0.5};
  CHECK(simulate(n, q, rng) == std::vector<double>{0.0, 0.0, 0.0});
}

TEST_CASE("randomized invariants on a random tree") {
  Network n;
  n.graph = tree20();
  n.users = n.graph.leaves();
  n.r = 2;
  n.max_hops = 4;
  n.cutoff = 6;
  n.p_gen = 0.8;
  n.p_cons = 0.3;
  Rng rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> q(20);
    for (auto &x : q) x = uniform01(rng);
    State s = initial_state(n);
    for (int i = 0; i < 400; ++i) {
      step(s, n, q, rng);
      check_invariants(s, n);
    }
  }
}

TEST_CASE("without swaps links stay physical") {
  Network n;
  n.graph = tree20();
  n.users = n.graph.leaves();
  const std::vector<double> q(20, 0.0);
  State s = initial_state(n);
  Rng rng(12);
  for (int i = 0; i < 300; ++i) {
    step(s, n, q, rng);
    for (const auto &l : s.links) {
      CHECK(l.hops == 1);
      const auto &nb = n.graph.neighbors(l.a);
      CHECK(std::find(nb.begin(), nb.end(), l.b) != nb.end());
    }
  }
}

TEST_CASE("path aggregate obeys the counting bound") {
  Network n;
  Rng rng(21);
  for (int i = 0; i < 20; ++i) {
    const std::vector<double> q{0.2, uniform01(rng), uniform01(rng)};
    const auto vn = simulate(n, q, rng);
    double total = 0.0;
    for (double v : vn) total += v;
    CHECK(total <= 6.0);
    CHECK(total >= 0.0);
  }
}

TEST_CASE("a reluctant centre yields more virtual neighbours") {
  const Network n;
  Rng rng(5);
  double low = 0.0;
  double high = 0.0;
  for (int i = 0; i < 100; ++i) {
    for (double v : simulate(n, std::vector<double>{0.2, 0.5, 0.5}, rng)) low += v;
    for (double v : simulate(n, std::vector<double>{0.9, 0.5, 0.5}, rng)) high += v;
  }
  CHECK(low > high);
}

TEST_CASE("simulate validates its inputs") {
  Network n;
  Rng rng(0);
  CHECK_THROWS_AS((void)simulate(n, std::vector<double>{0.2, 1.2, 0.1}, rng), DomainError);
  CHECK_THROWS_AS((void)simulate(n, std::vector<double>{0.2, 0.1}, rng), DimensionError);
  n.users = {7};
  CHECK_THROWS_AS((void)simulate(n, std::vector<double>{0.2, 0.1, 0.1}, rng), DomainError);
}

TEST_CASE("random trees") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto g = random_tree(30, 10, seed);
    CHECK(g.node_count() == 30);
    CHECK(g.edges().size() == 29);
    CHECK(g.connected());
    CHECK(count_leaves(g) == 10);
    CHECK(random_tree(30, 10, seed).edges() == g.edges());
  }
  const auto t20 = tree20();
  CHECK(t20.node_count() == 20);
  CHECK(count_leaves(t20) == 7);
  CHECK(t20.connected());
  const auto t100 = tree100();
  CHECK(t100.node_count() == 100);
  CHECK(count_leaves(t100) == 39);
  CHECK(t100.connected());
  CHECK_THROWS_AS((void)random_tree(5, 1, 0), DomainError);
  CHECK_THROWS_AS((void)random_tree(5, 5, 0), DomainError);
}

TEST_CASE("edge list round trip") {
  const auto g = tree20();
  std::stringstream buf;
  write_edge_list(buf, g);
  const auto back = read_edge_list(buf);
  CHECK(back.edges() == g.edges());
  CHECK(back.node_count() == 20);

  std::istringstream commented("# path\n0 1 # first\n\n0 2\n");
  const auto p = read_edge_list(commented);
  CHECK(p.edges() == path3().edges());
}

TEST_CASE("edge list errors carry line numbers") {
  std::istringstream bad("0 1\n1 x\n");
  try {
    (void)read_edge_list(bad);
    FAIL("expected ParseError");
  } catch (const ParseError &e) {
    CHECK(e.line() == 2);
  }
  std::istringstream extra("0 1\n1 2\n2 3 4\n");
  try {
    (void)read_edge_list(extra);
    FAIL("expected ParseError");
  } catch (const ParseError &e) {
    CHECK(e.line() == 3);
  }
  std::istringstream empty("# nothing\n");
  CHECK_THROWS_AS((void)read_edge_list(empty), ParseError);
  std::istringstream loop("0 0\n");
  CHECK_THROWS_AS((void)read_edge_list(loop), ParseError);
}

TEST_CASE("objective adapter and swap groups") {
  Network n;
  n.sim_slots = 100;
  const CdObjective per_node(n);
  CHECK(per_node.groups().size() == 3);
  CHECK(per_node.objective_count() == 3);
  CHECK(per_node.objective_names() == std::vector<std::string>{"VN_node0", "VN_node1", "VN_node2"});
  const CdObjective grouped(n, {{0}, {1, 2}});
  CHECK(grouped.swap_vector(ConfigPoint{{0.2, 0.7}}) == std::vector<double>{0.2, 0.7, 0.7});
  CHECK(grouped.run(ConfigPoint{{0.2, 0.7}}, 3) == grouped.run(ConfigPoint{{0.2, 0.7}}, 3));
  CHECK_THROWS_AS(CdObjective(n, {{0}, {1}}), DomainError);
  CHECK_THROWS_AS(CdObjective(n, {{0, 1}, {1, 2}}), DomainError);
  CHECK_THROWS_AS((void)grouped.swap_vector(ConfigPoint{{0.2}}), DimensionError);
}
