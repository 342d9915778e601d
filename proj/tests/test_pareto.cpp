#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "qnopt/errors.hpp"
#include "qnopt/pareto.hpp"

using namespace qnopt;
using namespace qnopt::pareto;

namespace {

std::vector<std::size_t> pairwise_oracle(const std::vector<std::vector<double>> &u) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < u.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < u.size() && !dominated; ++j) {
      bool ge = true;
      bool gt = false;
      for (std::size_t k = 0; k < u[i].size(); ++k) {
        if (u[j][k] < u[i][k]) ge = false;
        if (u[j][k] > u[i][k]) gt = true;
      }
      dominated = ge && gt;
    }
    if (!dominated) out.push_back(i);
  }
  return out;
}

std::vector<std::vector<double>> random_instance(Rng &rng, std::size_t n, std::size_t m,
                                                 bool ties) {
  std::vector<std::vector<double>> u(n, std::vector<double>(m));
  for (auto &row : u) {
    for (auto &x : row) x = ties ? std::floor(uniform01(rng) * 4.0) : uniform01(rng);
  }
  return u;
}

double normal_cdf(double x, double mu, double sd) {
  return 0.5 * std::erfc(-(x - mu) / (sd * std::sqrt(2.0)));
}

} // namespace

TEST_CASE("dominating set examples") {
  const std::vector<std::vector<double>> u{{1, 1}, {2, 0}, {0, 2}, {0.5, 0.5}};
  CHECK(dominating_set(u) == std::vector<std::size_t>{0, 1, 2});
  CHECK(dominating_set({{3.0, 4.0}}) == std::vector<std::size_t>{0});
  CHECK(dominating_set({{1.0, 2.0}, {1.0, 2.0}}) == std::vector<std::size_t>{0, 1});
  CHECK(dominating_set({}).empty());
  CHECK_THROWS_AS((void)dominating_set({{1.0, 2.0}, {1.0}}), DimensionError);
}

TEST_CASE("dominating set agrees with the pairwise oracle") {
  Rng rng(31);
  int instance = 0;
  for (std::size_t m : {2, 3, 5}) {
    for (bool ties : {false, true}) {
      for (int rep = 0; rep < 34; ++rep, ++instance) {
        const std::size_t n = 1 + rng() % 60;
        const auto u = random_instance(rng, n, m, ties);
        const auto expect = pairwise_oracle(u);
        CHECK(dominating_set(u) == expect);
        CHECK(dominating_set_bruteforce(u) == expect);
      }
    }
  }
  CHECK(instance >= 200);
}

TEST_CASE("dominating set ignores monotone transforms") {
  Rng rng(8);
  for (int rep = 0; rep < 50; ++rep) {
    auto u = random_instance(rng, 40, 3, rep % 2 == 0);
    const auto before = dominating_set(u);
    for (auto &row : u) {
      row[0] = std::exp(3.0 * row[0]);
      row[1] = row[1] * row[1] * row[1] - 7.0;
      row[2] = std::atan(row[2]);
    }
    CHECK(dominating_set(u) == before);
  }
}

TEST_CASE("ks distance examples") {
  const std::vector<double> pad{0.5, 0.5};
  CHECK(ks_distance(pad, UniformReference{0.0, 1.0}) == doctest::Approx(0.5));
  for (std::size_t n : {2, 10, 101}) {
    std::vector<double> q;
    for (std::size_t i = 1; i <= n; ++i) q.push_back((i - 0.5) / n);
    CHECK(ks_distance(q, UniformReference{0.0, 1.0}) == doctest::Approx(0.5 / n).epsilon(1e-12));
  }
  Rng rng(4);
  std::vector<double> draws(10000);
  for (auto &x : draws) x = uniform01(rng);
  CHECK(ks_distance(draws, UniformReference{0.0, 1.0}) < 0.03);
}

TEST_CASE("ks distance against a fitted normal") {
  const std::vector<double> v{0.1, 0.4, 0.35, 0.8, 0.55};
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= 5.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / 4.0);
  auto sorted = v;
  std::sort(sorted.begin(), sorted.end());
  double d = 0.0;
  for (std::size_t i = 0; i < 5; ++i) {
    const double f = normal_cdf(sorted[i], mean, sd);
    d = std::max({d, (i + 1) / 5.0 - f, f - i / 5.0});
  }
  CHECK(ks_distance(v, NormalReference{}) == doctest::Approx(d).epsilon(1e-12));
  const double du = ks_distance(v, UniformReference{0.0, 1.0});
  CHECK(du >= 0.0);
  CHECK(du <= 1.0);
}

TEST_CASE("ks distance errors") {
  const std::vector<double> one{0.3};
  CHECK_THROWS_AS((void)ks_distance(one, UniformReference{}), DegenerateSampleError);
  const std::vector<double> flat{0.3, 0.3, 0.3};
  CHECK_THROWS_AS((void)ks_distance(flat, NormalReference{}), DegenerateSampleError);
  CHECK_THROWS_AS((void)ks_distance(flat, UniformReference{1.0, 1.0}), DomainError);
}

TEST_CASE("percentiles and spread") {
  std::vector<double> v;
  for (int i = 10; i >= 1; --i) v.push_back(i / 10.0);
  CHECK(percentile(v, 50.0) == doctest::Approx(0.55));
  CHECK(percentile(v, 0.0) == doctest::Approx(0.1));
  CHECK(percentile(v, 100.0) == doctest::Approx(1.0));
  CHECK(percentile(v, 2.5) == doctest::Approx(0.1 + 0.025 * 9 * 0.1));
  CHECK(percentile(v, 97.5) == doctest::Approx(0.9 + 0.775 * 0.1));
  const std::vector<double> single{4.0};
  CHECK(percentile(single, 30.0) == 4.0);
  CHECK(stddev(std::vector<double>{2, 4, 4, 4, 5, 5, 7, 9}) == doctest::Approx(2.0));
  CHECK_THROWS_AS((void)percentile(v, 101.0), DomainError);
  CHECK_THROWS_AS((void)percentile(std::vector<double>{}, 50.0), InsufficientDataError);
}

TEST_CASE("summaries over the dominating set") {
  const SearchSpace space({ParamSpec::continuous("x", 0, 1),
                           ParamSpec::categorical("mode", {"a", "b", "c"})});
  std::vector<std::vector<double>> u;
  std::vector<ConfigPoint> c;
  for (int i = 1; i <= 10; ++i) {
    // Points on a trade-off curve are all non-dominated.
    u.push_back({static_cast<double>(i), static_cast<double>(10 - i)});
    c.push_back(ConfigPoint{{i / 10.0, std::string(i % 2 ? "a" : "c")}});
  }
  u.push_back({0.0, 0.0});
  c.push_back(ConfigPoint{{0.0, std::string("b")}});
  const auto r = summarize(u, c, space);
  CHECK(r.dominating_indices.size() == 10);
  CHECK(r.record_count == 11);
  CHECK(r.dominating_fraction() == doctest::Approx(10.0 / 11.0));
  REQUIRE(r.params.size() == 2);
  CHECK(r.params[0].name == "x");
  CHECK(r.params[0].median == doctest::Approx(0.55));
  REQUIRE(r.params[0].ks_uniform);
  REQUIRE(r.params[0].ks_normal);
  CHECK(r.params[1].median == doctest::Approx(1.0));
  CHECK(r.params[1].std == doctest::Approx(1.0));
}

TEST_CASE("identical dominating configs") {
  const SearchSpace space({ParamSpec::continuous("x", 0, 1)});
  const std::vector<std::vector<double>> u{{1.0}, {1.0}, {1.0}};
  const std::vector<ConfigPoint> c(3, ConfigPoint{{0.4}});
  const auto r = summarize(u, c, space);
  CHECK(r.params[0].std == 0.0);
  CHECK(r.params[0].p2_5 == r.params[0].p97_5);
  CHECK(r.params[0].ks_uniform);
  CHECK(!r.params[0].ks_normal);
  CHECK(!r.params[0].closer_to_uniform());
}

TEST_CASE("summaries reject bad input") {
  const SearchSpace space({ParamSpec::continuous("x", 0, 1)});
  CHECK_THROWS_AS((void)summarize({}, {}, space), EmptyReportError);
  CHECK_THROWS_AS((void)summarize({{1.0}}, {}, space), DimensionError);
}
