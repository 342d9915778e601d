#include <doctest.h>

#include <cmath>
#include <numeric>

#include "qnopt/acquisition.hpp"
#include "qnopt/errors.hpp"
#include "qnopt/surrogate/model.hpp"

using namespace qnopt;

namespace {

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }
double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Standard deviation of N(mu, sigma) truncated to [lo, hi].
double truncated_std(double mu, double sigma, double lo, double hi) {
  const double a = (lo - mu) / sigma;
  const double b = (hi - mu) / sigma;
  const double z = normal_cdf(b) - normal_cdf(a);
  const double t1 = (b * normal_pdf(b) - a * normal_pdf(a)) / z;
  const double t2 = (normal_pdf(a) - normal_pdf(b)) / z;
  return sigma * std::sqrt(1.0 - t1 - t2 * t2);
}

TrainedModel constant_model(std::size_t dim, double value) {
  Dataset d(dim, 1);
  std::vector<double> x(dim, 0.0);
  d.add(x, std::vector<double>{value});
  x.assign(dim, 1.0);
  d.add(x, std::vector<double>{value});
  Rng rng(0);
  return train_rf(d, {}, rng);
}

} // namespace

TEST_CASE("transition function values") {
  for (double d : {1.0, 2.0, 4.0, 6.0}) CHECK(transition(0.0, 10.0, d) == 1.0);
  const double ln2 = std::log(2.0);
  CHECK(transition(10.0, 10.0, 1.0) == doctest::Approx(1.0 - ln2 * ln2).epsilon(1e-15));
  CHECK(transition(10.0, 10.0, 1.0) == doctest::Approx(0.5195).epsilon(1e-4));
  CHECK(transition(10.0, 10.0, 4.0) == doctest::Approx(0.0728).epsilon(1e-3));
  CHECK(transition(15.0, 10.0, 2.0) == transition(10.0, 10.0, 2.0));
  CHECK(transition(-1.0, 10.0, 2.0) == 1.0);
}

TEST_CASE("transition is strictly decreasing on a fine grid") {
  for (double d : {1.0, 2.0, 4.0, 6.0}) {
    double prev = transition(0.0, 1.0, d);
    for (int i = 1; i <= 1000; ++i) {
      const double g = transition(i / 1000.0, 1.0, d);
      CHECK(g < prev);
      CHECK(g > 0.0);
      prev = g;
    }
  }
}

TEST_CASE("sample budget") {
  CHECK(sample_count(0, 7) == 10);
  CHECK(sample_count(7, 7) == 10010);
  CHECK(sample_count(5, 10) == 5010);
  CHECK(sample_count(20, 10) == 10010);
  std::size_t prev = 0;
  for (int i = 0; i <= 300; ++i) {
    const auto n = sample_count(i, 300);
    CHECK(n >= prev);
    prev = n;
  }
}

TEST_CASE("acquisition settings validation") {
  AcquisitionSettings s;
  s.d = 0.5;
  CHECK_THROWS_AS(s.validate(), DomainError);
  s.d = 1.0;
  s.l = 0;
  CHECK_THROWS_AS(s.validate(), DomainError);
}

TEST_CASE("truncated normal edge cases") {
  Rng rng(1);
  CHECK(truncated_normal(rng, 0.3, 0.0, 0.0, 1.0) == 0.3);
  for (int i = 0; i < 1000; ++i) {
    const double v = truncated_normal(rng, 0.0, 5.0, 0.0, 1.0);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("vanishing gamma keeps continuous values at the centre") {
  const SearchSpace space({ParamSpec::continuous("x", 0, 1)});
  Rng rng(2);
  const double gamma = 1e-6;
  const double sigma = gamma * 0.5;
  int inside = 0;
  for (int i = 0; i < 10000; ++i) {
    const double v = std::get<double>(sample_neighbor(space, ConfigPoint{{0.4}}, gamma, rng).values[0]);
    inside += std::abs(v - 0.4) < 4.0 * sigma;
  }
  CHECK(inside >= 9999);
}

TEST_CASE("neighbours of a boundary centre respect the bound") {
  const SearchSpace space({ParamSpec::continuous("x", 2, 5)});
  Rng rng(3);
  for (double g : {0.01, 0.5, 1.0}) {
    for (int i = 0; i < 2000; ++i) {
      const double v = std::get<double>(sample_neighbor(space, ConfigPoint{{2.0}}, g, rng).values[0]);
      CHECK(v >= 2.0);
      CHECK(v <= 5.0);
    }
  }
}

TEST_CASE("neighbour spread matches the truncated-normal moments") {
  const SearchSpace space({ParamSpec::continuous("x", 0, 1)});
  Rng rng(4);
  const int n = 100000;
  std::vector<double> v(n);
  for (auto &x : v) x = std::get<double>(sample_neighbor(space, ConfigPoint{{0.5}}, 1.0, rng).values[0]);
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1));
  const double expected = truncated_std(0.5, 0.5, 0.0, 1.0);
  CHECK(expected == doctest::Approx(0.2698).epsilon(1e-3));
  CHECK(std::abs(sd - expected) < 0.05 * expected);
}

TEST_CASE("discrete neighbours are valid; categorical follows gamma") {
  const SearchSpace space({ParamSpec::integer("i", 0, 9),
                           ParamSpec::ordinal("o", {"a", "b", "c", "d"}),
                           ParamSpec::categorical("k", {"A", "B", "C", "D"})});
  const ConfigPoint centre{{4.0, std::string("b"), std::string("C")}};
  Rng rng(5);
  for (int i = 0; i < 2000; ++i) {
    const auto p = sample_neighbor(space, centre, 0.0, rng);
    CHECK(std::get<std::string>(p.values[2]) == "C");
    CHECK(std::get<double>(p.values[0]) == 4.0);
    CHECK(std::get<std::string>(p.values[1]) == "b");
  }
  // gamma = 1: always resampled uniformly over the four labels.
  std::array<int, 4> counts{};
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    const auto p = sample_neighbor(space, centre, 1.0, rng);
    REQUIRE(is_valid(space, p));
    const auto &label = std::get<std::string>(p.values[2]);
    ++counts[static_cast<std::size_t>(label[0] - 'A')];
  }
  for (int c : counts) CHECK(std::abs(c - n / 4.0) < 5.0 * std::sqrt(n * 0.25 * 0.75));
  // gamma = 0.3: kept with probability 0.7 + 0.3/4.
  int kept = 0;
  for (int i = 0; i < n; ++i) {
    kept += std::get<std::string>(sample_neighbor(space, centre, 0.3, rng).values[2]) == "C";
  }
  const double p_keep = 0.7 + 0.3 / 4.0;
  CHECK(std::abs(kept - n * p_keep) < 5.0 * std::sqrt(n * p_keep * (1 - p_keep)));
}

TEST_CASE("integer neighbours round half to even") {
  const SearchSpace space({ParamSpec::integer("i", -100, 100)});
  Rng rng(6);
  for (int i = 0; i < 5000; ++i) {
    const double v = std::get<double>(sample_neighbor(space, ConfigPoint{{0.0}}, 0.05, rng).values[0]);
    CHECK(v == std::nearbyint(v));
  }
  CHECK(std::nearbyint(2.5) == 2.0); // rounding mode sanity
}

TEST_CASE("propose returns one valid proposal per top, in order") {
  const SearchSpace space({ParamSpec::continuous("x", 0, 1),
                           ParamSpec::categorical("k", {"A", "B"})});
  const auto model = constant_model(space.encoded_size(), 3.0);
  AcquisitionSettings settings;
  Rng rng(7);
  std::vector<ConfigPoint> top{ConfigPoint{{0.1, std::string("A")}},
                               ConfigPoint{{0.5, std::string("B")}},
                               ConfigPoint{{0.9, std::string("A")}}};
  const auto out = propose(model, space, top, {0.0, 10.0}, settings, rng);
  REQUIRE(out.size() == 3);
  for (const auto &p : out) CHECK(is_valid(space, p));
  CHECK_THROWS_AS(propose(model, space, {}, {0.0, 10.0}, settings, rng), DomainError);
}

TEST_CASE("propose finds the maximum of a known function") {
  // A single unpruned tree on a 2001-point grid reproduces -(x - 0.3)^2 as a
  // step function whose maximum sits at 0.3.
  Dataset d(1, 1);
  for (int i = 0; i <= 2000; ++i) {
    const double x = i / 2000.0;
    d.add(std::vector<double>{x}, std::vector<double>{-(x - 0.3) * (x - 0.3)});
  }
  RfSettings rf;
  rf.n_trees = 1;
  rf.bootstrap = false;
  Rng fit_rng(0);
  const auto model = train_rf(d, rf, fit_rng);
  const SearchSpace space({ParamSpec::continuous("x", 0, 1)});
  AcquisitionSettings settings;
  settings.base_samples = 10000;
  settings.growth = 0;
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const auto out = propose(model, space, {ConfigPoint{{0.5}}}, {0.0, 1.0}, settings, rng);
    hits += std::abs(std::get<double>(out[0].values[0]) - 0.3) < 0.05;
  }
  CHECK(hits >= 19);
}

TEST_CASE("propose does not depend on the worker count") {
  const SearchSpace space({ParamSpec::continuous("x", 0, 1), ParamSpec::continuous("y", 0, 1)});
  Dataset d(2, 1);
  Rng data_rng(1);
  for (int i = 0; i < 50; ++i) {
    const double x = uniform01(data_rng), y = uniform01(data_rng);
    d.add(std::vector<double>{x, y}, std::vector<double>{x - y * y});
  }
  Rng fit_rng(2);
  const auto model = train_rf(d, {}, fit_rng);
  std::vector<ConfigPoint> top{ConfigPoint{{0.2, 0.2}}, ConfigPoint{{0.7, 0.1}},
                               ConfigPoint{{0.4, 0.9}}};
  AcquisitionSettings one, many;
  many.workers = 4;
  Rng a(9), b(9);
  CHECK(propose(model, space, top, {3, 10}, one, a) ==
        propose(model, space, top, {3, 10}, many, b));
}
