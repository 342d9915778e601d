#include <doctest.h>

#include <array>
#include <cmath>
#include <set>

#include "qnopt/errors.hpp"
#include "qnopt/param_space.hpp"

using namespace qnopt;

namespace {

SearchSpace mixed_space() {
  return SearchSpace({ParamSpec::continuous("c", -1.0, 2.0),
                      ParamSpec::integer("i", 0, 9),
                      ParamSpec::ordinal("o", {"low", "mid", "high"}),
                      ParamSpec::categorical("k", {"A", "B", "C"})});
}

} // namespace

TEST_CASE("param specs reject invalid domains") {
  CHECK_THROWS_AS(ParamSpec::continuous("x", 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(ParamSpec::continuous("x", 0.0, INFINITY), DomainError);
  CHECK_THROWS_AS(ParamSpec::integer("x", 0.2, 0.8), DomainError);
  CHECK_THROWS_AS(ParamSpec::ordinal("x", {}), DomainError);
  CHECK_THROWS_AS(ParamSpec::categorical("x", {"a", "a"}), DomainError);
}

TEST_CASE("search spaces need unique names and at least one parameter") {
  CHECK_THROWS_AS(SearchSpace({}), DomainError);
  CHECK_THROWS_AS(SearchSpace({ParamSpec::continuous("x", 0, 1),
                               ParamSpec::integer("x", 0, 3)}),
                  DomainError);
  CHECK_THROWS_AS(SearchSpace({ParamSpec::continuous("x", 0, 1)}, {{"x", 2.0}}),
                  DomainError);
  const SearchSpace ok({ParamSpec::continuous("x", 0, 1)}, {{"y", 2.0}});
  CHECK(ok.size() == 1);
  CHECK(ok.index_of("x") == 0);
  CHECK_FALSE(ok.index_of("y").has_value());
}

TEST_CASE("uniform samples stay in bounds") {
  const SearchSpace space({ParamSpec::continuous("x", 0.0, 1.0)});
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double v = std::get<double>(sample_uniform(space, rng).values[0]);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("singleton categorical always samples its value") {
  const SearchSpace space({ParamSpec::categorical("k", {"A"})});
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    CHECK(std::get<std::string>(sample_uniform(space, rng).values[0]) == "A");
  }
}

TEST_CASE("integer sampling is uniform over the inclusive range") {
  const SearchSpace space({ParamSpec::integer("i", 0, 9)});
  Rng rng(3);
  const int n = 100000;
  std::array<int, 10> counts{};
  for (int i = 0; i < n; ++i) {
    const double v = std::get<double>(sample_uniform(space, rng).values[0]);
    REQUIRE(v == std::floor(v));
    REQUIRE(v >= 0.0);
    REQUIRE(v <= 9.0);
    ++counts[static_cast<std::size_t>(v)];
  }
  const double expected = n / 10.0;
  const double sigma = std::sqrt(n * 0.1 * 0.9);
  double chi2 = 0.0;
  for (int c : counts) {
    CHECK(std::abs(c - expected) < 5.0 * sigma);
    chi2 += (c - expected) * (c - expected) / expected;
  }
  // 99.9% quantile of chi-square with 9 degrees of freedom.
  CHECK(chi2 < 27.877);
}

TEST_CASE("encoding rules") {
  SUBCASE("continuous is the identity") {
    const SearchSpace s({ParamSpec::continuous("x", 0, 1)});
    CHECK(encode(s, ConfigPoint{{0.25}}) == std::vector<double>{0.25});
  }
  SUBCASE("ordinal is the index") {
    const SearchSpace s({ParamSpec::ordinal("o", {"low", "mid", "high"})});
    CHECK(encode(s, ConfigPoint{{std::string("mid")}}) == std::vector<double>{1.0});
  }
  SUBCASE("categorical is one-hot") {
    const SearchSpace s({ParamSpec::categorical("k", {"A", "B", "C"})});
    CHECK(encode(s, ConfigPoint{{std::string("B")}}) ==
          std::vector<double>{0.0, 1.0, 0.0});
  }
  SUBCASE("invalid points throw") {
    const SearchSpace s({ParamSpec::continuous("x", 0, 1)});
    CHECK_THROWS_AS(encode(s, ConfigPoint{{1.5}}), DomainError);
  }
}

TEST_CASE("encoding length, validity of samples and injectivity") {
  const auto space = mixed_space();
  CHECK(space.encoded_size() == 1 + 1 + 1 + 3);
  Rng rng(4);
  std::set<std::vector<double>> seen;
  std::set<std::string> described;
  for (int i = 0; i < 2000; ++i) {
    const auto p = sample_uniform(space, rng);
    CHECK(is_valid(space, p));
    const auto e = encode(space, p);
    CHECK(e.size() == space.encoded_size());
    seen.insert(e);
    described.insert(describe(space, p));
  }
  CHECK(seen.size() == described.size());
}

TEST_CASE("validate reports every violation") {
  const SearchSpace cont({ParamSpec::continuous("x", 0, 1)});
  CHECK(validate(cont, ConfigPoint{{0.5}}).empty());
  auto v = validate(cont, ConfigPoint{{1.5}});
  REQUIRE(v.size() == 1);
  CHECK(v[0].kind == Violation::Kind::out_of_bounds);

  const SearchSpace integer({ParamSpec::integer("i", 0, 9)});
  v = validate(integer, ConfigPoint{{3.5}});
  REQUIRE(v.size() == 1);
  CHECK(v[0].kind == Violation::Kind::non_integral);

  const auto space = mixed_space();
  v = validate(space, ConfigPoint{{0.5}});
  REQUIRE(v.size() == 1);
  CHECK(v[0].kind == Violation::Kind::arity);

  v = validate(space, ConfigPoint{{5.0, 2.5, std::string("max"), 1.0}});
  CHECK(v.size() == 4);
  std::set<Violation::Kind> kinds;
  for (const auto &x : v) kinds.insert(x.kind);
  CHECK(kinds.count(Violation::Kind::out_of_bounds));
  CHECK(kinds.count(Violation::Kind::non_integral));
  CHECK(kinds.count(Violation::Kind::non_member));
  CHECK(kinds.count(Violation::Kind::wrong_type));
}

TEST_CASE("numeric views and formatting") {
  const auto space = mixed_space();
  CHECK(numeric_value(space.params()[2], std::string("high")) == 2.0);
  CHECK(numeric_value(space.params()[0], 0.75) == 0.75);
  CHECK(format_value(0.1) == "0.1");
  CHECK(format_value(std::string("B")) == "B");
  CHECK(parse_param_kind("ordinal") == ParamKind::ordinal);
  CHECK_FALSE(parse_param_kind("real").has_value());
}
