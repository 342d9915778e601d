#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "qnopt/config.hpp"
#include "qnopt/errors.hpp"
#include "qnopt/io.hpp"
#include "qnopt/study.hpp"

using namespace qnopt;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string &name) {
  const auto dir = fs::temp_directory_path() / "qnopt-test-config";
  fs::create_directories(dir);
  return dir / name;
}

std::size_t parse_error_line(const std::string &text) {
  try {
    (void)parse_toml(text);
  } catch (const ParseError &e) {
    return e.line();
  }
  return 0;
}

std::string config_error(const std::string &text) {
  try {
    (void)make_study(parse_toml(text));
  } catch (const ConfigError &e) {
    return e.what();
  }
  return {};
}

} // namespace

TEST_CASE("toml scalars and tables") {
  const auto doc = parse_toml(R"(
# leading comment
title = "run \"one\"\t"
path = 'C:\raw'
count = 1_000
hex = 0xff
neg = -7
ratio = 2.5e-1
big = +inf
flag = true

[study]
seed = 42 # trailing comment
"quoted key" = 1

[optimizer.rf]
n_trees = 50

[a]
b.c = 3
)");
  CHECK(doc["title"] == "run \"one\"\t");
  CHECK(doc["path"] == "C:\\raw");
  CHECK(doc["count"] == 1000);
  CHECK(doc["count"].is_number_integer());
  CHECK(doc["hex"] == 255);
  CHECK(doc["neg"] == -7);
  CHECK(doc["ratio"].get<double>() == 0.25);
  CHECK(std::isinf(doc["big"].get<double>()));
  CHECK(doc["flag"] == true);
  CHECK(doc["study"]["seed"] == 42);
  CHECK(doc["study"]["quoted key"] == 1);
  CHECK(doc["optimizer"]["rf"]["n_trees"] == 50);
  CHECK(doc["a"]["b"]["c"] == 3);
}

TEST_CASE("toml arrays and inline tables") {
  const auto doc = parse_toml(R"(
lengths = [2, 2.5,
  # comment inside
  3, ]
groups = [[0], [1, 2]]
point = { x = 1, y = "two" }

[[space.param]]
name = "a"
kind = "continuous"

[[space.param]]
name = "b"
kind = "categorical"
values = ["x", "y"]
)");
  CHECK(doc["lengths"].size() == 3);
  CHECK(doc["lengths"][1].get<double>() == 2.5);
  CHECK(doc["groups"][1][1] == 2);
  CHECK(doc["point"]["y"] == "two");
  REQUIRE(doc["space"]["param"].size() == 2);
  CHECK(doc["space"]["param"][1]["values"][0] == "x");
}

TEST_CASE("toml errors report their line") {
  CHECK(parse_error_line("a = 1\nb = \n") == 2);
  CHECK(parse_error_line("a = 1\na = 2\n") == 2);
  CHECK(parse_error_line("[t]\nx = 1\n[t]\ny = 2\n") == 3);
  CHECK(parse_error_line("x = \"open\n") == 1);
  CHECK(parse_error_line("\n\nx = [1, 2\n") >= 3);
  CHECK(parse_error_line("x = 1 y\n") == 1);
  CHECK(parse_error_line("[bad\n") == 1);
}

TEST_CASE("missing config file") {
  CHECK_THROWS_AS((void)load_toml("/nonexistent/qnopt.toml"), ConfigError);
  CHECK_THROWS_AS((void)load_study("/nonexistent/qnopt.toml"), ConfigError);
}

TEST_CASE("study defaults for a synthetic sphere") {
  const auto s = make_study(parse_toml("[study]\nuse_case = \"synthetic\"\n"));
  CHECK(s.use_case == UseCase::synthetic);
  CHECK(s.method == Method::surrogate);
  CHECK(s.space->size() == 5);
  CHECK(s.space->params()[0].min() == -5.0);
  CHECK(s.objective->objective_count() == 1);
  CHECK(s.run.n == 20);
  CHECK(s.run.l == 5);
  CHECK(s.n_exec == 1000);
}

TEST_CASE("study settings are applied") {
  const auto s = make_study(parse_toml(R"(
[study]
use_case = "synthetic"
method = "annealing"
seed = 7
n = 3
workers = 2

[optimizer]
cycles = 12
l = 4
k0 = 8
d = 2.0

[baseline]
evaluations = 30
initial_temperature = 0.5
neighbor_scale = 0.2

[confirm]
n_exec = 50

[synthetic]
function = "rosenbrock"
)"));
  CHECK(s.method == Method::annealing);
  CHECK(s.run.seed == 7);
  CHECK(s.baseline.seed == 7);
  CHECK(s.run.n == 3);
  CHECK(s.run.l == 4);
  CHECK(s.run.k0 == 8);
  CHECK(std::get<CycleLimit>(s.run.limit).cycles == 12);
  CHECK(std::get<EvaluationBudget>(s.baseline.budget).evaluations == 30);
  CHECK(s.annealing.initial_temperature == 0.5);
  CHECK(s.n_exec == 50);
  CHECK(s.space->size() == 10);
  CHECK(s.space->params()[0].max() == 2.0);
}

TEST_CASE("study spaces per use case") {
  auto qes = make_study(parse_toml("[study]\nuse_case = \"qes\"\n[qes]\nlink_lengths = [5, 2, 2]\n"));
  CHECK(qes.space->size() == 3);
  CHECK(qes.space->params()[0].name() == "alpha_server");
  CHECK(qes.objective->objective_count() == 2);

  auto cd = make_study(parse_toml("[study]\nuse_case = \"cd\"\n"));
  CHECK(cd.space->size() == 3);
  CHECK(cd.objective->objective_count() == 3);

  auto tree = make_study(parse_toml("[study]\nuse_case = \"cd\"\n[cd]\ntopology = \"tree20\"\n"));
  CHECK(tree.space->size() == 20);
  CHECK(tree.objective->objective_count() == 7);

  auto mem = make_study(parse_toml("[study]\nuse_case = \"memalloc\"\n"));
  CHECK(mem.space->size() == 9);
  CHECK(mem.space->params()[0].kind() == ParamKind::integer);
  CHECK(mem.objective->objective_count() == 10);
}

TEST_CASE("external study needs a space") {
  const std::string stub = std::string(QNOPT_STUB_DIR) + "/echo_one.py";
  const auto s = make_study(parse_toml(R"(
[study]
use_case = "external"

[external]
command = ["python3", ")" + stub + R"("]
objectives = 1

[[space.param]]
name = "x"
kind = "continuous"
min = 0.0
max = 1.0

[[space.param]]
name = "mode"
kind = "ordinal"
values = ["lo", "hi"]

[space.fixed]
budget = 450
)"));
  CHECK(s.space->size() == 2);
  CHECK(s.space->fixed().size() == 1);
  CHECK(s.objective->run(ConfigPoint{{0.5, std::string("hi")}}, 1) == std::vector<double>{1.0});
  CHECK(!config_error("[study]\nuse_case = \"external\"\n[external]\ncommand = [\"true\"]\n").empty());
}

TEST_CASE("config errors") {
  CHECK(config_error("[study]\nuse_case = \"synthetic\"\nbogus = 1\n").find("bogus") != std::string::npos);
  CHECK(config_error("[study]\nuse_case = \"warp\"\n").find("warp") != std::string::npos);
  CHECK(!config_error("[study]\nuse_case = \"synthetic\"\nn = \"many\"\n").empty());
  CHECK(!config_error("[study]\nuse_case = \"synthetic\"\nn = 0\n").empty());
  CHECK(!config_error("[study]\nuse_case = \"synthetic\"\n[optimizer]\ncycles = 3\ntime_limit = 2.0\n").empty());
  CHECK(!config_error("[study]\nuse_case = \"qes\"\n[qes]\nlink_lengths = [1]\n").empty());
  CHECK(!config_error("[study]\nuse_case = \"cd\"\n[cd]\ntopology = \"edge_list\"\nedge_list = \"missing.txt\"\n").empty());
  CHECK(!config_error("[study]\nuse_case = \"qes\"\n[[space.param]]\nname = \"x\"\n").empty());
  CHECK(!config_error("[surprise]\nx = 1\n").empty());
}

TEST_CASE("edge list topology resolves relative to the config") {
  const auto dir = scratch("edges");
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "graph.txt");
    out << "0 1\n1 2\n1 3\n";
  }
  {
    std::ofstream out(dir / "study.toml");
    out << "[study]\nuse_case = \"cd\"\n[cd]\ntopology = \"edge_list\"\nedge_list = \"graph.txt\"\nusers = [0, 2, 3]\n";
  }
  const auto s = load_study(dir / "study.toml");
  CHECK(s.space->size() == 4);
  CHECK(s.objective->objective_count() == 3);
}

TEST_CASE("space json round trip") {
  const SearchSpace space({ParamSpec::continuous("x", -1, 2), ParamSpec::integer("n", 0, 9),
                           ParamSpec::ordinal("o", {"a", "b"}),
                           ParamSpec::categorical("c", {"p", "q", "r"})},
                          {{"fixed_num", 3.5}, {"fixed_label", std::string("z")}});
  const auto back = space_from_json(space_to_json(space));
  REQUIRE(back.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(back.params()[i].name() == space.params()[i].name());
    CHECK(back.params()[i].kind() == space.params()[i].kind());
    CHECK(back.params()[i].values() == space.params()[i].values());
  }
  CHECK(back.fixed() == space.fixed());
}

TEST_CASE("number formatting round-trips") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(3.0) == "3");
  CHECK(format_number(-2.5e-300) == "-2.5e-300");
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double v = (uniform01(rng) - 0.5) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    CHECK(std::stod(format_number(v)) == v);
  }
}

TEST_CASE("dataset csv round trip") {
  const SearchSpace space({ParamSpec::continuous("x", 0, 1), ParamSpec::integer("n", 0, 5),
                           ParamSpec::categorical("label", {"plain", "with,comma", "say \"hi\""})});
  std::vector<EvalRecord> recs;
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    EvalRecord r;
    r.config = sample_uniform(space, rng);
    r.mean_utilities = {uniform01(rng), -uniform01(rng) * 1e-7};
    r.sample_count = 4;
    r.cycle = static_cast<std::size_t>(i / 5);
    recs.push_back(r);
  }
  const auto path = scratch("round.csv");
  {
    DatasetCsvWriter w(path, {{"seed", 5}}, space, {"U0", "U1"});
    w.sync({recs.begin(), recs.begin() + 7});
    w.sync(recs);
    CHECK(w.written() == 20);
  }
  const auto table = read_csv_table(path);
  CHECK(table.metadata["seed"] == 5);
  CHECK(table.columns == std::vector<std::string>{"cycle", "x", "n", "label", "U0", "U1", "aggregate"});
  const auto data = interpret_dataset(table, space);
  REQUIRE(data.configs.size() == 20);
  for (std::size_t i = 0; i < 20; ++i) {
    CHECK(data.configs[i] == recs[i].config);
    CHECK(data.objectives[i] == recs[i].mean_utilities);
    CHECK(data.cycles[i] == recs[i].cycle);
  }
}

TEST_CASE("malformed dataset rows name the row") {
  const SearchSpace space({ParamSpec::continuous("x", 0, 1)});
  const auto path = scratch("bad.csv");
  {
    std::ofstream out(path);
    out << "# {}\ncycle,x,U0,aggregate\n0,0.5,1,1\n0,0.2,2\n";
  }
  try {
    (void)read_csv_table(path);
    FAIL("expected ParseError");
  } catch (const ParseError &e) {
    CHECK(e.line() == 4);
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
  }
  {
    std::ofstream out(path);
    out << "cycle,x,U0,aggregate\n0,0.5,1,1\n0,abc,2,2\n";
  }
  try {
    (void)interpret_dataset(read_csv_table(path), space);
    FAIL("expected ParseError");
  } catch (const ParseError &e) {
    CHECK(e.line() == 3);
  }
  {
    std::ofstream out(path);
    out << "cycle,x,U0,aggregate\n0,1.5,1,1\n";
  }
  CHECK_THROWS_AS((void)interpret_dataset(read_csv_table(path), space), ParseError);
  {
    std::ofstream out(path);
    out << "cycle,y,U0,aggregate\n0,0.5,1,1\n";
  }
  CHECK_THROWS_AS((void)interpret_dataset(read_csv_table(path), space), ParseError);
}
