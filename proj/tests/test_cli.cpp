#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "qnopt/commands.hpp"
#include "qnopt/config.hpp"
#include "qnopt/errors.hpp"
#include "qnopt/io.hpp"

using namespace qnopt;
namespace fs = std::filesystem;

namespace {

const char *kSphere = R"(
[study]
use_case = "synthetic"
seed = 3
n = 2

[optimizer]
cycles = 10
l = 3
k0 = 4
base_samples = 10
growth = 100

[optimizer.rf]
n_trees = 20

[synthetic]
function = "sphere"
noise = 0.1
dim = 3
)";

fs::path fresh_dir(const std::string &name) {
  const auto dir = fs::temp_directory_path() / "qnopt-test-cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t data_rows(const fs::path &csv) {
  std::ifstream in(csv);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') ++n;
  }
  return n - 1;
}

int run_cli(const std::string &args) {
  const std::string cmd = std::string(QNOPT_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Study study_from(const std::string &text) { return make_study(parse_toml(text)); }

} // namespace

TEST_CASE("optimize writes the dataset and companions") {
  const auto study = study_from(kSphere);
  const auto dir = fresh_dir("optimize");
  std::ostringstream progress;
  const auto res = cmd_optimize(study, dir, &progress);
  CHECK(res.records.size() == 4 + 10 * 3);
  CHECK(data_rows(dir / "dataset.csv") == 34);
  for (const char *f : {"dataset.json", "metadata.json", "profile.json", "profile.csv",
                        "cycles.csv", "best.json"}) {
    CHECK(fs::exists(dir / f));
  }
  const auto profile = read_json(dir / "profile.json");
  double sum = 0.0;
  for (const char *k : {"simulation", "training", "acquisition", "remaining"}) {
    sum += profile["fractions"][k].get<double>();
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  const auto meta = read_json(dir / "metadata.json");
  CHECK(meta["seed"] == 3);
  CHECK(meta.contains("settings"));
  const auto best = read_json(dir / "best.json");
  CHECK(best["aggregate"].get<double>() == res.best_record().aggregate());
  CHECK(!progress.str().empty());
}

TEST_CASE("optimize output is byte-identical across runs and workers") {
  auto study = study_from(kSphere);
  const auto a = fresh_dir("repro-a");
  const auto b = fresh_dir("repro-b");
  (void)cmd_optimize(study, a);
  set_workers(study, 4);
  (void)cmd_optimize(study, b);
  CHECK(slurp(a / "dataset.csv") == slurp(b / "dataset.csv"));
  CHECK(slurp(a / "dataset.json") == slurp(b / "dataset.json"));
}

TEST_CASE("metadata replays the run") {
  const auto study = study_from(kSphere);
  const auto a = fresh_dir("replay-a");
  const auto b = fresh_dir("replay-b");
  (void)cmd_optimize(study, a);
  const auto again = load_study(a / "metadata.json");
  (void)cmd_optimize(again, b);
  CHECK(slurp(a / "dataset.csv") == slurp(b / "dataset.csv"));
}

TEST_CASE("baselines produce the same record format") {
  auto study = study_from(std::string(kSphere) + "\n[baseline]\nevaluations = 12\n");
  study.method = Method::random;
  const auto dir = fresh_dir("random");
  const auto res = cmd_optimize(study, dir);
  CHECK(res.records.size() == 12);
  CHECK(data_rows(dir / "dataset.csv") == 12);
  study.method = Method::annealing;
  const auto sa = cmd_optimize(study, fresh_dir("annealing"));
  CHECK(sa.records.size() == 12);
}

TEST_CASE("confirm statistics") {
  auto constant = study_from(R"(
[study]
use_case = "synthetic"
n = 1
[optimizer]
cycles = 1
l = 2
[synthetic]
function = "constant"
value = 2.5
dim = 2
)");
  const auto dir = fresh_dir("confirm-constant");
  (void)cmd_optimize(constant, dir);
  const auto stats = cmd_confirm(constant, dir / "best.json", dir);
  CHECK(stats.runs == 1000);
  CHECK(stats.mean[0] == 2.5);
  CHECK(stats.standard_error[0] == 0.0);
  CHECK(fs::exists(dir / "confirm.json"));

  const auto uniform = study_from(R"(
[study]
use_case = "synthetic"
[synthetic]
function = "uniform"
dim = 1
)");
  const auto u = confirm(uniform, ConfigPoint{{0.0}});
  const double expected = std::sqrt(1.0 / 12.0) / std::sqrt(1000.0);
  CHECK(std::abs(u.standard_error[0] - expected) < 0.2 * expected);
  CHECK(std::abs(u.mean[0] - 0.5) < 0.05);

  CHECK_THROWS_AS((void)cmd_confirm(constant, dir / "nope.json", dir), ConfigError);
}

TEST_CASE("pareto over a dataset") {
  const auto study = study_from(kSphere);
  const auto dir = fresh_dir("pareto-one");
  auto one = study;
  one.run.limit = CycleLimit{0};
  one.run.k0 = 1;
  (void)cmd_optimize(one, dir);
  const auto single = cmd_pareto(dir / "dataset.csv", nullptr, dir);
  CHECK(single.dominating_fraction() == 1.0);
  CHECK(fs::exists(dir / "pareto_report.csv"));
  CHECK(fs::exists(dir / "pareto_summary.json"));

  const SearchSpace space({ParamSpec::continuous("x", 0, 1)});
  const auto toy = fresh_dir("pareto-toy");
  {
    std::ofstream out(toy / "toy.csv");
    out << "cycle,x,U0,U1,aggregate\n0,0.1,1,1,2\n0,0.2,2,0,2\n0,0.3,0,2,2\n0,0.4,0.5,0.5,1\n";
  }
  const auto r = cmd_pareto(toy / "toy.csv", &space, toy);
  CHECK(r.dominating_indices == std::vector<std::size_t>{0, 1, 2});
  CHECK(r.dominating_fraction() == doctest::Approx(0.75));

  {
    std::ofstream out(toy / "empty.csv");
    out << "cycle,x,U0,U1,aggregate\n";
  }
  CHECK_THROWS_AS((void)cmd_pareto(toy / "empty.csv", &space, toy), EmptyReportError);
  {
    std::ofstream out(toy / "broken.csv");
    out << "cycle,x,U0,U1,aggregate\n0,0.1,1,1,2\n0,0.2\n";
  }
  try {
    (void)cmd_pareto(toy / "broken.csv", &space, toy);
    FAIL("expected ParseError");
  } catch (const ParseError &e) {
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
  }
}

TEST_CASE("command line exit codes") {
  const auto dir = fresh_dir("exit");
  {
    std::ofstream out(dir / "ok.toml");
    out << kSphere;
  }
  CHECK(run_cli("optimize -q -c " + (dir / "ok.toml").string() + " --cycles 2 -o " +
                (dir / "out").string()) == 0);
  CHECK(data_rows(dir / "out" / "dataset.csv") == 4 + 2 * 3);
  CHECK(run_cli("confirm -q -c " + (dir / "ok.toml").string() + " -b " +
                (dir / "out" / "best.json").string() + " --n-exec 20 -o " +
                (dir / "out").string()) == 0);
  CHECK(run_cli("pareto -q -d " + (dir / "out" / "dataset.csv").string()) == 0);
  CHECK(fs::exists(dir / "out" / "pareto_report.csv"));
  CHECK(run_cli("simulate qes -n 2 -v 0.1,0.1,0.1") == 0);
  CHECK(run_cli("simulate cd -n 2 -v 0.2,0.5,0.5") == 0);

  CHECK(run_cli("optimize -c /nonexistent.toml") == 1);
  CHECK(run_cli("frobnicate") == 1);
  CHECK(run_cli("optimize --cycles many") == 1);
  {
    std::ofstream out(dir / "bad.toml");
    out << "[study]\nuse_case = \"synthetic\"\nn = \n";
  }
  CHECK(run_cli("optimize -c " + (dir / "bad.toml").string()) == 1);
  CHECK(run_cli("simulate qes -v 0.9,0.1,0.1") == 1);

  {
    std::ofstream out(dir / "crash.toml");
    out << "[study]\nuse_case = \"external\"\nn = 1\n[optimizer]\ncycles = 1\nl = 1\n"
           "[external]\ncommand = [\"python3\", \""
        << QNOPT_STUB_DIR << "/failing.py\"]\n"
        << "[[space.param]]\nname = \"x\"\nkind = \"continuous\"\nmin = 0.0\nmax = 1.0\n";
  }
  CHECK(run_cli("optimize -q -c " + (dir / "crash.toml").string() + " -o " +
                (dir / "crash").string()) == 2);
}
