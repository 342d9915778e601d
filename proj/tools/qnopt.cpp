#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "qnopt/cd.hpp"
#include "qnopt/commands.hpp"
#include "qnopt/config.hpp"
#include "qnopt/errors.hpp"
#include "qnopt/io.hpp"
#include "qnopt/parallel.hpp"
#include "qnopt/qes.hpp"
#include "qnopt/study.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;
using namespace qnopt;

namespace {

constexpr int kOk = 0;
constexpr int kUserError = 1;
constexpr int kRuntimeError = 2;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::size_t workers = 0;
  std::string out;
  bool quiet = false;
};

void add_common(CLI::App *cmd, Common &c, bool needs_config) {
  auto *opt = cmd->add_option("-c,--config", c.config, "study file (TOML, or a run's metadata.json)");
  if (needs_config) opt->required()->check(CLI::ExistingFile);
  else opt->check(CLI::ExistingFile);
  cmd->add_option("-s,--seed", c.seed, "master seed (overrides the config)");
  cmd->add_option("-w,--workers", c.workers, "worker threads (0: logical cores)");
  cmd->add_option("-o,--out", c.out, "output directory");
  cmd->add_flag("-q,--quiet", c.quiet, "no progress output");
}

Study study_for(const Common &c, const std::string &use_case = {}) {
  Study s;
  if (!c.config.empty()) {
    s = load_study(c.config);
  } else {
    Json doc = Json::object();
    doc["study"]["use_case"] = use_case;
    s = make_study(doc);
  }
  if (c.seed) set_seed(s, *c.seed);
  set_workers(s, c.workers);
  return s;
}

fs::path out_dir(const Common &c, const Study &s) {
  return c.out.empty() ? fs::path(s.output_dir) : fs::path(c.out);
}

std::vector<double> parse_values(const std::string &text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception &) {
      used = 0;
    }
    if (used == 0 || used != item.size()) {
      throw ConfigError("'" + item + "' is not a number");
    }
    out.push_back(v);
  }
  return out;
}

ConfigPoint point_from(const Study &s, const std::vector<double> &values) {
  if (values.size() != s.space->size()) {
    throw ConfigError("expected " + std::to_string(s.space->size()) +
                      " values, got " + std::to_string(values.size()));
  }
  ConfigPoint p;
  for (double v : values) p.values.emplace_back(v);
  if (auto v = validate(*s.space, p); !v.empty()) throw ConfigError(v.front().message);
  return p;
}

Json mean_and_error(const std::vector<std::vector<double>> &rows) {
  const std::size_t n = rows.size();
  Json out = Json::array();
  for (std::size_t k = 0; k < rows.front().size(); ++k) {
    double mean = 0.0;
    for (const auto &r : rows) mean += r[k];
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (const auto &r : rows) ss += (r[k] - mean) * (r[k] - mean);
    const double se = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1) /
                                        static_cast<double>(n))
                            : 0.0;
    out.push_back({{"mean", mean}, {"standard_error", se}});
  }
  return out;
}

void print_csv(const std::vector<std::string> &names,
               const std::vector<std::pair<std::string, Json>> &columns) {
  std::cout << "name";
  for (const auto &[label, stats] : columns) {
    std::cout << ',' << label << "_mean," << label << "_se";
  }
  std::cout << '\n';
  for (std::size_t k = 0; k < names.size(); ++k) {
    std::cout << names[k];
    for (const auto &[label, stats] : columns) {
      std::cout << ',' << format_number(stats[k]["mean"].get<double>()) << ','
                << format_number(stats[k]["standard_error"].get<double>());
    }
    std::cout << '\n';
  }
}

int simulate_qes(const Study &s, const std::vector<double> &values, std::size_t runs,
                 bool json) {
  if (s.use_case != UseCase::qes) throw ConfigError("config is not a qes study");
  const auto &obj = static_cast<const qes::QesObjective &>(*s.objective);
  point_from(s, values);
  std::vector<std::vector<double>> rate(runs), fid(runs), util(runs);
  parallel_for(runs, s.run.workers, [&](std::size_t r) {
    Rng rng(derive_seed(s.run.seed, {r}));
    const auto stats = qes::simulate(obj.topology(), values, rng);
    for (const auto &u : stats) {
      rate[r].push_back(u.rate);
      fid[r].push_back(u.mean_fidelity);
      util[r].push_back(qes::user_utility(u));
    }
  });
  const auto names = obj.objective_names();
  const auto r = mean_and_error(rate), f = mean_and_error(fid), u = mean_and_error(util);
  if (!json) {
    print_csv(names, {{"rate", r}, {"fidelity", f}, {"utility", u}});
    return kOk;
  }
  Json users = Json::array();
  for (std::size_t k = 0; k < names.size(); ++k) {
    users.push_back({{"name", names[k]}, {"rate", r[k]}, {"fidelity", f[k]}, {"utility", u[k]}});
  }
  Json doc = {{"seed", s.run.seed}, {"runs", runs}, {"alpha", values}, {"users", users}};
  std::cout << doc.dump(2) << '\n';
  return kOk;
}

int simulate_cd(const Study &s, const std::vector<double> &values, std::size_t runs,
                bool json) {
  if (s.use_case != UseCase::cd) throw ConfigError("config is not a cd study");
  const auto point = point_from(s, values);
  std::vector<std::vector<double>> vn(runs);
  parallel_for(runs, s.run.workers, [&](std::size_t r) {
    vn[r] = s.objective->run(point, derive_seed(s.run.seed, {r}));
    double total = 0.0;
    for (double v : vn[r]) total += v;
    vn[r].push_back(total);
  });
  auto names = s.objective->objective_names();
  names.push_back("aggregate");
  const auto stats = mean_and_error(vn);
  if (!json) {
    print_csv(names, {{"virtual_neighbors", stats}});
    return kOk;
  }
  Json users = Json::array();
  for (std::size_t k = 0; k < names.size(); ++k) {
    users.push_back({{"name", names[k]}, {"virtual_neighbors", stats[k]}});
  }
  Json doc = {{"seed", s.run.seed}, {"runs", runs}, {"q_swap", values}, {"users", users}};
  std::cout << doc.dump(2) << '\n';
  return kOk;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Surrogate-assisted optimization of stochastic network simulators"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Common opt_c;
  auto *optimize = app.add_subcommand("optimize", "run the configured optimizer");
  add_common(optimize, opt_c, true);
  std::optional<std::size_t> cycles;
  optimize->add_option("--cycles", cycles, "cycle limit (overrides the config)");

  Common base_c;
  auto *baseline = app.add_subcommand("baseline", "run random search or simulated annealing");
  add_common(baseline, base_c, true);
  std::string base_method = "random";
  std::optional<std::size_t> evaluations;
  baseline->add_option("-m,--method", base_method, "random or annealing")
      ->check(CLI::IsMember({"random", "annealing"}));
  baseline->add_option("--evaluations", evaluations, "evaluation budget");

  Common conf_c;
  auto *confirm_cmd = app.add_subcommand("confirm", "re-evaluate a best configuration n_exec times");
  add_common(confirm_cmd, conf_c, true);
  std::string best_file;
  std::optional<std::size_t> n_exec;
  confirm_cmd->add_option("-b,--best", best_file, "best.json from an optimize run")->required();
  confirm_cmd->add_option("--n-exec", n_exec, "number of runs");

  Common par_c;
  auto *pareto_cmd = app.add_subcommand("pareto", "dominating set and parameter statistics");
  add_common(pareto_cmd, par_c, false);
  std::string dataset;
  pareto_cmd->add_option("-d,--dataset", dataset, "dataset.csv")->required();

  Common sim_c;
  auto *simulate = app.add_subcommand("simulate", "one-shot simulator runs");
  simulate->require_subcommand(1);
  std::string values;
  std::size_t runs = 1;
  bool as_json = false;
  CLI::App *sim_qes = simulate->add_subcommand("qes", "entanglement switch");
  CLI::App *sim_cd = simulate->add_subcommand("cd", "continuous distribution");
  for (auto *cmd : {sim_qes, sim_cd}) {
    add_common(cmd, sim_c, false);
    cmd->add_option("-v,--values", values, "comma-separated parameter values in space order")
        ->required();
    cmd->add_option("-n,--runs", runs, "independent runs")->check(CLI::PositiveNumber);
    cmd->add_flag("--json", as_json, "JSON instead of CSV");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUserError;
  }

  try {
    if (*optimize || *baseline) {
      const Common &c = *optimize ? opt_c : base_c;
      Study s = study_for(c);
      if (*optimize && cycles) s.run.limit = CycleLimit{*cycles};
      if (*baseline) {
        s.method = *parse_method(base_method);
        if (evaluations) s.baseline.budget = EvaluationBudget{*evaluations};
      }
      const auto dir = out_dir(c, s);
      const auto result = cmd_optimize(s, dir, c.quiet ? nullptr : &std::cerr);
      const auto &best = result.best_record();
      std::cout << "best aggregate " << format_number(best.aggregate()) << " at "
                << describe(*s.space, best.config) << "\n"
                << "wrote " << result.records.size() << " records to "
                << (dir / "dataset.csv").string() << '\n';
      return kOk;
    }
    if (*confirm_cmd) {
      Study s = study_for(conf_c);
      if (n_exec) s.n_exec = *n_exec;
      const auto dir = out_dir(conf_c, s);
      const auto stats = cmd_confirm(s, best_file, dir);
      for (std::size_t k = 0; k < stats.names.size(); ++k) {
        std::cout << stats.names[k] << ": " << format_number(stats.mean[k]) << " +- "
                  << format_number(stats.standard_error[k]) << '\n';
      }
      std::cout << "aggregate: " << format_number(stats.aggregate_mean) << " +- "
                << format_number(stats.aggregate_standard_error) << " (" << stats.runs
                << " runs)\n";
      return kOk;
    }
    if (*pareto_cmd) {
      std::optional<Study> s;
      if (!par_c.config.empty()) s = study_for(par_c);
      const fs::path dir = !par_c.out.empty() ? fs::path(par_c.out)
                                              : fs::path(dataset).parent_path();
      const auto report = cmd_pareto(dataset, s ? s->space.get() : nullptr, dir);
      std::cout << report.dominating_indices.size() << " of " << report.record_count
                << " records dominating (fraction "
                << format_number(report.dominating_fraction()) << ")\n";
      for (const auto &p : report.params) {
        std::cout << p.name << ": median " << format_number(p.median) << ", 95% ["
                  << format_number(p.p2_5) << ", " << format_number(p.p97_5) << "], std "
                  << format_number(p.std)
                  << (p.closer_to_uniform() ? ", closer to uniform" : "") << '\n';
      }
      return kOk;
    }
    if (*simulate) {
      const bool is_qes = sim_qes->parsed();
      Study s = study_for(sim_c, is_qes ? "qes" : "cd");
      const auto v = parse_values(values);
      return is_qes ? simulate_qes(s, v, runs, as_json) : simulate_cd(s, v, runs, as_json);
    }
  } catch (const ConfigError &e) {
    std::cerr << "qnopt: " << e.what() << '\n';
    return kUserError;
  } catch (const ParseError &e) {
    std::cerr << "qnopt: parse error: " << e.what() << '\n';
    return kUserError;
  } catch (const EmptyReportError &e) {
    std::cerr << "qnopt: " << e.what() << '\n';
    return kUserError;
  } catch (const DomainError &e) {
    std::cerr << "qnopt: " << e.what() << '\n';
    return kUserError;
  } catch (const DimensionError &e) {
    std::cerr << "qnopt: " << e.what() << '\n';
    return kUserError;
  } catch (const EvaluationError &e) {
    std::cerr << "qnopt: evaluation failed for " << e.config() << " (run "
              << e.run_index() << "): " << e.what() << '\n';
    return kRuntimeError;
  } catch (const ExternalObjectiveError &e) {
    std::cerr << "qnopt: " << e.what() << '\n';
    if (!e.diagnostics().empty()) std::cerr << e.diagnostics() << '\n';
    return kRuntimeError;
  } catch (const std::exception &e) {
    std::cerr << "qnopt: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kOk;
}
