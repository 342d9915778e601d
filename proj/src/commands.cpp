#include "qnopt/commands.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "qnopt/baselines.hpp"
#include "qnopt/errors.hpp"
#include "qnopt/io.hpp"

namespace qnopt {

using Json = nlohmann::ordered_json;

Json run_metadata(const Study &study) {
  Json config = study.config;
  config["study"]["seed"] = study.run.seed;
  Json m = Json::object();
  m["format"] = "qnopt-run";
  m["version"] = 1;
  m["qnopt_version"] = kVersion;
  m["seed"] = study.run.seed;
  m["settings"] = settings_to_json(study);
  m["space"] = space_to_json(*study.space);
  m["objectives"] = study.objective->objective_names();
  m["config"] = std::move(config);
  m["config_dir"] = study.base_dir.empty()
                        ? std::string()
                        : std::filesystem::absolute(study.base_dir).string();
  return m;
}

namespace {

Json profile_json(const TimingProfile &p) {
  Json seconds = {{"simulation", p.simulation},
                  {"training", p.training},
                  {"acquisition", p.acquisition},
                  {"remaining", p.remaining},
                  {"total", p.total()}};
  Json fractions = {{"simulation", p.fraction(p.simulation)},
                    {"training", p.fraction(p.training)},
                    {"acquisition", p.fraction(p.acquisition)},
                    {"remaining", p.fraction(p.remaining)}};
  return {{"seconds", seconds},
          {"fractions", fractions},
          {"cycles_completed", p.cycles_completed}};
}

std::string optional_number(const std::optional<double> &v) {
  return v ? format_number(*v) : std::string();
}

} // namespace

OptimizationResult cmd_optimize(const Study &study,
                                const std::filesystem::path &out_dir,
                                std::ostream *progress) {
  std::filesystem::create_directories(out_dir);
  const Json meta = run_metadata(study);
  const auto names = study.objective->objective_names();
  DatasetCsvWriter csv(out_dir / "dataset.csv", meta, *study.space, names);

  OptimizationResult result;
  switch (study.method) {
  case Method::surrogate:
    result = run(*study.space, *study.objective, study.run,
                 [&](const CycleLog &log, const std::vector<EvalRecord> &records) {
                   csv.sync(records);
                   if (progress != nullptr) {
                     *progress << "cycle " << log.cycle << ": " << log.dataset_size
                               << " records, best " << format_number(log.best_aggregate);
                     if (!log.model_kind.empty()) *progress << ", model " << log.model_kind;
                     *progress << '\n';
                   }
                 });
    break;
  case Method::random:
    result = random_search(*study.space, *study.objective, study.baseline);
    break;
  case Method::annealing:
    result = simulated_annealing(*study.space, *study.objective, study.baseline,
                                 study.annealing);
    break;
  }
  csv.sync(result.records);

  Json full = meta;
  full["workers"] = study.run.workers;
  full["truncated"] = result.truncated;
  full["records"] = result.records.size();
  write_json(out_dir / "metadata.json", full);

  Json dataset = Json::object();
  dataset["metadata"] = meta;
  dataset["records"] = records_to_json(*study.space, names, result.records);
  write_json(out_dir / "dataset.json", dataset);

  Json prof = profile_json(result.profile);
  prof["seed"] = study.run.seed;
  prof["settings"] = meta["settings"];
  write_json(out_dir / "profile.json", prof);
  {
    const auto &p = result.profile;
    std::ostringstream os;
    os << "# " << meta.dump() << '\n' << "phase,seconds,fraction\n";
    for (auto [name, v] : {std::pair{"simulation", p.simulation},
                           {"training", p.training},
                           {"acquisition", p.acquisition},
                           {"remaining", p.remaining}}) {
      os << name << ',' << format_number(v) << ',' << format_number(p.fraction(v))
         << '\n';
    }
    write_text(out_dir / "profile.csv", os.str());
  }
  {
    std::ostringstream os;
    os << "# " << meta.dump() << '\n'
       << "cycle,dataset_size,best_aggregate,rf_mae,svr_mae,model\n";
    for (const auto &l : result.log) {
      os << l.cycle << ',' << l.dataset_size << ',' << format_number(l.best_aggregate)
         << ',' << optional_number(l.rf_mae) << ',' << optional_number(l.svr_mae) << ','
         << l.model_kind << '\n';
    }
    write_text(out_dir / "cycles.csv", os.str());
  }
  if (!result.records.empty()) {
    const auto &b = result.best_record();
    Json best = Json::object();
    best["seed"] = study.run.seed;
    best["settings"] = meta["settings"];
    best["index"] = result.best;
    best["cycle"] = b.cycle;
    best["config"] = config_to_json(*study.space, b.config);
    Json u = Json::object();
    for (std::size_t k = 0; k < names.size(); ++k) u[names[k]] = b.mean_utilities[k];
    best["mean_utilities"] = std::move(u);
    best["aggregate"] = b.aggregate();
    best["sample_count"] = b.sample_count;
    write_json(out_dir / "best.json", best);
  }
  return result;
}

ConfirmStats confirm(const Study &study, const ConfigPoint &config) {
  const std::size_t n = study.n_exec;
  if (n < 2) throw DomainError("confirmation needs at least 2 runs");
  const auto rec = evaluate(*study.objective, *study.space, config, n,
                            derive_seed(study.run.seed, {0xc0f1a3ULL}),
                            study.run.workers, true);
  const std::size_t m = rec.mean_utilities.size();
  ConfirmStats s;
  s.names = study.objective->objective_names();
  s.runs = n;
  s.mean = rec.mean_utilities;
  s.standard_error.assign(m, 0.0);
  std::vector<double> agg(n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t k = 0; k < m; ++k) agg[r] += rec.raw_samples[r * m + k];
  }
  auto se = [n](auto value_at, double mean) {
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double d = value_at(r) - mean;
      ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
  };
  for (std::size_t k = 0; k < m; ++k) {
    s.standard_error[k] =
        se([&](std::size_t r) { return rec.raw_samples[r * m + k]; }, s.mean[k]);
  }
  s.aggregate_mean = 0.0;
  for (double a : agg) s.aggregate_mean += a;
  s.aggregate_mean /= static_cast<double>(n);
  s.aggregate_standard_error = se([&](std::size_t r) { return agg[r]; }, s.aggregate_mean);
  return s;
}

ConfirmStats cmd_confirm(const Study &study, const std::filesystem::path &best_file,
                         const std::filesystem::path &out_dir) {
  if (!std::filesystem::exists(best_file)) {
    throw ConfigError("best-config file '" + best_file.string() + "' not found");
  }
  const Json best = read_json(best_file);
  if (!best.contains("config")) {
    throw ConfigError("'" + best_file.string() + "' has no \"config\" object");
  }
  const ConfigPoint config = config_from_json(*study.space, best.at("config"));
  const auto stats = confirm(study, config);

  std::filesystem::create_directories(out_dir);
  Json doc = Json::object();
  doc["seed"] = study.run.seed;
  doc["settings"] = settings_to_json(study);
  doc["config"] = config_to_json(*study.space, config);
  doc["runs"] = stats.runs;
  Json per = Json::array();
  for (std::size_t k = 0; k < stats.names.size(); ++k) {
    per.push_back({{"name", stats.names[k]},
                   {"mean", stats.mean[k]},
                   {"standard_error", stats.standard_error[k]}});
  }
  doc["objectives"] = std::move(per);
  doc["aggregate"] = {{"mean", stats.aggregate_mean},
                      {"standard_error", stats.aggregate_standard_error}};
  write_json(out_dir / "confirm.json", doc);
  return stats;
}

pareto::ParetoReport cmd_pareto(const std::filesystem::path &dataset,
                                const SearchSpace *space,
                                const std::filesystem::path &out_dir) {
  const auto table = read_csv_table(dataset);
  std::optional<SearchSpace> from_meta;
  if (space == nullptr) {
    if (!table.metadata.is_object() || !table.metadata.contains("space")) {
      throw ConfigError("dataset has no metadata line; pass the study config");
    }
    from_meta = space_from_json(table.metadata.at("space"));
    space = &*from_meta;
  }
  const auto data = interpret_dataset(table, *space);
  if (data.configs.empty()) throw EmptyReportError("dataset has no rows");
  const auto report = pareto::summarize(data.objectives, data.configs, *space);

  std::filesystem::create_directories(out_dir);
  {
    std::ostringstream os;
    os << "parameter,median,p2.5,p97.5,std,ks_uniform,ks_normal,closer_to_uniform\n";
    for (const auto &p : report.params) {
      os << p.name << ',' << format_number(p.median) << ',' << format_number(p.p2_5)
         << ',' << format_number(p.p97_5) << ',' << format_number(p.std) << ','
         << optional_number(p.ks_uniform) << ',' << optional_number(p.ks_normal) << ','
         << (p.closer_to_uniform() ? "true" : "false") << '\n';
    }
    write_text(out_dir / "pareto_report.csv", os.str());
  }
  Json doc = Json::object();
  if (table.metadata.is_object()) {
    doc["seed"] = table.metadata.value("seed", Json());
    doc["settings"] = table.metadata.value("settings", Json());
  }
  doc["dataset"] = dataset.string();
  doc["record_count"] = report.record_count;
  doc["dominating_indices"] = report.dominating_indices;
  doc["dominating_fraction"] = report.dominating_fraction();
  doc["ks_normal_reference"] = "sample mean and n-1 standard deviation";
  doc["percentile_method"] = "linear interpolation between order statistics";
  Json params = Json::array();
  for (const auto &p : report.params) {
    params.push_back({{"name", p.name},
                      {"median", p.median},
                      {"p2_5", p.p2_5},
                      {"p97_5", p.p97_5},
                      {"std", p.std},
                      {"ks_uniform", p.ks_uniform ? Json(*p.ks_uniform) : Json()},
                      {"ks_normal", p.ks_normal ? Json(*p.ks_normal) : Json()},
                      {"closer_to_uniform", p.closer_to_uniform()}});
  }
  doc["parameters"] = std::move(params);
  write_json(out_dir / "pareto_summary.json", doc);
  return report;
}

} // namespace qnopt
