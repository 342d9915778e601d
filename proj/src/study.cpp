#include "qnopt/study.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "qnopt/cd.hpp"
#include "qnopt/config.hpp"
#include "qnopt/errors.hpp"
#include "qnopt/external.hpp"
#include "qnopt/memalloc.hpp"
#include "qnopt/parallel.hpp"
#include "qnopt/qes.hpp"
#include "qnopt/synthetic.hpp"

namespace qnopt {

using Json = nlohmann::ordered_json;

const char *to_string(UseCase u) noexcept {
  switch (u) {
  case UseCase::synthetic: return "synthetic";
  case UseCase::qes: return "qes";
  case UseCase::cd: return "cd";
  case UseCase::memalloc: return "memalloc";
  case UseCase::external: return "external";
  }
  return "?";
}

const char *to_string(Method m) noexcept {
  switch (m) {
  case Method::surrogate: return "surrogate";
  case Method::random: return "random";
  case Method::annealing: return "annealing";
  }
  return "?";
}

std::optional<Method> parse_method(const std::string &text) {
  for (auto m : {Method::surrogate, Method::random, Method::annealing}) {
    if (text == to_string(m)) return m;
  }
  return std::nullopt;
}

namespace {

// Typed access to one config table; leftover keys are reported as typos.
class Table {
public:
  Table(const Json *doc, std::string path) : doc_(doc), path_(std::move(path)) {
    if (doc_ != nullptr && !doc_->is_object()) {
      throw ConfigError("[" + path_ + "] must be a table");
    }
  }

  static Table child(const Json &root, const std::string &key) {
    if (auto it = root.find(key); it != root.end()) return Table(&*it, key);
    return Table(nullptr, key);
  }

  [[nodiscard]] bool present() const { return doc_ != nullptr; }

  [[nodiscard]] bool has(const std::string &key) const {
    return doc_ != nullptr && doc_->contains(key);
  }

  const Json *raw(const std::string &key) {
    used_.insert(key);
    if (doc_ == nullptr) return nullptr;
    auto it = doc_->find(key);
    return it == doc_->end() ? nullptr : &*it;
  }

  Table table(const std::string &key) {
    const Json *v = raw(key);
    return Table(v, path_ + "." + key);
  }

  double number(const std::string &key, double fallback) {
    const Json *v = raw(key);
    if (v == nullptr) return fallback;
    if (!v->is_number()) type_error(key, "a number");
    return v->get<double>();
  }

  std::optional<double> maybe_number(const std::string &key) {
    if (!has(key)) {
      used_.insert(key);
      return std::nullopt;
    }
    return number(key, 0.0);
  }

  std::size_t count(const std::string &key, std::size_t fallback) {
    const Json *v = raw(key);
    if (v == nullptr) return fallback;
    if (!v->is_number_integer() || v->get<long long>() < 0) {
      type_error(key, "a non-negative integer");
    }
    return v->get<std::size_t>();
  }

  std::uint64_t seed(const std::string &key, std::uint64_t fallback) {
    const Json *v = raw(key);
    if (v == nullptr) return fallback;
    if (!v->is_number_integer() || v->get<long long>() < 0) {
      type_error(key, "a non-negative integer");
    }
    return v->get<std::uint64_t>();
  }

  bool boolean(const std::string &key, bool fallback) {
    const Json *v = raw(key);
    if (v == nullptr) return fallback;
    if (!v->is_boolean()) type_error(key, "true or false");
    return v->get<bool>();
  }

  std::string text(const std::string &key, const std::string &fallback) {
    const Json *v = raw(key);
    if (v == nullptr) return fallback;
    if (!v->is_string()) type_error(key, "a string");
    return v->get<std::string>();
  }

  std::string required_text(const std::string &key) {
    if (!has(key)) throw ConfigError(where(key) + " is required");
    return text(key, {});
  }

  std::vector<double> numbers(const std::string &key, std::vector<double> fallback) {
    const Json *v = raw(key);
    if (v == nullptr) return fallback;
    if (!v->is_array()) type_error(key, "an array of numbers");
    std::vector<double> out;
    for (const auto &e : *v) {
      if (!e.is_number()) type_error(key, "an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<std::size_t> indices(const std::string &key,
                                   std::vector<std::size_t> fallback) {
    const Json *v = raw(key);
    if (v == nullptr) return fallback;
    return index_list(*v, key);
  }

  std::vector<std::string> texts(const std::string &key,
                                 std::vector<std::string> fallback) {
    const Json *v = raw(key);
    if (v == nullptr) return fallback;
    if (!v->is_array()) type_error(key, "an array of strings");
    std::vector<std::string> out;
    for (const auto &e : *v) {
      if (!e.is_string()) type_error(key, "an array of strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  std::vector<std::size_t> index_list(const Json &v, const std::string &key) const {
    if (!v.is_array()) type_error(key, "an array of node indices");
    std::vector<std::size_t> out;
    for (const auto &e : v) {
      if (!e.is_number_integer() || e.get<long long>() < 0) {
        type_error(key, "an array of node indices");
      }
      out.push_back(e.get<std::size_t>());
    }
    return out;
  }

  // Rejects keys nobody asked for.
  void finish() const {
    if (doc_ == nullptr) return;
    for (const auto &[k, v] : doc_->items()) {
      if (!used_.count(k)) throw ConfigError("unknown setting " + where(k));
    }
  }

  [[nodiscard]] std::string where(const std::string &key) const {
    return "'" + path_ + "." + key + "'";
  }

  [[noreturn]] void type_error(const std::string &key, const std::string &want) const {
    throw ConfigError(where(key) + " must be " + want);
  }

private:
  const Json *doc_;
  std::string path_;
  std::set<std::string> used_;
};

ParamValue fixed_value(const Json &v, const std::string &name) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? 1.0 : 0.0;
  throw ConfigError("fixed parameter '" + name + "' must be a number or string");
}

std::filesystem::path resolve(const std::filesystem::path &base,
                              const std::string &file) {
  std::filesystem::path p(file);
  if (p.is_relative() && !base.empty()) p = base / p;
  if (!std::filesystem::exists(p)) {
    throw ConfigError("file '" + p.string() + "' does not exist");
  }
  return p;
}

void read_models(Table &opt, ModelSettings &models) {
  Table rf = opt.table("rf");
  models.rf.n_trees = rf.count("n_trees", models.rf.n_trees);
  models.rf.max_depth = rf.count("max_depth", models.rf.max_depth);
  models.rf.min_samples_split =
      rf.count("min_samples_split", models.rf.min_samples_split);
  models.rf.max_features = rf.count("max_features", models.rf.max_features);
  models.rf.bootstrap = rf.boolean("bootstrap", models.rf.bootstrap);
  rf.finish();

  Table svr = opt.table("svr");
  models.svr.C = svr.number("C", models.svr.C);
  models.svr.epsilon = svr.number("epsilon", models.svr.epsilon);
  if (auto g = svr.maybe_number("gamma")) models.svr.gamma = *g;
  models.svr.tolerance = svr.number("tolerance", models.svr.tolerance);
  models.svr.max_iterations = svr.count("max_iterations", models.svr.max_iterations);
  svr.finish();
}

void build_synthetic(Study &s, Table &t, const Json &root) {
  SyntheticSettings cfg;
  const auto name = t.text("function", "sphere");
  const auto f = parse_synthetic_function(name);
  if (!f) throw ConfigError("unknown synthetic function '" + name + "'");
  cfg.function = *f;
  cfg.noise = t.number("noise", 0.0);
  cfg.value = t.number("value", 0.0);
  cfg.sleep_ms = t.number("sleep_ms", cfg.sleep_ms);
  cfg.objectives = t.count("objectives", 1);
  const bool rosen = cfg.function == SyntheticFunction::rosenbrock;
  const bool sphere = cfg.function == SyntheticFunction::sphere;
  const double lo = t.number("lower", rosen ? -2.0 : sphere ? -5.0 : 0.0);
  const double hi = t.number("upper", rosen ? 2.0 : sphere ? 5.0 : 1.0);
  const std::size_t dim = t.count("dim", rosen ? 10 : sphere ? 5 : 1);
  s.objective = std::make_shared<SyntheticObjective>(cfg);
  if (!root.contains("space")) {
    s.space = std::make_shared<SearchSpace>(box_space(dim, lo, hi));
  }
}

void build_qes(Study &s, Table &t) {
  qes::Topology topo;
  topo.link_lengths = t.numbers("link_lengths", {2.0, 2.0, 2.0});
  topo.server_index = t.count("server_index", topo.server_index);
  topo.buffer_size = t.count("buffer_size", topo.buffer_size);
  topo.attempt_period = t.number("attempt_period", topo.attempt_period);
  topo.attenuation = t.number("attenuation", topo.attenuation);
  topo.sim_time = t.number("sim_time", topo.sim_time);
  qes::UtilitySettings utility;
  utility.floor = t.number("utility_floor", utility.floor);
  const auto base = t.text("log", "natural");
  if (base != "natural" && base != "log10") {
    throw ConfigError(t.where("log") + " must be \"natural\" or \"log10\"");
  }
  utility.natural_log = base == "natural";
  const double lo = t.number("alpha_min", 0.001);
  const double hi = t.number("alpha_max", 0.5);
  if (lo < 0.0 || hi > 0.5) {
    throw ConfigError("bright-state population bounds must lie in [0, 0.5]");
  }
  auto obj = std::make_shared<qes::QesObjective>(topo, utility);
  std::vector<ParamSpec> params;
  for (std::size_t i = 0; i < topo.node_count(); ++i) {
    const std::string name = i == topo.server_index
                                 ? "alpha_server"
                                 : "alpha_user" + std::to_string(i);
    params.push_back(ParamSpec::continuous(name, lo, hi));
  }
  s.space = std::make_shared<SearchSpace>(std::move(params));
  s.objective = std::move(obj);
}

void build_cd(Study &s, Table &t, const std::filesystem::path &base) {
  cd::Network net;
  const auto topology = t.text("topology", "path3");
  if (topology == "path3") {
    net.graph = cd::path3();
    net.users = {0, 1, 2};
  } else if (topology == "tree20" || topology == "tree100") {
    net.graph = topology == "tree20" ? cd::tree20() : cd::tree100();
    net.users = net.graph.leaves();
  } else if (topology == "edge_list") {
    const auto file = resolve(base, t.required_text("edge_list"));
    std::ifstream in(file);
    net.graph = cd::read_edge_list(in);
    net.users = net.graph.leaves();
  } else {
    throw ConfigError("unknown cd topology '" + topology + "'");
  }
  if (topology != "edge_list") t.raw("edge_list");
  net.users = t.indices("users", net.users);
  net.r = t.count("r", net.r);
  net.max_hops = t.count("max_hops", net.max_hops);
  net.cutoff = t.count("cutoff", net.cutoff);
  net.p_gen = t.number("p_gen", net.p_gen);
  net.p_cons = t.number("p_cons", net.p_gen / 4.0);
  net.sim_slots = t.count("sim_slots", net.sim_slots);
  std::vector<std::vector<std::size_t>> groups;
  if (const Json *g = t.raw("groups")) {
    if (!g->is_array()) t.type_error("groups", "an array of node-index arrays");
    for (const auto &e : *g) groups.push_back(t.index_list(e, "groups"));
  }
  const double lo = t.number("q_min", 0.0);
  const double hi = t.number("q_max", 1.0);
  if (lo < 0.0 || hi > 1.0) throw ConfigError("swap probability bounds must lie in [0, 1]");
  auto obj = std::make_shared<cd::CdObjective>(std::move(net), std::move(groups));
  std::vector<ParamSpec> params;
  for (const auto &g : obj->groups()) {
    std::string name = "q_swap";
    for (auto v : g) name += "_" + std::to_string(v);
    params.push_back(ParamSpec::continuous(name, lo, hi));
  }
  s.space = std::make_shared<SearchSpace>(std::move(params));
  s.objective = std::move(obj);
}

void build_memalloc(Study &s, Table &t) {
  memalloc::AllocationProblem problem;
  problem.budget = t.number("budget", problem.budget);
  const double scale = t.number("scale", 2.0);
  auto model = std::make_shared<memalloc::ToyRequestModel>(scale);
  problem.capacities = t.numbers(
      "capacities", std::vector<double>(model->node_count(), 128.0));
  problem.validate();
  if (problem.node_count() != model->node_count()) {
    throw ConfigError("the toy request model has " +
                      std::to_string(model->node_count()) + " nodes");
  }
  s.space = std::make_shared<SearchSpace>(
      memalloc::allocation_space(problem, model->names()));
  s.objective = std::make_shared<memalloc::AllocationObjective>(
      problem, model, model->names());
}

void build_external(Study &s, Table &t, const SearchSpace &space) {
  ExternalCommand cmd;
  cmd.argv = t.texts("command", {});
  if (cmd.argv.empty()) throw ConfigError(t.where("command") + " is required");
  cmd.timeout_seconds = t.number("timeout", cmd.timeout_seconds);
  cmd.seed_key = t.text("seed_key", "");
  const auto names = t.texts("names", {});
  const std::size_t count = t.count("objectives", names.empty() ? 1 : names.size());
  s.objective = std::make_shared<ExternalObjective>(cmd, space, count, names);
}

} // namespace

Json space_to_json(const SearchSpace &space) {
  Json params = Json::array();
  for (const auto &p : space.params()) {
    Json e = Json::object();
    e["name"] = p.name();
    e["kind"] = to_string(p.kind());
    if (p.is_numeric()) {
      e["min"] = p.min();
      e["max"] = p.max();
    } else {
      e["values"] = p.values();
    }
    params.push_back(std::move(e));
  }
  Json fixed = Json::object();
  for (const auto &[k, v] : space.fixed()) {
    if (const auto *d = std::get_if<double>(&v)) {
      fixed[k] = *d;
    } else {
      fixed[k] = std::get<std::string>(v);
    }
  }
  Json doc = Json::object();
  doc["param"] = std::move(params);
  doc["fixed"] = std::move(fixed);
  return doc;
}

SearchSpace space_from_json(const Json &doc) {
  Table t(&doc, "space");
  const Json *list = t.raw("param");
  if (list == nullptr || !list->is_array() || list->empty()) {
    throw ConfigError("'space.param' must list at least one parameter");
  }
  std::vector<ParamSpec> params;
  for (std::size_t i = 0; i < list->size(); ++i) {
    Table p(&(*list)[i], "space.param[" + std::to_string(i) + "]");
    const auto name = p.required_text("name");
    const auto kind_text = p.text("kind", "continuous");
    const auto kind = parse_param_kind(kind_text);
    if (!kind) throw ConfigError("unknown parameter kind '" + kind_text + "'");
    try {
      if (*kind == ParamKind::continuous || *kind == ParamKind::integer) {
        if (!p.has("min") || !p.has("max")) {
          throw ConfigError("parameter '" + name + "' needs min and max");
        }
        const double lo = p.number("min", 0.0);
        const double hi = p.number("max", 0.0);
        params.push_back(*kind == ParamKind::continuous
                             ? ParamSpec::continuous(name, lo, hi)
                             : ParamSpec::integer(name, lo, hi));
      } else {
        auto values = p.texts("values", {});
        params.push_back(*kind == ParamKind::ordinal
                             ? ParamSpec::ordinal(name, std::move(values))
                             : ParamSpec::categorical(name, std::move(values)));
      }
    } catch (const DomainError &e) {
      throw ConfigError(std::string("parameter '") + name + "': " + e.what());
    }
    p.finish();
  }
  std::map<std::string, ParamValue> fixed;
  if (const Json *f = t.raw("fixed")) {
    if (!f->is_object()) throw ConfigError("'space.fixed' must be a table");
    for (const auto &[k, v] : f->items()) fixed[k] = fixed_value(v, k);
  }
  t.finish();
  try {
    return SearchSpace(std::move(params), std::move(fixed));
  } catch (const DomainError &e) {
    throw ConfigError(e.what());
  }
}

Study make_study(const Json &config, const std::filesystem::path &base_dir) {
  if (!config.is_object()) throw ConfigError("config must be a table");
  Study s;
  s.config = config;
  s.base_dir = base_dir;
  Table root(&config, "");

  Table study = root.table("study");
  const auto use_case = study.text("use_case", "synthetic");
  const auto method = study.text("method", "surrogate");
  if (auto m = parse_method(method)) {
    s.method = *m;
  } else {
    throw ConfigError("unknown method '" + method + "'");
  }
  const std::uint64_t seed = study.seed("seed", 0);
  const std::size_t workers = study.count("workers", 0);
  const std::size_t n = study.count("n", 20);
  const std::size_t raw_cap = study.count("raw_sample_cap", 1'000'000);
  s.output_dir = study.text("output", s.output_dir);
  study.finish();

  std::optional<SearchSpace> explicit_space;
  if (config.contains("space")) explicit_space = space_from_json(config.at("space"));
  root.raw("space");

  Table uc = root.table(use_case);
  for (const char *name : {"synthetic", "qes", "cd", "memalloc", "external"}) {
    if (name != use_case && root.has(name)) {
      throw ConfigError(std::string("[") + name + "] given but use_case is '" +
                        use_case + "'");
    }
  }
  try {
    if (use_case == "synthetic") {
      s.use_case = UseCase::synthetic;
      build_synthetic(s, uc, config);
    } else if (use_case == "qes") {
      s.use_case = UseCase::qes;
      build_qes(s, uc);
    } else if (use_case == "cd") {
      s.use_case = UseCase::cd;
      build_cd(s, uc, base_dir);
    } else if (use_case == "memalloc") {
      s.use_case = UseCase::memalloc;
      build_memalloc(s, uc);
    } else if (use_case == "external") {
      s.use_case = UseCase::external;
      if (!explicit_space) {
        throw ConfigError("the external use case needs [[space.param]] tables");
      }
      build_external(s, uc, *explicit_space);
    } else {
      throw ConfigError("unknown use_case '" + use_case + "'");
    }
  } catch (const DomainError &e) {
    throw ConfigError("[" + use_case + "]: " + e.what());
  } catch (const DimensionError &e) {
    throw ConfigError("[" + use_case + "]: " + e.what());
  }
  uc.finish();
  if (explicit_space) {
    if (s.use_case != UseCase::synthetic && s.use_case != UseCase::external) {
      throw ConfigError("[space] cannot be set for the " + use_case +
                        " use case; its parameters are fixed by the model");
    }
    s.space = std::make_shared<SearchSpace>(std::move(*explicit_space));
  }

  Table opt = root.table("optimizer");
  RunSettings &r = s.run;
  if (opt.has("time_limit") && opt.has("cycles")) {
    throw ConfigError("set either optimizer.cycles or optimizer.time_limit");
  }
  if (opt.has("time_limit")) {
    r.limit = WallClockLimit{opt.number("time_limit", 0.0)};
    opt.raw("cycles");
  } else {
    r.limit = CycleLimit{opt.count("cycles", 10)};
    opt.raw("time_limit");
  }
  r.l = opt.count("l", r.l);
  r.d = opt.number("d", r.d);
  r.k0 = opt.count("k0", r.k0);
  r.folds = opt.count("folds", r.folds);
  r.base_samples = opt.number("base_samples", r.base_samples);
  r.growth = opt.number("growth", r.growth);
  read_models(opt, r.models);
  opt.finish();
  r.n = n;
  r.seed = seed;
  r.raw_sample_cap = raw_cap;

  Table base = root.table("baseline");
  if (base.has("time_limit") && base.has("evaluations")) {
    throw ConfigError("set either baseline.evaluations or baseline.time_limit");
  }
  if (base.has("time_limit")) {
    s.baseline.budget = WallClockLimit{base.number("time_limit", 0.0)};
    base.raw("evaluations");
  } else {
    // Default: as many evaluations as the surrogate run would make.
    std::size_t matched = r.initial_size();
    if (const auto *c = std::get_if<CycleLimit>(&r.limit)) matched += c->cycles * r.l;
    s.baseline.budget = EvaluationBudget{base.count("evaluations", matched)};
    base.raw("time_limit");
  }
  s.annealing.initial_temperature =
      base.number("initial_temperature", s.annealing.initial_temperature);
  s.annealing.neighbor_scale = base.number("neighbor_scale", s.annealing.neighbor_scale);
  base.finish();
  s.baseline.n = n;
  s.baseline.seed = seed;
  s.baseline.raw_sample_cap = raw_cap;

  Table confirm = root.table("confirm");
  s.n_exec = confirm.count("n_exec", s.n_exec);
  confirm.finish();
  root.finish();

  set_workers(s, workers);
  try {
    r.validate();
    s.annealing.validate();
    if (s.n_exec < 2) throw DomainError("confirm.n_exec must be >= 2");
    if (const auto *b = std::get_if<EvaluationBudget>(&s.baseline.budget);
        b != nullptr && b->evaluations < 1) {
      throw DomainError("baseline.evaluations must be >= 1");
    }
    if (const auto *w = std::get_if<WallClockLimit>(&s.baseline.budget);
        w != nullptr && !(w->seconds > 0.0)) {
      throw DomainError("baseline.time_limit must be positive");
    }
  } catch (const DomainError &e) {
    throw ConfigError(e.what());
  }
  return s;
}

Study load_study(const std::filesystem::path &config_file) {
  if (config_file.extension() == ".json") {
    Json doc;
    {
      std::ifstream in(config_file, std::ios::binary);
      if (!in) throw ConfigError("cannot read '" + config_file.string() + "'");
      try {
        doc = Json::parse(in);
      } catch (const Json::parse_error &e) {
        throw ParseError(e.what(), 0);
      }
    }
    if (!doc.is_object() || !doc.contains("config")) {
      throw ConfigError("'" + config_file.string() + "' is not run metadata");
    }
    return make_study(doc.at("config"), doc.value("config_dir", std::string()));
  }
  const auto doc = load_toml(config_file);
  return make_study(doc, std::filesystem::absolute(config_file).parent_path());
}

void set_seed(Study &study, std::uint64_t seed) {
  study.run.seed = seed;
  study.baseline.seed = seed;
}

void set_workers(Study &study, std::size_t workers) {
  const std::size_t w = workers == 0 ? default_worker_count() : workers;
  study.run.workers = w;
  study.run.models.workers = w;
  study.baseline.workers = w;
}

Json settings_to_json(const Study &s) {
  Json j = Json::object();
  j["use_case"] = to_string(s.use_case);
  j["method"] = to_string(s.method);
  j["seed"] = s.run.seed;
  j["n"] = s.run.n;
  j["raw_sample_cap"] = s.run.raw_sample_cap;
  Json opt = Json::object();
  if (const auto *c = std::get_if<CycleLimit>(&s.run.limit)) {
    opt["cycles"] = c->cycles;
  } else {
    opt["time_limit"] = std::get<WallClockLimit>(s.run.limit).seconds;
  }
  opt["l"] = s.run.l;
  opt["d"] = s.run.d;
  opt["k0"] = s.run.initial_size();
  opt["folds"] = s.run.folds;
  opt["base_samples"] = s.run.base_samples;
  opt["growth"] = s.run.growth;
  const auto &rf = s.run.models.rf;
  opt["rf"] = {{"n_trees", rf.n_trees},
               {"max_depth", rf.max_depth},
               {"min_samples_split", rf.min_samples_split},
               {"max_features", rf.max_features},
               {"bootstrap", rf.bootstrap}};
  const auto &svr = s.run.models.svr;
  opt["svr"] = {{"C", svr.C},
                {"epsilon", svr.epsilon},
                {"gamma", svr.gamma ? Json(*svr.gamma) : Json("auto")},
                {"tolerance", svr.tolerance},
                {"max_iterations", svr.max_iterations}};
  j["optimizer"] = std::move(opt);
  Json base = Json::object();
  if (const auto *e = std::get_if<EvaluationBudget>(&s.baseline.budget)) {
    base["evaluations"] = e->evaluations;
  } else {
    base["time_limit"] = std::get<WallClockLimit>(s.baseline.budget).seconds;
  }
  base["initial_temperature"] = s.annealing.initial_temperature;
  base["neighbor_scale"] = s.annealing.neighbor_scale;
  j["baseline"] = std::move(base);
  j["n_exec"] = s.n_exec;
  return j;
}

} // namespace qnopt
