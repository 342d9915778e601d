#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "qnopt/baselines.hpp"
#include "qnopt/objective.hpp"
#include "qnopt/optimizer.hpp"
#include "qnopt/param_space.hpp"

namespace qnopt {

enum class UseCase { synthetic, qes, cd, memalloc, external };
enum class Method { surrogate, random, annealing };

const char *to_string(UseCase u) noexcept;
const char *to_string(Method m) noexcept;
std::optional<Method> parse_method(const std::string &text);

// Everything needed to run one experiment, resolved from a config document.
struct Study {
  UseCase use_case = UseCase::synthetic;
  Method method = Method::surrogate;
  std::shared_ptr<const SearchSpace> space;
  std::shared_ptr<const Objective> objective;
  RunSettings run;
  BaselineSettings baseline;
  SaSettings annealing;
  std::size_t n_exec = 1000;
  std::string output_dir = "qnopt-out";
  nlohmann::ordered_json config; // the source document
  std::filesystem::path base_dir;  // relative paths in `config` start here
};

// Builds a study from a parsed config. Relative file paths in the config are
// resolved against `base_dir`. Unknown keys, wrong types and invalid
// settings raise ConfigError.
Study make_study(const nlohmann::ordered_json &config,
                 const std::filesystem::path &base_dir = {});

// Reads a TOML study file, or a metadata.json written by a previous run.
Study load_study(const std::filesystem::path &config_file);

// Command-line overrides. Applied after loading so the metadata records the
// values actually used.
void set_seed(Study &study, std::uint64_t seed);
void set_workers(Study &study, std::size_t workers);

// {"param": [{name, kind, min, max | values}...], "fixed": {...}}; the same
// layout as the [[space.param]] / [space.fixed] config tables.
nlohmann::ordered_json space_to_json(const SearchSpace &space);
SearchSpace space_from_json(const nlohmann::ordered_json &doc);

// Settings actually in effect, for run metadata.
nlohmann::ordered_json settings_to_json(const Study &study);

} // namespace qnopt
