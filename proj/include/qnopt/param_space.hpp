#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qnopt/random.hpp"

namespace qnopt {

enum class ParamKind { continuous, integer, ordinal, categorical };

const char *to_string(ParamKind kind) noexcept;
std::optional<ParamKind> parse_param_kind(const std::string &text);

// Numbers for continuous/integer parameters, labels for ordinal/categorical.
using ParamValue = std::variant<double, std::string>;

std::string format_value(const ParamValue &value);

class ParamSpec {
public:
  static ParamSpec continuous(std::string name, double min, double max);
  static ParamSpec integer(std::string name, double min, double max);
  static ParamSpec ordinal(std::string name, std::vector<std::string> values);
  static ParamSpec categorical(std::string name,
                               std::vector<std::string> values);

  [[nodiscard]] const std::string &name() const noexcept { return name_; }
  [[nodiscard]] ParamKind kind() const noexcept { return kind_; }
  [[nodiscard]] double min() const noexcept { return min_; }
  [[nodiscard]] double max() const noexcept { return max_; }
  [[nodiscard]] const std::vector<std::string> &values() const noexcept {
    return values_;
  }

  [[nodiscard]] bool is_numeric() const noexcept {
    return kind_ == ParamKind::continuous || kind_ == ParamKind::integer;
  }
  // Smallest and largest admissible integers of an integer parameter.
  [[nodiscard]] long long integer_low() const;
  [[nodiscard]] long long integer_high() const;

  // Position of a label in the value list of an ordinal/categorical spec.
  [[nodiscard]] std::optional<std::size_t>
  index_of(const std::string &label) const;

  // Number of real features this parameter contributes to an encoding.
  [[nodiscard]] std::size_t encoded_width() const noexcept {
    return kind_ == ParamKind::categorical ? values_.size() : 1;
  }

private:
  ParamSpec(std::string name, ParamKind kind, double min, double max,
            std::vector<std::string> values);

  std::string name_;
  ParamKind kind_;
  double min_ = 0.0;
  double max_ = 0.0;
  std::vector<std::string> values_;
};

struct ConfigPoint {
  std::vector<ParamValue> values;

  friend bool operator==(const ConfigPoint &, const ConfigPoint &) = default;
};

struct Violation {
  enum class Kind { arity, out_of_bounds, non_member, non_integral, wrong_type };

  Kind kind;
  std::size_t index; // parameter index; arity violations use 0
  std::string message;
};

class SearchSpace {
public:
  explicit SearchSpace(std::vector<ParamSpec> params,
                       std::map<std::string, ParamValue> fixed = {});

  [[nodiscard]] const std::vector<ParamSpec> &params() const noexcept {
    return params_;
  }
  [[nodiscard]] const std::map<std::string, ParamValue> &fixed() const noexcept {
    return fixed_;
  }
  [[nodiscard]] std::size_t size() const noexcept { return params_.size(); }
  [[nodiscard]] std::size_t encoded_size() const noexcept {
    return encoded_size_;
  }
  [[nodiscard]] std::optional<std::size_t>
  index_of(const std::string &name) const;

private:
  std::vector<ParamSpec> params_;
  std::map<std::string, ParamValue> fixed_;
  std::size_t encoded_size_ = 0;
};

ConfigPoint sample_uniform(const SearchSpace &space, Rng &rng);

// Throws DomainError when the point is not valid for the space.
std::vector<double> encode(const SearchSpace &space, const ConfigPoint &point);

// Every violated invariant; empty when the point is valid.
std::vector<Violation> validate(const SearchSpace &space,
                                const ConfigPoint &point);

inline bool is_valid(const SearchSpace &space, const ConfigPoint &point) {
  return validate(space, point).empty();
}

// "name=value, ..." for diagnostics.
std::string describe(const SearchSpace &space, const ConfigPoint &point);

// Numeric view of one value: raw number, or label index for ordinal and
// categorical parameters.
double numeric_value(const ParamSpec &spec, const ParamValue &value);

} // namespace qnopt
