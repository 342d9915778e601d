#include "qnopt/param_space.hpp"

#include <charconv>
#include <cmath>
#include <set>

#include "qnopt/errors.hpp"

namespace qnopt {

const char *to_string(ParamKind kind) noexcept {
  switch (kind) {
  case ParamKind::continuous:
    return "continuous";
  case ParamKind::integer:
    return "integer";
  case ParamKind::ordinal:
    return "ordinal";
  case ParamKind::categorical:
    return "categorical";
  }
  return "unknown";
}

std::optional<ParamKind> parse_param_kind(const std::string &text) {
  if (text == "continuous") return ParamKind::continuous;
  if (text == "integer") return ParamKind::integer;
  if (text == "ordinal") return ParamKind::ordinal;
  if (text == "categorical") return ParamKind::categorical;
  return std::nullopt;
}

std::string format_value(const ParamValue &value) {
  if (const auto *label = std::get_if<std::string>(&value)) {
    return *label;
  }
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, std::get<double>(value));
  return std::string(buf, res.ptr);
}

ParamSpec::ParamSpec(std::string name, ParamKind kind, double min, double max,
                     std::vector<std::string> values)
    : name_(std::move(name)), kind_(kind), min_(min), max_(max),
      values_(std::move(values)) {
  if (name_.empty()) {
    throw DomainError("parameter name must not be empty");
  }
  if (is_numeric()) {
    if (!std::isfinite(min_) || !std::isfinite(max_) || !(min_ < max_)) {
      throw DomainError("parameter '" + name_ +
                        "': bounds must be finite with min < max");
    }
    if (kind_ == ParamKind::integer && integer_low() > integer_high()) {
      throw DomainError("parameter '" + name_ +
                        "': integer bounds contain no integer");
    }
  } else {
    if (values_.empty()) {
      throw DomainError("parameter '" + name_ + "': value list is empty");
    }
    std::set<std::string> seen(values_.begin(), values_.end());
    if (seen.size() != values_.size()) {
      throw DomainError("parameter '" + name_ + "': duplicate values");
    }
  }
}

ParamSpec ParamSpec::continuous(std::string name, double min, double max) {
  return ParamSpec(std::move(name), ParamKind::continuous, min, max, {});
}

ParamSpec ParamSpec::integer(std::string name, double min, double max) {
  return ParamSpec(std::move(name), ParamKind::integer, min, max, {});
}

ParamSpec ParamSpec::ordinal(std::string name, std::vector<std::string> values) {
  return ParamSpec(std::move(name), ParamKind::ordinal, 0.0, 0.0,
                   std::move(values));
}

ParamSpec ParamSpec::categorical(std::string name,
                                 std::vector<std::string> values) {
  return ParamSpec(std::move(name), ParamKind::categorical, 0.0, 0.0,
                   std::move(values));
}

long long ParamSpec::integer_low() const {
  return static_cast<long long>(std::ceil(min_));
}

long long ParamSpec::integer_high() const {
  return static_cast<long long>(std::floor(max_));
}

std::optional<std::size_t> ParamSpec::index_of(const std::string &label) const {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i] == label) {
      return i;
    }
  }
  return std::nullopt;
}

SearchSpace::SearchSpace(std::vector<ParamSpec> params,
                         std::map<std::string, ParamValue> fixed)
    : params_(std::move(params)), fixed_(std::move(fixed)) {
  if (params_.empty()) {
    throw DomainError("search space needs at least one configurable parameter");
  }
  std::set<std::string> names;
  for (const auto &p : params_) {
    if (!names.insert(p.name()).second) {
      throw DomainError("duplicate parameter name '" + p.name() + "'");
    }
    encoded_size_ += p.encoded_width();
  }
  for (const auto &[name, value] : fixed_) {
    if (!names.insert(name).second) {
      throw DomainError("fixed parameter '" + name +
                        "' collides with a configurable parameter");
    }
  }
}

std::optional<std::size_t> SearchSpace::index_of(const std::string &name) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name() == name) {
      return i;
    }
  }
  return std::nullopt;
}

ConfigPoint sample_uniform(const SearchSpace &space, Rng &rng) {
  ConfigPoint point;
  point.values.reserve(space.size());
  for (const auto &p : space.params()) {
    switch (p.kind()) {
    case ParamKind::continuous: {
      std::uniform_real_distribution<double> dist(p.min(), p.max());
      point.values.emplace_back(dist(rng));
      break;
    }
    case ParamKind::integer: {
      std::uniform_int_distribution<long long> dist(p.integer_low(),
                                                    p.integer_high());
      point.values.emplace_back(static_cast<double>(dist(rng)));
      break;
    }
    case ParamKind::ordinal:
    case ParamKind::categorical: {
      std::uniform_int_distribution<std::size_t> dist(0, p.values().size() - 1);
      point.values.emplace_back(p.values()[dist(rng)]);
      break;
    }
    }
  }
  return point;
}

namespace {

std::optional<Violation> check_value(const ParamSpec &p, std::size_t index,
                                     const ParamValue &value) {
  if (p.is_numeric()) {
    const auto *x = std::get_if<double>(&value);
    if (x == nullptr) {
      return Violation{Violation::Kind::wrong_type, index,
                       "'" + p.name() + "' expects a number"};
    }
    if (!std::isfinite(*x) || *x < p.min() || *x > p.max()) {
      return Violation{Violation::Kind::out_of_bounds, index,
                       "'" + p.name() + "' = " + format_value(value) +
                           " outside [" + format_value(p.min()) + ", " +
                           format_value(p.max()) + "]"};
    }
    if (p.kind() == ParamKind::integer && std::floor(*x) != *x) {
      return Violation{Violation::Kind::non_integral, index,
                       "'" + p.name() + "' = " + format_value(value) +
                           " is not an integer"};
    }
    return std::nullopt;
  }
  const auto *label = std::get_if<std::string>(&value);
  if (label == nullptr) {
    return Violation{Violation::Kind::wrong_type, index,
                     "'" + p.name() + "' expects a label"};
  }
  if (!p.index_of(*label)) {
    return Violation{Violation::Kind::non_member, index,
                     "'" + p.name() + "' = '" + *label +
                         "' is not in the value set"};
  }
  return std::nullopt;
}

} // namespace

std::vector<Violation> validate(const SearchSpace &space,
                                const ConfigPoint &point) {
  std::vector<Violation> out;
  if (point.values.size() != space.size()) {
    out.push_back({Violation::Kind::arity, 0,
                   "expected " + std::to_string(space.size()) +
                       " values, got " + std::to_string(point.values.size())});
  }
  const std::size_t n = std::min(point.values.size(), space.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (auto v = check_value(space.params()[i], i, point.values[i])) {
      out.push_back(std::move(*v));
    }
  }
  return out;
}

std::vector<double> encode(const SearchSpace &space, const ConfigPoint &point) {
  if (auto violations = validate(space, point); !violations.empty()) {
    throw DomainError("cannot encode invalid configuration: " +
                      violations.front().message);
  }
  std::vector<double> features;
  features.reserve(space.encoded_size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto &p = space.params()[i];
    const auto &value = point.values[i];
    switch (p.kind()) {
    case ParamKind::continuous:
    case ParamKind::integer:
      features.push_back(std::get<double>(value));
      break;
    case ParamKind::ordinal:
      features.push_back(
          static_cast<double>(*p.index_of(std::get<std::string>(value))));
      break;
    case ParamKind::categorical: {
      const auto hot = *p.index_of(std::get<std::string>(value));
      for (std::size_t k = 0; k < p.values().size(); ++k) {
        features.push_back(k == hot ? 1.0 : 0.0);
      }
      break;
    }
    }
  }
  return features;
}

std::string describe(const SearchSpace &space, const ConfigPoint &point) {
  std::string out;
  for (std::size_t i = 0; i < point.values.size(); ++i) {
    if (i > 0) {
      out += ", ";
    }
    out += i < space.size() ? space.params()[i].name() : "?";
    out += '=';
    out += format_value(point.values[i]);
  }
  return out;
}

double numeric_value(const ParamSpec &spec, const ParamValue &value) {
  if (spec.is_numeric()) {
    return std::get<double>(value);
  }
  const auto idx = spec.index_of(std::get<std::string>(value));
  if (!idx) {
    throw DomainError("'" + spec.name() + "': label not in value set");
  }
  return static_cast<double>(*idx);
}

} // namespace qnopt
