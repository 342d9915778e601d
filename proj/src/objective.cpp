#include "qnopt/objective.hpp"

#include "qnopt/errors.hpp"

namespace qnopt {

std::vector<std::string> Objective::objective_names() const {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < objective_count(); ++i) {
    names.push_back("U" + std::to_string(i));
  }
  return names;
}

FunctionObjective::FunctionObjective(std::size_t count, Fn fn,
                                     std::vector<std::string> names)
    : count_(count), fn_(std::move(fn)), names_(std::move(names)) {
  if (count_ == 0) {
    throw DomainError("objective must declare at least one output");
  }
  if (!names_.empty() && names_.size() != count_) {
    throw DimensionError("objective name list does not match objective count");
  }
}

std::vector<std::string> FunctionObjective::objective_names() const {
  return names_.empty() ? Objective::objective_names() : names_;
}

} // namespace qnopt
