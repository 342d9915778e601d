#include "qnopt/memalloc.hpp"

#include <cmath>
#include <queue>

#include "qnopt/errors.hpp"
#include "qnopt/random.hpp"

namespace qnopt::memalloc {

void AllocationProblem::validate() const {
  if (!(budget > 0.0)) throw DomainError("memory budget must be positive");
  if (capacities.empty()) throw DomainError("allocation problem needs nodes");
  for (double c : capacities) {
    if (!(c >= 0.0)) throw DomainError("node capacities must be non-negative");
  }
}

double penalty(std::span<const double> q, double budget) {
  double total = 0.0;
  for (double v : q) total += v;
  return std::max(0.0, total - budget);
}

double penalty(std::span<const double> q, const AllocationProblem &problem) {
  if (q.size() != problem.node_count()) {
    throw DimensionError("allocation has " + std::to_string(q.size()) +
                         " entries, problem has " +
                         std::to_string(problem.node_count()) + " nodes");
  }
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (!(q[i] >= 0.0 && q[i] <= problem.capacities[i])) {
      throw DomainError("allocation q_" + std::to_string(i) + " = " +
                        std::to_string(q[i]) + " violates 0 <= q <= " +
                        std::to_string(problem.capacities[i]));
    }
  }
  return penalty(q, problem.budget);
}

double allocation_objective(std::span<const double> q,
                            const AllocationProblem &problem,
                            const RequestModel &model, std::uint64_t seed) {
  const double p = penalty(q, problem);
  const auto done = model.completed(q, seed);
  double total = 0.0;
  for (double v : done) total += v;
  return total - p;
}

std::size_t poisson_quantile(double lambda, double u) {
  if (!(lambda > 0.0)) return 0;
  double p = std::exp(-lambda);
  double cdf = p;
  std::size_t k = 0;
  while (u > cdf && k < 100000) {
    ++k;
    p *= lambda / static_cast<double>(k);
    cdf += p;
    if (p == 0.0 && cdf < u) break; // tail underflow
  }
  return k;
}

ToyRequestModel::ToyRequestModel(double scale)
    : scale_(scale),
      names_{"NU",         "StarLight",  "UChicago PME",
             "UChicago HC", "Fermilab 1", "Fermilab 2",
             "Argonne 1",  "Argonne 2",  "Argonne 3"},
      edges_{{0, 1}, {1, 2}, {2, 3}, {1, 4}, {4, 5},
             {1, 6}, {4, 6}, {6, 7}, {6, 8}} {
  if (!(scale > 0.0)) throw DomainError("toy request scale must be positive");
  const std::size_t n = names_.size();
  std::vector<std::vector<std::size_t>> adj(n);
  for (auto [a, b] : edges_) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<int> dist(n, -1);
    std::queue<std::size_t> todo;
    dist[s] = 0;
    todo.push(s);
    double total = 0.0;
    while (!todo.empty()) {
      const auto v = todo.front();
      todo.pop();
      total += dist[v];
      for (auto w : adj[v]) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          todo.push(w);
        }
      }
    }
    path_factor_.push_back(static_cast<double>(n - 1) / total);
  }
}

std::vector<double> ToyRequestModel::expected(std::span<const double> q) const {
  if (q.size() != names_.size()) {
    throw DimensionError("toy request model expects 9 allocations");
  }
  std::vector<double> lambda(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (!(q[i] >= 0.0)) throw DomainError("allocations must be non-negative");
    lambda[i] = scale_ * std::log1p(q[i]) * path_factor_[i];
  }
  return lambda;
}

std::vector<double> ToyRequestModel::completed(std::span<const double> q,
                                               std::uint64_t seed) const {
  const auto lambda = expected(q);
  Rng rng(seed);
  std::vector<double> out(lambda.size());
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    out[i] = static_cast<double>(poisson_quantile(lambda[i], uniform01(rng)));
  }
  return out;
}

SearchSpace allocation_space(const AllocationProblem &problem,
                             const std::vector<std::string> &node_names) {
  problem.validate();
  std::vector<ParamSpec> params;
  for (std::size_t i = 0; i < problem.node_count(); ++i) {
    std::string label = i < node_names.size() ? node_names[i] : std::to_string(i);
    for (auto &ch : label) {
      if (ch == ' ') ch = '_';
    }
    params.push_back(ParamSpec::integer("q_" + label, 0.0, problem.capacities[i]));
  }
  return SearchSpace(std::move(params));
}

AllocationObjective::AllocationObjective(AllocationProblem problem,
                                         std::shared_ptr<const RequestModel> model,
                                         std::vector<std::string> node_names)
    : problem_(std::move(problem)), model_(std::move(model)),
      names_(std::move(node_names)) {
  problem_.validate();
  if (!model_ || model_->node_count() != problem_.node_count()) {
    throw DimensionError("request model node count does not match the problem");
  }
}

std::size_t AllocationObjective::objective_count() const {
  return problem_.node_count() + 1;
}

std::vector<std::string> AllocationObjective::objective_names() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < problem_.node_count(); ++i) {
    std::string label = i < names_.size() ? names_[i] : std::to_string(i);
    for (auto &ch : label) {
      if (ch == ' ') ch = '_';
    }
    out.push_back("U_" + label);
  }
  out.push_back("neg_penalty");
  return out;
}

std::vector<double> AllocationObjective::run(const ConfigPoint &config,
                                             std::uint64_t seed) const {
  std::vector<double> q;
  for (const auto &v : config.values) q.push_back(std::get<double>(v));
  const double p = penalty(q, problem_);
  auto out = model_->completed(q, seed);
  out.push_back(-p);
  return out;
}

} // namespace qnopt::memalloc
