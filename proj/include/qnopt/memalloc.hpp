#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qnopt/objective.hpp"
#include "qnopt/param_space.hpp"

namespace qnopt::memalloc {

struct AllocationProblem {
  double budget = 450.0;
  std::vector<double> capacities = std::vector<double>(9, 128.0);

  void validate() const;
  [[nodiscard]] std::size_t node_count() const noexcept { return capacities.size(); }
};

// max(0, sum(q) - budget).
double penalty(std::span<const double> q, double budget);
// As above, after checking 0 <= q_i <= c_i (DomainError otherwise).
double penalty(std::span<const double> q, const AllocationProblem &problem);

// Completed requests per node for one simulated run.
class RequestModel {
public:
  virtual ~RequestModel() = default;
  [[nodiscard]] virtual std::size_t node_count() const = 0;
  [[nodiscard]] virtual std::vector<double> completed(std::span<const double> q,
                                                      std::uint64_t seed) const = 0;
};

// Sum of completed requests minus the budget penalty.
double allocation_objective(std::span<const double> q,
                            const AllocationProblem &problem,
                            const RequestModel &model, std::uint64_t seed);

// Desk-scale stand-in for a metropolitan request simulator: node i completes
// Poisson(lambda_i) requests with lambda_i = scale * ln(1 + q_i) * c_i, where
// c_i is the closeness centrality of node i on a fixed nine-node graph.
// Draws use inverse-CDF sampling from one uniform per node, so a fixed seed
// couples runs at different allocations monotonically.
class ToyRequestModel final : public RequestModel {
public:
  explicit ToyRequestModel(double scale = 2.0);

  [[nodiscard]] std::size_t node_count() const override { return names_.size(); }
  [[nodiscard]] std::vector<double> completed(std::span<const double> q,
                                              std::uint64_t seed) const override;

  [[nodiscard]] std::vector<double> expected(std::span<const double> q) const;
  [[nodiscard]] const std::vector<std::string> &names() const noexcept { return names_; }
  [[nodiscard]] const std::vector<std::pair<std::size_t, std::size_t>> &edges() const noexcept {
    return edges_;
  }
  [[nodiscard]] const std::vector<double> &path_factors() const noexcept {
    return path_factor_;
  }

private:
  double scale_;
  std::vector<std::string> names_;
  std::vector<std::pair<std::size_t, std::size_t>> edges_;
  std::vector<double> path_factor_;
};

// Smallest k with P(Poisson(lambda) <= k) >= u.
std::size_t poisson_quantile(double lambda, double u);

// Integer parameters q_<node> on [0, c_i].
SearchSpace allocation_space(const AllocationProblem &problem,
                             const std::vector<std::string> &node_names);

// Optimizer adapter: outputs the per-node completed requests followed by the
// negated penalty, so the aggregate equals allocation_objective.
class AllocationObjective final : public Objective {
public:
  AllocationObjective(AllocationProblem problem,
                      std::shared_ptr<const RequestModel> model,
                      std::vector<std::string> node_names = {});

  [[nodiscard]] std::size_t objective_count() const override;
  [[nodiscard]] std::vector<double> run(const ConfigPoint &config,
                                        std::uint64_t seed) const override;
  [[nodiscard]] std::vector<std::string> objective_names() const override;

private:
  AllocationProblem problem_;
  std::shared_ptr<const RequestModel> model_;
  std::vector<std::string> names_;
};

} // namespace qnopt::memalloc
