#ifndef CAUSAL_SCM_HPP
#define CAUSAL_SCM_HPP

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "causal/graph.hpp"

namespace causal {

// Real-valued assignment over node names (full or partial).
using Assignment = std::map<std::string, double>;
// Category-valued assignment for the discrete family.
using DiscreteAssignment = std::map<std::string, std::string>;

// Forced values for the do-operator, one flavour per model family.
using LinearIntervention = std::map<std::string, double>;
using DiscreteIntervention = std::map<std::string, std::string>;

// Exogenous-noise description of one node. The mean doubles as the node's
// intercept: a fitted model stores the intercept here so that abduction
// stays the plain residual x - sum(coeff * parent).
struct NoiseSpec {
  std::string name;
  double mean = 0.0;
  double stddev = 0.0;
};

// Linear additive-noise structural model: x_i = sum_j coeff(j->i) x_j + u_i.
//
// Immutable after construction. intervene() returns a mutilated copy whose
// forced nodes are constants with their incoming edges removed; every other
// mechanism is carried over bit-identically.
class LinearScm {
 public:
  using CoeffMap = std::map<std::pair<std::string, std::string>, double>;

  // noise entries are optional per node; missing ones default to
  // {name: "U_<node>", mean: 0, stddev: 0}. Negative stddev is rejected.
  LinearScm(Dag graph, CoeffMap coeff,
            std::map<std::string, NoiseSpec> noise = {});

  const Dag& graph() const { return graph_; }
  double coeff(const std::string& from, const std::string& to) const;
  const NoiseSpec& noise(const std::string& node) const;
  bool is_forced(const std::string& node) const;
  double forced_value(const std::string& node) const;
  const std::map<std::string, double>& forced() const { return forced_; }

  // Propagates a full noise assignment through the structural functions in
  // topological order. Forced nodes take their forced value.
  Assignment evaluate(const Assignment& noise_values) const;

  // Exact inverse of evaluate: u_i = x_i - sum_j coeff(j->i) x_j.
  Assignment abduct(const Assignment& observed) const;

  LinearScm intervene(const LinearIntervention& forced) const;

  // Abduction-action-prediction. Non-intervened nodes are computed as the
  // observed value plus the change in their parents' contribution, which is
  // algebraically evaluate(intervene(...), abduct(...)) but reproduces
  // untouched nodes bit-for-bit.
  Assignment counterfactual(const Assignment& observed,
                            const LinearIntervention& forced) const;

  // n independent draws with u_i ~ Normal(mean_i, stddev_i), deterministic
  // given the seed (see Rng for the pinned generator).
  std::vector<Assignment> simulate(std::size_t n, std::uint64_t seed) const;

  // Evaluation at the noise means, optionally under an intervention; this is
  // the regression-style point prediction of a fitted model.
  Assignment mean_prediction(const LinearIntervention& forced = {}) const;

 private:
  Dag graph_;
  // Per node (insertion index): (parent index, coefficient), label-sorted.
  std::vector<std::vector<std::pair<std::size_t, double>>> terms_;
  std::vector<NoiseSpec> noise_;
  std::map<std::string, double> forced_;

  double parent_sum(std::size_t node, const std::vector<double>& values) const;
};

// One conditional probability table row, addressed by named parent values.
struct CptRow {
  DiscreteAssignment given;
  std::vector<double> probs;  // over the node's domain, in domain order
};

// Finite-domain Bayesian network with explicit CPTs.
//
// Rows are indexed by the cartesian product of the parent domains, parents
// taken in label-sorted order with the first parent most significant. Every
// row must sum to 1 within 1e-9.
class CptModel {
 public:
  CptModel(Dag graph, std::map<std::string, std::vector<std::string>> domains,
           std::map<std::string, std::vector<CptRow>> tables);

  // Rows supplied directly in mixed-radix parent order.
  static CptModel from_flat(
      Dag graph, std::map<std::string, std::vector<std::string>> domains,
      std::map<std::string, std::vector<std::vector<double>>> rows);

  const Dag& graph() const { return graph_; }
  const std::vector<std::string>& domain(const std::string& node) const;
  std::size_t domain_size(std::size_t node_index) const {
    return domains_[node_index].size();
  }
  std::size_t value_index(const std::string& node,
                          const std::string& value) const;

  // Parents in the row-indexing order (label-sorted), as node indices.
  const std::vector<std::size_t>& parent_indices(std::size_t node_index) const {
    return parents_[node_index];
  }

  // P(node = value | parents = combo) with everything pre-resolved to
  // indices; `full` is any vector holding each parent's value index at the
  // parent's node index.
  double prob(std::size_t node_index, std::size_t value_index,
              const std::vector<std::size_t>& full_assignment) const;

  // Whole flat table of one node, for mechanism comparisons.
  const std::vector<double>& table(const std::string& node) const;

  CptModel intervene(const DiscreteIntervention& forced) const;

  std::vector<DiscreteAssignment> simulate(std::size_t n,
                                           std::uint64_t seed) const;

  // Unit-level counterfactuals need invertible mechanisms, which CPTs do not
  // have; this always throws UnsupportedError. Interventional queries remain
  // fully supported through intervene() and the identification machinery.
  [[noreturn]] void counterfactual(const DiscreteAssignment& observed,
                                   const DiscreteIntervention& forced) const;

 private:
  CptModel() = default;

  Dag graph_;
  std::vector<std::vector<std::string>> domains_;   // by node index
  std::vector<std::vector<std::size_t>> parents_;   // label-sorted indices
  std::vector<std::vector<double>> tables_;         // flat row-major
  std::vector<std::vector<std::size_t>> strides_;   // per parent

  std::size_t row_offset(std::size_t node_index,
                         const std::vector<std::size_t>& full) const;
  void validate();
};

// Per-node least squares of each node on its parents plus an intercept.
// The intercept lands in the noise mean and the residual standard deviation
// in the noise stddev, so simulate() reproduces the fitted data law.
LinearScm fit_linear(const std::vector<Assignment>& data, const Dag& g);

}  // namespace causal

#endif  // CAUSAL_SCM_HPP
