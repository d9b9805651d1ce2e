#ifndef CAUSAL_STBN_HPP
#define CAUSAL_STBN_HPP

#include <map>
#include <string>
#include <vector>

#include "causal/graph.hpp"
#include "causal/identify.hpp"
#include "causal/scm.hpp"

namespace causal {

// A lagged edge: the state of `from` at time t - lag influences the state
// of `to` at time t, for every t. lag 0 means an instantaneous effect.
struct LaggedEdge {
  std::string from;
  int lag = 0;
  std::string to;

  bool operator==(const LaggedEdge&) const = default;
};

// Stationary lag-edge template of a spatio-temporal Bayesian network: one
// edge relation applied at every timestamp. Validation enforces that causes
// never point backward in time (lag >= 0) and that the instantaneous
// sub-relation is acyclic, so unrolling always yields a DAG.
class StbnTemplate {
 public:
  StbnTemplate(std::vector<std::string> variables, int max_lag,
               std::vector<LaggedEdge> edges);

  const std::vector<std::string>& variables() const { return variables_; }
  int max_lag() const { return max_lag_; }
  const std::vector<LaggedEdge>& edges() const { return edges_; }

 private:
  std::vector<std::string> variables_;
  int max_lag_ = 0;
  std::vector<LaggedEdge> edges_;
};

// Factory matching the validation rules above; the constructor enforces the
// same rules, this name mirrors the operation it performs.
StbnTemplate validate_temporal(std::vector<std::string> variables, int max_lag,
                               std::vector<LaggedEdge> edges);

// Time-expanded template: one composite node per (variable, timestamp),
// labelled "name@t" with t counted 0-based from the earliest slice.
struct UnrolledStbn {
  Dag dag;
  int horizon = 0;

  static std::string label(const std::string& variable, int time);
  // Splits "name@t"; throws ParseError on malformed labels.
  static std::pair<std::string, int> parse_label(const std::string& label);
};

// Unrolls over `horizon` timestamps (0 .. horizon-1). An edge (u, lag, v)
// materialises as u@(t-lag) -> v@t wherever t-lag >= 0. Requires
// horizon >= max_lag + 1 so every declared lag appears at least once.
UnrolledStbn unroll(const StbnTemplate& tmpl, int horizon);

// Interventional query on the unrolled network, delegated to fci over the
// unrolled DAG. `cpts` must be a CptModel over the unrolled node labels.
// Keys of `schedule` and `target` use the "name@t" labels. An empty
// schedule returns the observational marginal of the target.
std::map<std::string, double> stbn_query(const StbnTemplate& tmpl,
                                         const CptModel& cpts,
                                         const std::string& target,
                                         const DiscreteIntervention& schedule,
                                         std::vector<std::string>* warnings =
                                             nullptr);

// First-order template from discretised network dynamics: every node gets a
// lag-1 self edge (the joined self- and interaction-effect on its own next
// state), and adjacency[i][j] > 0 adds the lag-1 edge variable_j ->
// variable_i. The adjacency must be square and non-negative with a zero
// diagonal. Names default to X1..Xn.
StbnTemplate from_dynamics(const std::vector<std::vector<double>>& adjacency,
                           std::vector<std::string> names = {});

// First differences: out[s] = series[s+1] - series[s]. Removes linear
// trends in preprocessing; output is one element shorter.
std::vector<std::vector<double>> difference_series(
    const std::vector<std::vector<double>>& series);

// Adds an observed time confounder "C": a lag-1 chain C -> C plus an
// instantaneous edge C -> v for each affected variable. Conditioning on the
// C slices then blocks the fork paths a time-varying noise scale would
// otherwise open between the affected variables.
StbnTemplate augment_time_confounder(const StbnTemplate& tmpl,
                                     const std::vector<std::string>& affected);

}  // namespace causal

#endif  // CAUSAL_STBN_HPP
