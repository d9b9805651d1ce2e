#ifndef CAUSAL_POM_HPP
#define CAUSAL_POM_HPP

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "causal/scm.hpp"

namespace causal {

enum class CovariateKind { Categorical, Real };

struct CovariateSchema {
  std::string name;
  CovariateKind kind = CovariateKind::Categorical;
};

using CovariateValue = std::variant<std::string, double>;

struct PomRow {
  std::string unit;
  std::vector<CovariateValue> covariates;
  int treatment = 0;  // 0 control, 1 treated
  double outcome = 0.0;
};

// Per-unit potential-outcome table: covariates, a binary treatment, and the
// observed outcome. The unobserved arm is the counterfactual the matching
// operations impute.
class PomTable {
 public:
  PomTable(std::vector<CovariateSchema> schema, std::vector<PomRow> rows);

  const std::vector<CovariateSchema>& schema() const { return schema_; }
  const std::vector<PomRow>& rows() const { return rows_; }
  bool all_categorical() const;
  bool all_real() const;

  // Canonical "a|b|c" key of a row's covariate tuple (categorical only).
  std::string stratum_key(const PomRow& row) const;

 private:
  std::vector<CovariateSchema> schema_;
  std::vector<PomRow> rows_;
};

struct PositivityViolation {
  std::string stratum;
  std::size_t n_treated = 0;
  std::size_t n_control = 0;
  bool singleton = false;  // one-unit stratum, one-armed by arithmetic
};

// Flags every covariate stratum whose units all share one treatment arm.
// An empty result means the positivity audit passes. Categorical covariates
// only; bin real covariates before calling.
std::vector<PositivityViolation> check_positivity(const PomTable& t);

struct UnitImputation {
  std::string unit;
  std::optional<double> imputed;  // missing when no match exists
  std::size_t match_count = 0;
};

struct ImputationReport {
  std::string method;
  std::optional<double> caliper;
  std::vector<UnitImputation> units;              // table order
  std::vector<std::string> dropped_dimensions;    // zero-variance (caliper)
};

// Exact matching: a unit's missing potential outcome is the mean outcome of
// opposite-arm units with identical covariates; unmatched units are flagged,
// not errors.
ImputationReport exact_match_impute(const PomTable& t);

// Caliper matching on real covariates: opposite-arm units within Euclidean
// distance `radius` after per-dimension standardisation to unit variance.
// Zero-variance dimensions are reported and dropped from the distance.
ImputationReport caliper_match_impute(const PomTable& t, double radius);

struct AteResult {
  double e_y1 = 0.0;
  double e_y0 = 0.0;
  double ate = 0.0;
  // Standard errors of the stratified arm means (within-stratum sampling
  // variation), for tolerance checks against exact estimands.
  double se_y1 = 0.0;
  double se_y0 = 0.0;
  std::vector<PositivityViolation> excluded;
  double excluded_weight = 0.0;  // share of units in excluded strata
};

// Stratified estimator: E[Y(t)] = sum_x P(x) mean(Y | T=t, x) over strata
// that pass positivity; violating strata are excluded, reported, and the
// stratum weights renormalised over the included ones.
AteResult ate(const PomTable& t);

// Back-door adjusted expectation on an exact model:
// E[Y | do(T=t)] = sum_x P(X=x) sum_y y P(Y=y | T=t, X=x), computed from
// the enumerated joint. The outcome domain must parse as real numbers and
// x_nodes must pass check_backdoor for ({t_node}, y_node).
double adjusted_expectation(const CptModel& m, const std::string& t_node,
                            const std::string& y_node,
                            const std::vector<std::string>& x_nodes,
                            const std::string& t_value);

}  // namespace causal

#endif  // CAUSAL_POM_HPP
