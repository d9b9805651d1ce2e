#include "causal/pom.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "causal/dsep.hpp"
#include "causal/error.hpp"
#include "causal/oracle.hpp"

namespace causal {

PomTable::PomTable(std::vector<CovariateSchema> schema,
                   std::vector<PomRow> rows)
    : schema_(std::move(schema)), rows_(std::move(rows)) {
  std::set<std::string> units;
  std::set<std::string> names;
  for (const auto& c : schema_) {
    if (!names.insert(c.name).second) {
      throw ModelError("duplicate covariate name: " + c.name);
    }
  }
  for (const auto& row : rows_) {
    if (!units.insert(row.unit).second) {
      throw ModelError("duplicate unit id: " + row.unit);
    }
    if (row.treatment != 0 && row.treatment != 1) {
      throw ModelError("unit " + row.unit + " has treatment " +
                       std::to_string(row.treatment) + ", expected 0 or 1");
    }
    if (row.covariates.size() != schema_.size()) {
      throw ModelError("unit " + row.unit + " has " +
                       std::to_string(row.covariates.size()) +
                       " covariates, schema has " +
                       std::to_string(schema_.size()));
    }
    for (std::size_t k = 0; k < schema_.size(); ++k) {
      const bool is_cat =
          std::holds_alternative<std::string>(row.covariates[k]);
      if (is_cat != (schema_[k].kind == CovariateKind::Categorical)) {
        throw ModelError("unit " + row.unit + ", covariate " +
                         schema_[k].name + ": value kind does not match the "
                         "schema");
      }
    }
  }
}

bool PomTable::all_categorical() const {
  return std::all_of(schema_.begin(), schema_.end(), [](const auto& c) {
    return c.kind == CovariateKind::Categorical;
  });
}

bool PomTable::all_real() const {
  return std::all_of(schema_.begin(), schema_.end(), [](const auto& c) {
    return c.kind == CovariateKind::Real;
  });
}

std::string PomTable::stratum_key(const PomRow& row) const {
  std::string key;
  for (std::size_t k = 0; k < row.covariates.size(); ++k) {
    if (k) key += "|";
    key += std::get<std::string>(row.covariates[k]);
  }
  return key;
}

namespace {

void require_categorical(const PomTable& t, const char* op) {
  if (!t.all_categorical()) {
    throw QueryError(std::string(op) +
                     " requires categorical covariates; bin real covariates "
                     "first");
  }
}

struct Stratum {
  std::vector<std::size_t> treated;
  std::vector<std::size_t> control;
};

std::map<std::string, Stratum> group_strata(const PomTable& t) {
  std::map<std::string, Stratum> strata;
  const auto& rows = t.rows();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& s = strata[t.stratum_key(rows[i])];
    (rows[i].treatment == 1 ? s.treated : s.control).push_back(i);
  }
  return strata;
}

double mean_outcome(const PomTable& t, const std::vector<std::size_t>& idx) {
  double sum = 0.0;
  for (std::size_t i : idx) sum += t.rows()[i].outcome;
  return sum / static_cast<double>(idx.size());
}

double outcome_variance(const PomTable& t,
                        const std::vector<std::size_t>& idx) {
  if (idx.size() < 2) return 0.0;
  const double m = mean_outcome(t, idx);
  double ss = 0.0;
  for (std::size_t i : idx) {
    const double d = t.rows()[i].outcome - m;
    ss += d * d;
  }
  return ss / static_cast<double>(idx.size() - 1);
}

}  // namespace

std::vector<PositivityViolation> check_positivity(const PomTable& t) {
  require_categorical(t, "check_positivity");
  std::vector<PositivityViolation> out;
  for (const auto& [key, s] : group_strata(t)) {
    if (!s.treated.empty() && !s.control.empty()) continue;
    out.push_back(PositivityViolation{
        key, s.treated.size(), s.control.size(),
        s.treated.size() + s.control.size() == 1});
  }
  return out;
}

ImputationReport exact_match_impute(const PomTable& t) {
  require_categorical(t, "exact_match_impute");
  const auto strata = group_strata(t);
  ImputationReport report;
  report.method = "exact";
  for (const auto& row : t.rows()) {
    const auto& s = strata.at(t.stratum_key(row));
    const auto& opposite = row.treatment == 1 ? s.control : s.treated;
    UnitImputation u;
    u.unit = row.unit;
    u.match_count = opposite.size();
    if (!opposite.empty()) {
      u.imputed = mean_outcome(t, opposite);
    }
    report.units.push_back(std::move(u));
  }
  return report;
}

ImputationReport caliper_match_impute(const PomTable& t, double radius) {
  if (!t.all_real()) {
    throw QueryError("caliper_match_impute requires real covariates");
  }
  if (!(radius > 0.0)) {
    throw QueryError("caliper radius must be positive");
  }
  const auto& rows = t.rows();
  const std::size_t dims = t.schema().size();
  const std::size_t n = rows.size();

  // Standardise each dimension to unit variance over all units. A
  // zero-variance dimension carries no distance information; it is dropped
  // and reported.
  std::vector<double> scale(dims, 1.0);
  std::vector<bool> keep(dims, true);
  ImputationReport report;
  report.method = "caliper";
  report.caliper = radius;
  for (std::size_t k = 0; k < dims; ++k) {
    double mean = 0.0;
    for (const auto& row : rows) mean += std::get<double>(row.covariates[k]);
    mean /= static_cast<double>(n == 0 ? 1 : n);
    double var = 0.0;
    for (const auto& row : rows) {
      const double d = std::get<double>(row.covariates[k]) - mean;
      var += d * d;
    }
    var /= static_cast<double>(n > 1 ? n - 1 : 1);
    if (var <= 0.0) {
      keep[k] = false;
      report.dropped_dimensions.push_back(t.schema()[k].name);
    } else {
      scale[k] = std::sqrt(var);
    }
  }

  const double r2 = radius * radius;
  for (std::size_t i = 0; i < n; ++i) {
    UnitImputation u;
    u.unit = rows[i].unit;
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (rows[j].treatment == rows[i].treatment) continue;
      double d2 = 0.0;
      for (std::size_t k = 0; k < dims; ++k) {
        if (!keep[k]) continue;
        const double d = (std::get<double>(rows[i].covariates[k]) -
                          std::get<double>(rows[j].covariates[k])) /
                         scale[k];
        d2 += d * d;
      }
      if (d2 <= r2) {
        sum += rows[j].outcome;
        ++u.match_count;
      }
    }
    if (u.match_count > 0) {
      u.imputed = sum / static_cast<double>(u.match_count);
    }
    report.units.push_back(std::move(u));
  }
  return report;
}

AteResult ate(const PomTable& t) {
  require_categorical(t, "ate");
  const auto strata = group_strata(t);
  AteResult result;
  std::size_t included_units = 0;
  std::size_t total_units = t.rows().size();
  if (total_units == 0) {
    throw QueryError("ate requires a non-empty table");
  }

  for (const auto& [key, s] : strata) {
    if (s.treated.empty() || s.control.empty()) {
      result.excluded.push_back(PositivityViolation{
          key, s.treated.size(), s.control.size(),
          s.treated.size() + s.control.size() == 1});
      continue;
    }
    included_units += s.treated.size() + s.control.size();
  }
  if (included_units == 0) {
    throw QueryError("every stratum violates positivity; ate is undefined");
  }

  double var1 = 0.0;
  double var0 = 0.0;
  for (const auto& [key, s] : strata) {
    if (s.treated.empty() || s.control.empty()) continue;
    const double weight =
        static_cast<double>(s.treated.size() + s.control.size()) /
        static_cast<double>(included_units);
    result.e_y1 += weight * mean_outcome(t, s.treated);
    result.e_y0 += weight * mean_outcome(t, s.control);
    var1 += weight * weight * outcome_variance(t, s.treated) /
            static_cast<double>(s.treated.size());
    var0 += weight * weight * outcome_variance(t, s.control) /
            static_cast<double>(s.control.size());
  }
  result.ate = result.e_y1 - result.e_y0;
  result.se_y1 = std::sqrt(var1);
  result.se_y0 = std::sqrt(var0);
  result.excluded_weight =
      static_cast<double>(total_units - included_units) /
      static_cast<double>(total_units);
  return result;
}

double adjusted_expectation(const CptModel& m, const std::string& t_node,
                            const std::string& y_node,
                            const std::vector<std::string>& x_nodes,
                            const std::string& t_value) {
  const Dag& g = m.graph();
  g.index_of(t_node);
  g.index_of(y_node);
  m.value_index(t_node, t_value);
  if (!check_backdoor(g, {t_node}, y_node, x_nodes)) {
    throw QueryError(
        "adjustment set does not satisfy the back-door criterion for (" +
        t_node + ", " + y_node + ")");
  }

  // The outcome domain must be numeric.
  std::vector<double> y_values;
  for (const auto& label : m.domain(y_node)) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(label, &pos);
      if (pos != label.size()) throw std::invalid_argument(label);
      y_values.push_back(v);
    } catch (const std::exception&) {
      throw QueryError("outcome domain value '" + label +
                       "' of node " + y_node + " is not numeric");
    }
  }

  const JointTable joint = enumerate_joint(m);
  const std::size_t ti = joint.node_index(t_node);
  const std::size_t yi = joint.node_index(y_node);
  const std::size_t tv = m.value_index(t_node, t_value);
  std::vector<std::size_t> xi;
  for (const auto& x : x_nodes) xi.push_back(joint.node_index(x));

  // Enumerate the x-strata.
  std::vector<std::vector<std::size_t>> combos{{}};
  for (std::size_t x : xi) {
    std::vector<std::vector<std::size_t>> next;
    for (const auto& prefix : combos) {
      for (std::size_t k = 0; k < joint.domains()[x].size(); ++k) {
        auto c = prefix;
        c.push_back(k);
        next.push_back(std::move(c));
      }
    }
    combos = std::move(next);
  }

  double total = 0.0;
  for (const auto& xv : combos) {
    std::vector<std::pair<std::size_t, std::size_t>> xfix;
    for (std::size_t k = 0; k < xi.size(); ++k) {
      xfix.emplace_back(xi[k], xv[k]);
    }
    const double px = joint.event_prob(xfix);
    if (px <= 0.0) continue;  // zero-mass stratum contributes nothing
    auto txfix = xfix;
    txfix.emplace_back(ti, tv);
    const double ptx = joint.event_prob(txfix);
    if (ptx <= 0.0) {
      std::string desc = t_node + "=" + m.domain(t_node)[tv];
      for (std::size_t k = 0; k < xi.size(); ++k) {
        desc += "," + joint.nodes()[xi[k]] + "=" +
                joint.domains()[xi[k]][xv[k]];
      }
      throw QueryError("conditioning event has probability 0: {" + desc +
                       "}");
    }
    double e_y = 0.0;
    for (std::size_t k = 0; k < y_values.size(); ++k) {
      auto yfix = txfix;
      yfix.emplace_back(yi, k);
      e_y += y_values[k] * joint.event_prob(yfix) / ptx;
    }
    total += px * e_y;
  }
  return total;
}

}  // namespace causal
