#include "causal/stbn.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include "causal/error.hpp"
#include "causal/oracle.hpp"

namespace causal {

StbnTemplate::StbnTemplate(std::vector<std::string> variables, int max_lag,
                           std::vector<LaggedEdge> edges)
    : variables_(std::move(variables)),
      max_lag_(max_lag),
      edges_(std::move(edges)) {
  if (max_lag_ < 0) {
    throw ModelError("max_lag must be >= 0, got " + std::to_string(max_lag_));
  }
  std::set<std::string> vars;
  for (const auto& v : variables_) {
    if (v.empty()) {
      throw ModelError("variable names must be non-empty");
    }
    if (v.find('@') != std::string::npos) {
      throw ModelError("variable name may not contain '@': " + v);
    }
    if (!vars.insert(v).second) {
      throw ModelError("duplicate variable: " + v);
    }
  }

  std::set<std::tuple<std::string, int, std::string>> seen;
  std::vector<std::pair<std::string, std::string>> instantaneous;
  for (const auto& e : edges_) {
    if (!vars.count(e.from)) {
      throw ModelError("unknown variable in edge: " + e.from);
    }
    if (!vars.count(e.to)) {
      throw ModelError("unknown variable in edge: " + e.to);
    }
    if (e.lag < 0) {
      throw ModelError("temporal assumption violated: edge " + e.from +
                       " -> " + e.to + " has negative lag " +
                       std::to_string(e.lag) +
                       " (causes may not point backward in time)");
    }
    if (e.lag > max_lag_) {
      throw ModelError("edge lag " + std::to_string(e.lag) +
                       " exceeds max_lag " + std::to_string(max_lag_));
    }
    if (e.lag == 0 && e.from == e.to) {
      throw ModelError("instantaneous self-loop on " + e.from);
    }
    if (!seen.emplace(e.from, e.lag, e.to).second) {
      throw ModelError("duplicate lagged edge: " + e.from + " -(" +
                       std::to_string(e.lag) + ")-> " + e.to);
    }
    if (e.lag == 0) instantaneous.emplace_back(e.from, e.to);
  }

  // The lag-0 sub-relation must be acyclic; Dag construction checks that
  // and names one offending cycle.
  try {
    (void)Dag(variables_, instantaneous);
  } catch (const GraphError& err) {
    throw ModelError(std::string("instantaneous cycle: ") + err.what());
  }
}

StbnTemplate validate_temporal(std::vector<std::string> variables, int max_lag,
                               std::vector<LaggedEdge> edges) {
  return StbnTemplate(std::move(variables), max_lag, std::move(edges));
}

std::string UnrolledStbn::label(const std::string& variable, int time) {
  return variable + "@" + std::to_string(time);
}

std::pair<std::string, int> UnrolledStbn::parse_label(
    const std::string& label) {
  const auto at = label.rfind('@');
  if (at == std::string::npos || at == 0 || at + 1 == label.size()) {
    throw ParseError("malformed composite node label: " + label);
  }
  int time = 0;
  try {
    time = std::stoi(label.substr(at + 1));
  } catch (const std::exception&) {
    throw ParseError("malformed timestamp in label: " + label);
  }
  return {label.substr(0, at), time};
}

UnrolledStbn unroll(const StbnTemplate& tmpl, int horizon) {
  if (horizon < tmpl.max_lag() + 1) {
    throw ModelError("horizon " + std::to_string(horizon) +
                     " too small: need at least max_lag + 1 = " +
                     std::to_string(tmpl.max_lag() + 1));
  }
  std::vector<std::string> nodes;
  for (int t = 0; t < horizon; ++t) {
    for (const auto& v : tmpl.variables()) {
      nodes.push_back(UnrolledStbn::label(v, t));
    }
  }
  std::vector<std::pair<std::string, std::string>> edges;
  for (int t = 0; t < horizon; ++t) {
    for (const auto& e : tmpl.edges()) {
      const int s = t - e.lag;
      if (s < 0) continue;
      edges.emplace_back(UnrolledStbn::label(e.from, s),
                         UnrolledStbn::label(e.to, t));
    }
  }
  return UnrolledStbn{Dag(std::move(nodes), std::move(edges)), horizon};
}

std::map<std::string, double> stbn_query(const StbnTemplate& tmpl,
                                         const CptModel& cpts,
                                         const std::string& target,
                                         const DiscreteIntervention& schedule,
                                         std::vector<std::string>* warnings) {
  const Dag& g = cpts.graph();
  // The CPT model must live on an unrolling of this template; checking the
  // node labels catches the obvious mismatches.
  for (const auto& node : g.nodes()) {
    const auto [var, time] = UnrolledStbn::parse_label(node);
    if (std::find(tmpl.variables().begin(), tmpl.variables().end(), var) ==
        tmpl.variables().end()) {
      throw QueryError("CPT model node " + node +
                       " does not match any template variable");
    }
    if (time < 0) {
      throw QueryError("CPT model node " + node + " has a negative timestamp");
    }
  }
  g.index_of(target);
  if (schedule.empty()) {
    return enumerate_joint(cpts).marginal(target);
  }
  QuerySpec q;
  q.target = target;
  for (const auto& [node, value] : schedule) {
    g.index_of(node);
    q.sources.push_back(node);
  }
  const ExprPtr expr = fci(g, q, warnings);
  return evaluate_expression(expr, cpts, schedule);
}

StbnTemplate from_dynamics(const std::vector<std::vector<double>>& adjacency,
                           std::vector<std::string> names) {
  const std::size_t n = adjacency.size();
  if (n == 0) {
    throw ModelError("adjacency matrix is empty");
  }
  for (const auto& row : adjacency) {
    if (row.size() != n) {
      throw ModelError("adjacency matrix is not square");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (adjacency[i][j] < 0.0) {
        throw ModelError("adjacency entry (" + std::to_string(i) + "," +
                         std::to_string(j) + ") is negative");
      }
      if (i == j && adjacency[i][j] != 0.0) {
        throw ModelError("adjacency diagonal must be zero; self dynamics "
                         "enter through the lag-1 self edges");
      }
    }
  }
  if (names.empty()) {
    for (std::size_t i = 0; i < n; ++i) {
      names.push_back("X" + std::to_string(i + 1));
    }
  }
  if (names.size() != n) {
    throw ModelError("expected " + std::to_string(n) + " variable names");
  }

  std::vector<LaggedEdge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    edges.push_back(LaggedEdge{names[i], 1, names[i]});
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (adjacency[i][j] > 0.0) {
        edges.push_back(LaggedEdge{names[j], 1, names[i]});
      }
    }
  }
  return StbnTemplate(std::move(names), 1, std::move(edges));
}

std::vector<std::vector<double>> difference_series(
    const std::vector<std::vector<double>>& series) {
  if (series.size() < 2) {
    throw QueryError("difference_series needs at least 2 observations, got " +
                     std::to_string(series.size()));
  }
  const std::size_t dim = series.front().size();
  std::vector<std::vector<double>> out;
  out.reserve(series.size() - 1);
  for (std::size_t s = 0; s + 1 < series.size(); ++s) {
    if (series[s].size() != dim || series[s + 1].size() != dim) {
      throw QueryError("difference_series requires fixed-width vectors");
    }
    std::vector<double> d(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      d[k] = series[s + 1][k] - series[s][k];
    }
    out.push_back(std::move(d));
  }
  return out;
}

StbnTemplate augment_time_confounder(const StbnTemplate& tmpl,
                                     const std::vector<std::string>& affected) {
  const std::string kClock = "C";
  if (std::find(tmpl.variables().begin(), tmpl.variables().end(), kClock) !=
      tmpl.variables().end()) {
    throw ModelError("cannot add time confounder: variable C already exists");
  }
  std::set<std::string> vars(tmpl.variables().begin(), tmpl.variables().end());
  for (const auto& v : affected) {
    if (!vars.count(v)) {
      throw ModelError("affected variable is not in the template: " + v);
    }
  }
  auto variables = tmpl.variables();
  variables.push_back(kClock);
  auto edges = tmpl.edges();
  edges.push_back(LaggedEdge{kClock, 1, kClock});
  for (const auto& v : affected) {
    edges.push_back(LaggedEdge{kClock, 0, v});
  }
  // Revalidates temporally; adding the C chain needs at least lag 1.
  return StbnTemplate(std::move(variables), std::max(tmpl.max_lag(), 1),
                      std::move(edges));
}

}  // namespace causal
