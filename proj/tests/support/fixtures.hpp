#ifndef CAUSAL_TESTS_FIXTURES_HPP
#define CAUSAL_TESTS_FIXTURES_HPP

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "causal/dsep.hpp"
#include "causal/graph.hpp"
#include "causal/oracle.hpp"
#include "causal/pom.hpp"
#include "causal/rng.hpp"
#include "causal/scm.hpp"

namespace causal::testing {

// Three-node triangle X1 -> X2, X1 -> X3, X2 -> X3 with coefficients
// a = 0.5 (X1->X2), b = 0.7 (X1->X3), c = 0.4 (X2->X3).
inline Dag triangle_dag() {
  return Dag({"X1", "X2", "X3"},
             {{"X1", "X2"}, {"X1", "X3"}, {"X2", "X3"}});
}

inline LinearScm triangle_scm() {
  return LinearScm(triangle_dag(),
                   {{{"X1", "X2"}, 0.5},
                    {{"X1", "X3"}, 0.7},
                    {{"X2", "X3"}, 0.4}},
                   {{"X1", {"U1", 0.0, 1.0}},
                    {"X2", {"U2", 0.0, 1.0}},
                    {"X3", {"U3", 0.0, 1.0}}});
}

// Confounded treatment: X -> T, X -> Y, T -> Y.
inline Dag confounded_dag() {
  return Dag({"X", "T", "Y"}, {{"X", "T"}, {"X", "Y"}, {"T", "Y"}});
}

// Binary CPT model on the confounded structure with fixed, non-degenerate
// probabilities.
inline CptModel confounded_cpt() {
  std::map<std::string, std::vector<std::string>> domains{
      {"X", {"0", "1"}}, {"T", {"0", "1"}}, {"Y", {"0", "1"}}};
  std::map<std::string, std::vector<CptRow>> tables;
  tables["X"] = {{{}, {0.6, 0.4}}};
  tables["T"] = {{{{"X", "0"}}, {0.7, 0.3}}, {{{"X", "1"}}, {0.2, 0.8}}};
  tables["Y"] = {{{{"T", "0"}, {"X", "0"}}, {0.8, 0.2}},
                 {{{"T", "0"}, {"X", "1"}}, {0.5, 0.5}},
                 {{{"T", "1"}, {"X", "0"}}, {0.4, 0.6}},
                 {{{"T", "1"}, {"X", "1"}}, {0.1, 0.9}}};
  return CptModel(confounded_dag(), std::move(domains), std::move(tables));
}

inline Dag collider_dag() {
  return Dag({"A", "B", "C"}, {{"A", "C"}, {"B", "C"}});
}

inline Dag chain_dag(std::size_t n, const std::string& prefix = "X") {
  std::vector<std::string> nodes;
  std::vector<std::pair<std::string, std::string>> edges;
  for (std::size_t i = 1; i <= n; ++i) {
    nodes.push_back(prefix + std::to_string(i));
  }
  for (std::size_t i = 1; i < n; ++i) {
    edges.emplace_back(prefix + std::to_string(i),
                       prefix + std::to_string(i + 1));
  }
  return Dag(std::move(nodes), std::move(edges));
}

// Random DAG over V1..Vn (declared in topological order) with independent
// edge probability `edge_p`.
inline Dag random_dag(Rng& rng, std::size_t min_n, std::size_t max_n,
                      double edge_p = 0.4) {
  const std::size_t n = min_n + rng.below(max_n - min_n + 1);
  std::vector<std::string> nodes;
  for (std::size_t i = 1; i <= n; ++i) nodes.push_back("V" + std::to_string(i));
  std::vector<std::pair<std::string, std::string>> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rng.uniform01() < edge_p) edges.emplace_back(nodes[i], nodes[j]);
    }
  }
  return Dag(std::move(nodes), std::move(edges));
}

// Random binary CPTs with entries clamped into [lo, 1-lo], keeping the
// fixtures away from degenerate and faithfulness-violating corners.
inline CptModel random_binary_cpt(const Dag& g, Rng& rng, double lo = 0.05) {
  std::map<std::string, std::vector<std::string>> domains;
  std::map<std::string, std::vector<std::vector<double>>> rows;
  for (const auto& node : g.nodes()) {
    domains[node] = {"0", "1"};
    std::size_t nrows = 1;
    for (std::size_t k = 0; k < g.parents(node).size(); ++k) nrows *= 2;
    std::vector<std::vector<double>> table;
    for (std::size_t r = 0; r < nrows; ++r) {
      const double p1 = lo + (1.0 - 2.0 * lo) * rng.uniform01();
      table.push_back({1.0 - p1, p1});
    }
    rows[node] = std::move(table);
  }
  return CptModel::from_flat(g, std::move(domains), std::move(rows));
}

// Enumeration-based d-separation oracle: every undirected path between
// every (x, y) pair must be blocked. Exponential; small graphs only.
inline bool d_separated_by_enumeration(const Dag& g,
                                       const std::vector<std::string>& x,
                                       const std::vector<std::string>& y,
                                       const std::vector<std::string>& z) {
  for (const auto& a : x) {
    for (const auto& b : y) {
      for (const auto& p : g.undirected_paths(a, b)) {
        if (!path_blocked(g, p, z)) return false;
      }
    }
  }
  return true;
}

// Independent backtracking count of simple undirected-sense paths, written
// against a raw adjacency matrix rather than the Dag accessors.
inline std::size_t path_count_oracle(const Dag& g, const std::string& a,
                                     const std::string& b) {
  const std::size_t n = g.node_count();
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  for (const auto& [from, to] : g.edges()) {
    adj[g.index_of(from)][g.index_of(to)] = true;
    adj[g.index_of(to)][g.index_of(from)] = true;
  }
  std::vector<bool> used(n, false);
  std::size_t count = 0;
  const std::size_t target = g.index_of(b);
  auto dfs = [&](auto&& self, std::size_t v) -> void {
    if (v == target) {
      ++count;
      return;
    }
    for (std::size_t w = 0; w < n; ++w) {
      if (adj[v][w] && !used[w]) {
        used[w] = true;
        self(self, w);
        used[w] = false;
      }
    }
  };
  const std::size_t start = g.index_of(a);
  used[start] = true;
  dfs(dfs, start);
  return count;
}

inline double tv_distance(const std::map<std::string, double>& p,
                          const std::map<std::string, double>& q) {
  double tv = 0.0;
  for (const auto& [k, v] : p) {
    auto it = q.find(k);
    tv += std::abs(v - (it == q.end() ? 0.0 : it->second));
  }
  for (const auto& [k, v] : q) {
    if (!p.count(k)) tv += std::abs(v);
  }
  return tv / 2.0;
}

// Treatment/outcome table built from simulated CPT rows; covariates stay
// categorical, the outcome label must parse as a number.
inline PomTable pom_from_simulation(const std::vector<DiscreteAssignment>& rows,
                                    const std::string& t_node,
                                    const std::string& y_node,
                                    const std::vector<std::string>& x_nodes) {
  std::vector<CovariateSchema> schema;
  for (const auto& x : x_nodes) {
    schema.push_back(CovariateSchema{x, CovariateKind::Categorical});
  }
  std::vector<PomRow> out;
  std::size_t id = 0;
  for (const auto& row : rows) {
    PomRow r;
    r.unit = "u" + std::to_string(id++);
    r.treatment = row.at(t_node) == "1" ? 1 : 0;
    r.outcome = std::stod(row.at(y_node));
    for (const auto& x : x_nodes) r.covariates.emplace_back(row.at(x));
    out.push_back(std::move(r));
  }
  return PomTable(std::move(schema), std::move(out));
}

}  // namespace causal::testing

#endif  // CAUSAL_TESTS_FIXTURES_HPP
