#include "causal/scm.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "causal/error.hpp"
#include "causal/ols.hpp"
#include "causal/rng.hpp"

namespace causal {

// ---------------------------------------------------------------------------
// LinearScm

LinearScm::LinearScm(Dag graph, CoeffMap coeff,
                     std::map<std::string, NoiseSpec> noise)
    : graph_(std::move(graph)) {
  terms_.assign(graph_.node_count(), {});
  for (const auto& [edge, weight] : coeff) {
    if (!graph_.has_edge(edge.first, edge.second)) {
      throw ModelError("coefficient for non-edge: " + edge.first + " -> " +
                       edge.second);
    }
    terms_[graph_.index_of(edge.second)].emplace_back(
        graph_.index_of(edge.first), weight);
  }
  for (std::size_t v = 0; v < graph_.node_count(); ++v) {
    const auto expected = graph_.parents(graph_.nodes()[v]);
    if (terms_[v].size() != expected.size()) {
      throw ModelError("node " + graph_.nodes()[v] +
                       " is missing a coefficient for one of its parents");
    }
    std::sort(terms_[v].begin(), terms_[v].end(),
              [this](const auto& a, const auto& b) {
                return graph_.nodes()[a.first] < graph_.nodes()[b.first];
              });
  }
  noise_.resize(graph_.node_count());
  for (std::size_t v = 0; v < graph_.node_count(); ++v) {
    const auto& label = graph_.nodes()[v];
    auto it = noise.find(label);
    if (it != noise.end()) {
      noise_[v] = it->second;
      if (noise_[v].name.empty()) noise_[v].name = "U_" + label;
    } else {
      noise_[v] = NoiseSpec{"U_" + label, 0.0, 0.0};
    }
    if (noise_[v].stddev < 0.0 || !std::isfinite(noise_[v].stddev) ||
        !std::isfinite(noise_[v].mean)) {
      throw ModelError("invalid noise parameters for node " + label);
    }
  }
  for (const auto& [label, spec] : noise) {
    graph_.index_of(label);  // reject noise entries for unknown nodes
  }
}

double LinearScm::coeff(const std::string& from, const std::string& to) const {
  std::size_t fi = graph_.index_of(from);
  for (const auto& [p, w] : terms_[graph_.index_of(to)]) {
    if (p == fi) return w;
  }
  throw ModelError("no coefficient: " + from + " -> " + to);
}

const NoiseSpec& LinearScm::noise(const std::string& node) const {
  return noise_[graph_.index_of(node)];
}

bool LinearScm::is_forced(const std::string& node) const {
  return forced_.count(node) > 0;
}

double LinearScm::forced_value(const std::string& node) const {
  auto it = forced_.find(node);
  if (it == forced_.end()) {
    throw ModelError("node is not forced: " + node);
  }
  return it->second;
}

double LinearScm::parent_sum(std::size_t node,
                             const std::vector<double>& values) const {
  double s = 0.0;
  for (const auto& [p, w] : terms_[node]) s += w * values[p];
  return s;
}

Assignment LinearScm::evaluate(const Assignment& noise_values) const {
  std::vector<double> x(graph_.node_count(), 0.0);
  for (const auto& label : graph_.topological_order()) {
    std::size_t v = graph_.index_of(label);
    auto f = forced_.find(label);
    if (f != forced_.end()) {
      x[v] = f->second;
      continue;
    }
    auto u = noise_values.find(label);
    if (u == noise_values.end()) {
      throw ModelError("missing noise entry for node " + label);
    }
    x[v] = parent_sum(v, x) + u->second;
  }
  Assignment out;
  for (std::size_t v = 0; v < graph_.node_count(); ++v) {
    out[graph_.nodes()[v]] = x[v];
  }
  return out;
}

Assignment LinearScm::abduct(const Assignment& observed) const {
  std::vector<double> x(graph_.node_count(), 0.0);
  for (std::size_t v = 0; v < graph_.node_count(); ++v) {
    auto it = observed.find(graph_.nodes()[v]);
    if (it == observed.end()) {
      throw ModelError("missing observed value for node " + graph_.nodes()[v]);
    }
    x[v] = it->second;
  }
  Assignment u;
  for (std::size_t v = 0; v < graph_.node_count(); ++v) {
    u[graph_.nodes()[v]] = x[v] - parent_sum(v, x);
  }
  return u;
}

LinearScm LinearScm::intervene(const LinearIntervention& forced) const {
  std::vector<std::string> cut;
  for (const auto& [node, value] : forced) {
    graph_.index_of(node);
    if (!std::isfinite(value)) {
      throw ModelError("forced value for " + node + " is not finite");
    }
    cut.push_back(node);
  }
  LinearScm out = *this;
  out.graph_ = graph_.cut_incoming(cut);
  for (const auto& [node, value] : forced) {
    std::size_t v = graph_.index_of(node);
    out.terms_[v].clear();
    out.noise_[v] = NoiseSpec{noise_[v].name, value, 0.0};
    out.forced_[node] = value;
  }
  return out;
}

Assignment LinearScm::counterfactual(const Assignment& observed,
                                     const LinearIntervention& forced) const {
  std::vector<double> old_x(graph_.node_count(), 0.0);
  for (std::size_t v = 0; v < graph_.node_count(); ++v) {
    auto it = observed.find(graph_.nodes()[v]);
    if (it == observed.end()) {
      throw ModelError("missing observed value for node " + graph_.nodes()[v]);
    }
    old_x[v] = it->second;
  }
  LinearScm world = intervene(forced);
  std::vector<double> new_x(graph_.node_count(), 0.0);
  for (const auto& label : graph_.topological_order()) {
    std::size_t v = graph_.index_of(label);
    auto f = world.forced_.find(label);
    if (f != world.forced_.end()) {
      new_x[v] = f->second;
      continue;
    }
    new_x[v] = old_x[v] + (world.parent_sum(v, new_x) -
                           world.parent_sum(v, old_x));
  }
  Assignment out;
  for (std::size_t v = 0; v < graph_.node_count(); ++v) {
    out[graph_.nodes()[v]] = new_x[v];
  }
  return out;
}

std::vector<Assignment> LinearScm::simulate(std::size_t n,
                                            std::uint64_t seed) const {
  if (n < 1) {
    throw ModelError("simulate requires n >= 1");
  }
  Rng rng(seed);
  std::vector<Assignment> rows;
  rows.reserve(n);
  std::vector<double> x(graph_.node_count(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& label : graph_.topological_order()) {
      std::size_t v = graph_.index_of(label);
      if (forced_.count(label)) {
        x[v] = forced_.at(label);
        continue;
      }
      x[v] = parent_sum(v, x) + rng.normal(noise_[v].mean, noise_[v].stddev);
    }
    Assignment row;
    for (std::size_t v = 0; v < graph_.node_count(); ++v) {
      row[graph_.nodes()[v]] = x[v];
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Assignment LinearScm::mean_prediction(const LinearIntervention& forced) const {
  const LinearScm world = forced.empty() ? *this : intervene(forced);
  Assignment means;
  for (std::size_t v = 0; v < graph_.node_count(); ++v) {
    means[graph_.nodes()[v]] = world.noise_[v].mean;
  }
  return world.evaluate(means);
}

LinearScm fit_linear(const std::vector<Assignment>& data, const Dag& g) {
  std::size_t max_indeg = 0;
  for (const auto& label : g.nodes()) {
    max_indeg = std::max(max_indeg, g.parents(label).size());
  }
  if (data.size() < max_indeg + 2) {
    throw ModelError("fit_linear needs at least " +
                     std::to_string(max_indeg + 2) + " rows, got " +
                     std::to_string(data.size()));
  }

  LinearScm::CoeffMap coeff;
  std::map<std::string, NoiseSpec> noise;
  for (const auto& label : g.nodes()) {
    const auto parents = g.parents(label);
    std::vector<std::vector<double>> design;
    std::vector<double> response;
    design.reserve(data.size());
    for (const auto& row : data) {
      auto yit = row.find(label);
      if (yit == row.end()) {
        throw ModelError("data row is missing node " + label);
      }
      std::vector<double> r;
      r.reserve(parents.size() + 1);
      r.push_back(1.0);
      for (const auto& p : parents) {
        auto pit = row.find(p);
        if (pit == row.end()) {
          throw ModelError("data row is missing node " + p);
        }
        r.push_back(pit->second);
      }
      design.push_back(std::move(r));
      response.push_back(yit->second);
    }
    const OlsFit fit = ols(design, response, label);
    for (std::size_t j = 0; j < parents.size(); ++j) {
      coeff[{parents[j], label}] = fit.beta[j + 1];
    }
    noise[label] = NoiseSpec{"U_" + label, fit.beta[0], std::sqrt(fit.sigma2)};
  }
  return LinearScm(g, std::move(coeff), std::move(noise));
}

// ---------------------------------------------------------------------------
// CptModel

CptModel::CptModel(Dag graph,
                   std::map<std::string, std::vector<std::string>> domains,
                   std::map<std::string, std::vector<CptRow>> tables)
    : graph_(std::move(graph)) {
  const std::size_t n = graph_.node_count();
  domains_.assign(n, {});
  parents_.assign(n, {});
  tables_.assign(n, {});
  strides_.assign(n, {});

  for (const auto& [label, domain] : domains) {
    std::size_t v = graph_.index_of(label);
    if (domain.empty()) {
      throw ModelError("empty domain for node " + label);
    }
    domains_[v] = domain;
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (domains_[v].empty()) {
      throw ModelError("no domain declared for node " + graph_.nodes()[v]);
    }
    for (const auto& p : graph_.parents(graph_.nodes()[v])) {
      parents_[v].push_back(graph_.index_of(p));
    }
  }

  for (std::size_t v = 0; v < n; ++v) {
    const auto& label = graph_.nodes()[v];
    std::size_t rows = 1;
    strides_[v].assign(parents_[v].size(), 1);
    for (std::size_t j = parents_[v].size(); j-- > 0;) {
      strides_[v][j] = rows;
      rows *= domains_[parents_[v][j]].size();
    }
    auto it = tables.find(label);
    if (it == tables.end()) {
      throw ModelError("no CPT declared for node " + label);
    }
    if (it->second.size() != rows) {
      throw ModelError("node " + label + " needs " + std::to_string(rows) +
                       " CPT rows, got " + std::to_string(it->second.size()));
    }
    const std::size_t dsize = domains_[v].size();
    tables_[v].assign(rows * dsize, -1.0);
    for (const auto& row : it->second) {
      if (row.given.size() != parents_[v].size()) {
        throw ModelError("CPT row for node " + label +
                         " does not address exactly its parents");
      }
      std::size_t offset = 0;
      for (std::size_t j = 0; j < parents_[v].size(); ++j) {
        const auto& pname = graph_.nodes()[parents_[v][j]];
        auto git = row.given.find(pname);
        if (git == row.given.end()) {
          throw ModelError("CPT row for node " + label +
                           " is missing parent value for " + pname);
        }
        offset += strides_[v][j] * value_index(pname, git->second);
      }
      if (row.probs.size() != dsize) {
        throw ModelError("CPT row for node " + label + " has " +
                         std::to_string(row.probs.size()) +
                         " entries, domain has " + std::to_string(dsize));
      }
      if (tables_[v][offset * dsize] >= 0.0) {
        throw ModelError("duplicate CPT row for node " + label);
      }
      std::copy(row.probs.begin(), row.probs.end(),
                tables_[v].begin() + offset * dsize);
    }
  }
  validate();
}

CptModel CptModel::from_flat(
    Dag graph, std::map<std::string, std::vector<std::string>> domains,
    std::map<std::string, std::vector<std::vector<double>>> rows) {
  CptModel m;
  m.graph_ = std::move(graph);
  const std::size_t n = m.graph_.node_count();
  m.domains_.assign(n, {});
  m.parents_.assign(n, {});
  m.tables_.assign(n, {});
  m.strides_.assign(n, {});
  for (const auto& [label, domain] : domains) {
    std::size_t v = m.graph_.index_of(label);
    if (domain.empty()) {
      throw ModelError("empty domain for node " + label);
    }
    m.domains_[v] = domain;
  }
  for (std::size_t v = 0; v < n; ++v) {
    const auto& label = m.graph_.nodes()[v];
    if (m.domains_[v].empty()) {
      throw ModelError("no domain declared for node " + label);
    }
    for (const auto& p : m.graph_.parents(label)) {
      m.parents_[v].push_back(m.graph_.index_of(p));
    }
    std::size_t nrows = 1;
    m.strides_[v].assign(m.parents_[v].size(), 1);
    for (std::size_t j = m.parents_[v].size(); j-- > 0;) {
      m.strides_[v][j] = nrows;
      nrows *= m.domains_[m.parents_[v][j]].size();
    }
    auto it = rows.find(label);
    if (it == rows.end() || it->second.size() != nrows) {
      throw ModelError("node " + label + " needs " + std::to_string(nrows) +
                       " CPT rows");
    }
    const std::size_t dsize = m.domains_[v].size();
    m.tables_[v].reserve(nrows * dsize);
    for (const auto& r : it->second) {
      if (r.size() != dsize) {
        throw ModelError("CPT row width mismatch for node " + label);
      }
      m.tables_[v].insert(m.tables_[v].end(), r.begin(), r.end());
    }
  }
  m.validate();
  return m;
}

void CptModel::validate() {
  for (std::size_t v = 0; v < graph_.node_count(); ++v) {
    const auto& label = graph_.nodes()[v];
    const std::size_t dsize = domains_[v].size();
    std::set<std::string> seen(domains_[v].begin(), domains_[v].end());
    if (seen.size() != dsize) {
      throw ModelError("duplicate domain value for node " + label);
    }
    for (std::size_t r = 0; r * dsize < tables_[v].size(); ++r) {
      double sum = 0.0;
      for (std::size_t k = 0; k < dsize; ++k) {
        const double p = tables_[v][r * dsize + k];
        if (p < 0.0 || p > 1.0 + 1e-12 || !std::isfinite(p)) {
          throw ModelError("CPT entry out of [0,1] for node " + label +
                           ", row " + std::to_string(r));
        }
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9) {
        throw ModelError("CPT row " + std::to_string(r) + " for node " +
                         label + " sums to " + std::to_string(sum) +
                         ", expected 1");
      }
    }
  }
}

const std::vector<std::string>& CptModel::domain(
    const std::string& node) const {
  return domains_[graph_.index_of(node)];
}

std::size_t CptModel::value_index(const std::string& node,
                                  const std::string& value) const {
  const auto& domain = domains_[graph_.index_of(node)];
  for (std::size_t i = 0; i < domain.size(); ++i) {
    if (domain[i] == value) return i;
  }
  throw ModelError("value '" + value + "' is not in the domain of " + node);
}

std::size_t CptModel::row_offset(std::size_t node_index,
                                 const std::vector<std::size_t>& full) const {
  std::size_t offset = 0;
  for (std::size_t j = 0; j < parents_[node_index].size(); ++j) {
    offset += strides_[node_index][j] * full[parents_[node_index][j]];
  }
  return offset;
}

double CptModel::prob(std::size_t node_index, std::size_t value_index,
                      const std::vector<std::size_t>& full) const {
  const std::size_t dsize = domains_[node_index].size();
  return tables_[node_index][row_offset(node_index, full) * dsize +
                             value_index];
}

const std::vector<double>& CptModel::table(const std::string& node) const {
  return tables_[graph_.index_of(node)];
}

CptModel CptModel::intervene(const DiscreteIntervention& forced) const {
  std::vector<std::string> cut;
  for (const auto& [node, value] : forced) {
    value_index(node, value);  // validates node and value
    cut.push_back(node);
  }
  CptModel out;
  out.graph_ = graph_.cut_incoming(cut);
  out.domains_ = domains_;
  const std::size_t n = graph_.node_count();
  out.parents_.assign(n, {});
  out.strides_.assign(n, {});
  out.tables_.assign(n, {});
  for (std::size_t v = 0; v < n; ++v) {
    const auto& label = graph_.nodes()[v];
    auto f = forced.find(label);
    if (f != forced.end()) {
      // Point mass, no parents: P(X = x | anything) = 1 at the forced value.
      out.tables_[v].assign(domains_[v].size(), 0.0);
      out.tables_[v][value_index(label, f->second)] = 1.0;
    } else {
      out.parents_[v] = parents_[v];
      out.strides_[v] = strides_[v];
      out.tables_[v] = tables_[v];
    }
  }
  return out;
}

std::vector<DiscreteAssignment> CptModel::simulate(std::size_t n,
                                                   std::uint64_t seed) const {
  if (n < 1) {
    throw ModelError("simulate requires n >= 1");
  }
  Rng rng(seed);
  std::vector<DiscreteAssignment> rows;
  rows.reserve(n);
  std::vector<std::size_t> full(graph_.node_count(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& label : graph_.topological_order()) {
      const std::size_t v = graph_.index_of(label);
      const std::size_t dsize = domains_[v].size();
      const std::size_t off = row_offset(v, full) * dsize;
      const double u = rng.uniform01();
      double cum = 0.0;
      std::size_t pick = dsize - 1;
      for (std::size_t k = 0; k < dsize; ++k) {
        cum += tables_[v][off + k];
        if (u < cum) {
          pick = k;
          break;
        }
      }
      full[v] = pick;
    }
    DiscreteAssignment row;
    for (std::size_t v = 0; v < graph_.node_count(); ++v) {
      row[graph_.nodes()[v]] = domains_[v][full[v]];
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void CptModel::counterfactual(const DiscreteAssignment&,
                              const DiscreteIntervention&) const {
  throw UnsupportedError(
      "unit-level counterfactuals are not defined for CPT models: "
      "abduction needs an invertible mechanism; use interventional "
      "queries (do / identify) instead");
}

}  // namespace causal
