#include "causal/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "causal/error.hpp"

namespace causal {

namespace {

// Kahan accumulator; keeps 1e-10 tolerances honest at the state-space cap.
struct Kahan {
  double sum = 0.0;
  double carry = 0.0;
  void add(double v) {
    const double y = v - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

JointTable::JointTable(std::vector<std::string> nodes,
                       std::vector<std::vector<std::string>> domains,
                       std::vector<double> probs)
    : nodes_(std::move(nodes)),
      domains_(std::move(domains)),
      probs_(std::move(probs)) {
  strides_.assign(nodes_.size(), 1);
  std::size_t total = 1;
  for (std::size_t v = nodes_.size(); v-- > 0;) {
    strides_[v] = total;
    total *= domains_[v].size();
  }
  if (total != probs_.size()) {
    throw InternalError("joint table size mismatch");
  }
  for (std::size_t v = 0; v < nodes_.size(); ++v) index_[nodes_[v]] = v;
}

std::size_t JointTable::node_index(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) {
    throw QueryError("joint table does not cover node " + label);
  }
  return it->second;
}

void JointTable::decode(std::size_t index,
                        std::vector<std::size_t>& out) const {
  out.resize(nodes_.size());
  for (std::size_t v = 0; v < nodes_.size(); ++v) {
    out[v] = (index / strides_[v]) % domains_[v].size();
  }
}

double JointTable::event_prob(
    const std::vector<std::pair<std::size_t, std::size_t>>& fixed) const {
  Kahan acc;
  std::vector<std::size_t> values;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    decode(i, values);
    bool match = true;
    for (const auto& [node, value] : fixed) {
      if (values[node] != value) {
        match = false;
        break;
      }
    }
    if (match) acc.add(probs_[i]);
  }
  return acc.sum;
}

double JointTable::event_prob(const DiscreteAssignment& event) const {
  std::vector<std::pair<std::size_t, std::size_t>> fixed;
  for (const auto& [node, value] : event) {
    const std::size_t v = node_index(node);
    const auto& domain = domains_[v];
    std::size_t k = 0;
    while (k < domain.size() && domain[k] != value) ++k;
    if (k == domain.size()) {
      throw QueryError("value '" + value + "' is not in the domain of " +
                       node);
    }
    fixed.emplace_back(v, k);
  }
  return event_prob(fixed);
}

double JointTable::total_mass() const {
  Kahan acc;
  for (double p : probs_) acc.add(p);
  return acc.sum;
}

std::map<std::string, double> JointTable::marginal(
    const std::string& node) const {
  const std::size_t v = node_index(node);
  std::map<std::string, double> out;
  for (std::size_t k = 0; k < domains_[v].size(); ++k) {
    out[domains_[v][k]] = event_prob({{v, k}});
  }
  return out;
}

JointTable enumerate_joint(const CptModel& m, std::size_t cap) {
  const Dag& g = m.graph();
  const std::size_t n = g.node_count();
  std::size_t total = 1;
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t d = m.domain_size(v);
    if (total > cap / d) {
      std::size_t product = total;
      for (std::size_t w = v; w < n; ++w) product *= m.domain_size(w);
      throw QueryError("state space of " + std::to_string(product) +
                       " assignments exceeds the cap of " +
                       std::to_string(cap));
    }
    total *= d;
  }

  std::vector<std::vector<std::string>> domains;
  domains.reserve(n);
  for (std::size_t v = 0; v < n; ++v) {
    domains.push_back(m.domain(g.nodes()[v]));
  }

  std::vector<double> probs(total, 0.0);
  std::vector<std::size_t> values(n, 0);
  for (std::size_t i = 0; i < total; ++i) {
    // Mixed-radix decode, first node most significant.
    std::size_t rem = i;
    for (std::size_t v = n; v-- > 0;) {
      values[v] = rem % domains[v].size();
      rem /= domains[v].size();
    }
    double p = 1.0;
    for (std::size_t v = 0; v < n && p != 0.0; ++v) {
      p *= m.prob(v, values[v], values);
    }
    probs[i] = p;
  }
  return JointTable(g.nodes(), std::move(domains), std::move(probs));
}

std::map<std::string, double> interventional_oracle(
    const CptModel& m, const DiscreteIntervention& forced,
    const std::string& target, std::size_t cap) {
  m.graph().index_of(target);
  const JointTable joint = enumerate_joint(m.intervene(forced), cap);
  return joint.marginal(target);
}

CiResult ci_test_exact(const JointTable& joint,
                       const std::vector<std::string>& x,
                       const std::vector<std::string>& y,
                       const std::vector<std::string>& z, double tol) {
  std::set<std::string> seen;
  for (const auto* group : {&x, &y, &z}) {
    for (const auto& node : *group) {
      joint.node_index(node);
      if (!seen.insert(node).second) {
        throw QueryError("overlapping sets: node " + node +
                         " appears in more than one of x, y, z");
      }
    }
  }
  if (x.empty() || y.empty()) {
    throw QueryError("ci_test_exact requires non-empty x and y");
  }

  auto indices = [&joint](const std::vector<std::string>& names) {
    std::vector<std::size_t> out;
    for (const auto& n : names) out.push_back(joint.node_index(n));
    return out;
  };
  const auto xi = indices(x);
  const auto yi = indices(y);
  const auto zi = indices(z);

  auto config_count = [&joint](const std::vector<std::size_t>& vars) {
    std::size_t total = 1;
    for (std::size_t v : vars) total *= joint.domains()[v].size();
    return total;
  };
  const std::size_t nx = config_count(xi);
  const std::size_t ny = config_count(yi);
  const std::size_t nz = config_count(zi);

  // One pass over the joint accumulates the stratified contingency cube
  // with compensated sums; the product rule is then checked per stratum.
  std::vector<Kahan> cube(nx * ny * nz);
  std::vector<std::size_t> values;
  auto config_of = [&joint, &values](const std::vector<std::size_t>& vars) {
    std::size_t code = 0;
    for (std::size_t v : vars) {
      code = code * joint.domains()[v].size() + values[v];
    }
    return code;
  };
  for (std::size_t i = 0; i < joint.size(); ++i) {
    joint.decode(i, values);
    const std::size_t cell =
        (config_of(zi) * nx + config_of(xi)) * ny + config_of(yi);
    cube[cell].add(joint.prob(i));
  }

  CiResult result;
  result.independent = true;
  std::vector<double> px(nx), py(ny);
  for (std::size_t zc = 0; zc < nz; ++zc) {
    double pz = 0.0;
    std::fill(px.begin(), px.end(), 0.0);
    std::fill(py.begin(), py.end(), 0.0);
    for (std::size_t xc = 0; xc < nx; ++xc) {
      for (std::size_t yc = 0; yc < ny; ++yc) {
        const double p = cube[(zc * nx + xc) * ny + yc].sum;
        pz += p;
        px[xc] += p;
        py[yc] += p;
      }
    }
    if (pz <= 0.0) {
      ++result.skipped_strata;
      continue;
    }
    for (std::size_t xc = 0; xc < nx; ++xc) {
      for (std::size_t yc = 0; yc < ny; ++yc) {
        const double pxy_z = cube[(zc * nx + xc) * ny + yc].sum / pz;
        if (std::abs(pxy_z - (px[xc] / pz) * (py[yc] / pz)) > tol) {
          result.independent = false;
          return result;
        }
      }
    }
  }
  return result;
}

}  // namespace causal
