#include "causal/graph.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <set>
#include <sstream>

#include "causal/error.hpp"

namespace causal {

namespace {

std::string join(const std::vector<std::string>& parts,
                 const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

Dag::Dag(std::vector<std::string> nodes,
         std::vector<std::pair<std::string, std::string>> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  index_.reserve(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].empty()) {
      throw GraphError("node labels must be non-empty");
    }
    if (!index_.emplace(nodes_[i], i).second) {
      throw GraphError("duplicate node: " + nodes_[i]);
    }
  }

  children_.assign(nodes_.size(), {});
  parents_.assign(nodes_.size(), {});
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& [from, to] : edges_) {
    auto fi = index_.find(from);
    auto ti = index_.find(to);
    if (fi == index_.end()) {
      throw GraphError("edge endpoint is not a declared node: " + from);
    }
    if (ti == index_.end()) {
      throw GraphError("edge endpoint is not a declared node: " + to);
    }
    if (fi->second == ti->second) {
      throw GraphError("self-loop on node: " + from);
    }
    if (!seen.emplace(fi->second, ti->second).second) {
      throw GraphError("duplicate edge: " + from + " -> " + to);
    }
    children_[fi->second].push_back(ti->second);
    parents_[ti->second].push_back(fi->second);
  }

  auto by_label = [this](std::size_t a, std::size_t b) {
    return nodes_[a] < nodes_[b];
  };
  for (auto& adj : children_) std::sort(adj.begin(), adj.end(), by_label);
  for (auto& adj : parents_) std::sort(adj.begin(), adj.end(), by_label);

  // Kahn's algorithm. Ties are broken by insertion order so the cached
  // topological order is deterministic.
  std::vector<std::size_t> indegree(nodes_.size(), 0);
  for (std::size_t v = 0; v < nodes_.size(); ++v) {
    indegree[v] = parents_[v].size();
  }
  std::deque<std::size_t> ready;
  for (std::size_t v = 0; v < nodes_.size(); ++v) {
    if (indegree[v] == 0) ready.push_back(v);
  }
  std::vector<std::size_t> order;
  order.reserve(nodes_.size());
  while (!ready.empty()) {
    std::size_t v = ready.front();
    ready.pop_front();
    order.push_back(v);
    for (std::size_t c : children_[v]) {
      if (--indegree[c] == 0) ready.push_back(c);
    }
  }
  if (order.size() != nodes_.size()) {
    // Walk forward through still-cyclic nodes until one repeats.
    std::size_t start = 0;
    while (indegree[start] == 0) ++start;
    std::vector<std::size_t> trail;
    std::vector<char> on_trail(nodes_.size(), 0);
    std::size_t v = start;
    while (!on_trail[v]) {
      on_trail[v] = 1;
      trail.push_back(v);
      for (std::size_t c : children_[v]) {
        if (indegree[c] > 0) {
          v = c;
          break;
        }
      }
    }
    auto it = std::find(trail.begin(), trail.end(), v);
    std::vector<std::string> cycle;
    for (; it != trail.end(); ++it) cycle.push_back(nodes_[*it]);
    cycle.push_back(nodes_[v]);
    throw GraphError("cycle detected: " + join(cycle, " -> "));
  }
  topo_order_.reserve(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    topo_order_.push_back(nodes_[order[i]]);
    topo_rank_[nodes_[order[i]]] = i;
  }
}

bool Dag::has_node(const std::string& label) const {
  return index_.count(label) > 0;
}

bool Dag::has_edge(const std::string& from, const std::string& to) const {
  if (!has_node(from) || !has_node(to)) return false;
  std::size_t ti = index_.at(to);
  const auto& adj = children_[index_.at(from)];
  return std::find(adj.begin(), adj.end(), ti) != adj.end();
}

std::size_t Dag::index_of(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) {
    throw GraphError("unknown node: " + label);
  }
  return it->second;
}

std::size_t Dag::topological_rank(const std::string& label) const {
  index_of(label);  // validates
  return topo_rank_.at(label);
}

std::vector<std::string> Dag::labels_sorted(
    const std::vector<std::size_t>& idx) const {
  std::vector<std::string> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(nodes_[i]);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> Dag::parents(const std::string& v) const {
  return labels_sorted(parents_[index_of(v)]);
}

std::vector<std::string> Dag::children(const std::string& v) const {
  return labels_sorted(children_[index_of(v)]);
}

std::vector<std::size_t> Dag::closure(std::size_t start, bool forward) const {
  const auto& adj = forward ? children_ : parents_;
  std::vector<char> seen(nodes_.size(), 0);
  std::deque<std::size_t> queue{start};
  std::vector<std::size_t> out;
  while (!queue.empty()) {
    std::size_t v = queue.front();
    queue.pop_front();
    for (std::size_t n : adj[v]) {
      if (!seen[n]) {
        seen[n] = 1;
        out.push_back(n);
        queue.push_back(n);
      }
    }
  }
  return out;
}

std::vector<std::string> Dag::ancestors(const std::string& v) const {
  return labels_sorted(closure(index_of(v), /*forward=*/false));
}

std::vector<std::string> Dag::descendants(const std::string& v) const {
  return labels_sorted(closure(index_of(v), /*forward=*/true));
}

Relatives Dag::relatives(const std::string& v) const {
  return Relatives{parents(v), children(v), ancestors(v), descendants(v)};
}

bool Dag::has_directed_path(const std::string& from,
                            const std::string& to) const {
  std::size_t target = index_of(to);
  for (std::size_t d : closure(index_of(from), /*forward=*/true)) {
    if (d == target) return true;
  }
  return false;
}

// Shared DFS for both path enumerations. Neighbours are visited in label
// order, so emitted paths come out lexicographic by node sequence.
namespace {

struct PathSearch {
  const Dag& g;
  const std::vector<std::string>& nodes;
  std::size_t target;
  std::size_t cap;
  bool undirected;
  std::vector<Path>* out;
  std::vector<std::size_t> trail;
  std::vector<Step> steps;
  std::vector<char> on_trail;

  void run(std::size_t v) {
    if (v == target) {
      if (out->size() >= cap) {
        throw PathLimitError("path enumeration exceeded cap of " +
                             std::to_string(cap) + " paths");
      }
      Path p;
      for (std::size_t i : trail) p.nodes.push_back(nodes[i]);
      p.steps = steps;
      out->push_back(std::move(p));
      return;
    }
    // Merge children and parents in label order.
    std::vector<std::pair<std::size_t, Step>> next;
    for (const auto& c : g.children(nodes[v])) {
      next.emplace_back(g.index_of(c), Step::Along);
    }
    if (undirected) {
      for (const auto& p : g.parents(nodes[v])) {
        next.emplace_back(g.index_of(p), Step::Against);
      }
      std::sort(next.begin(), next.end(),
                [this](const auto& a, const auto& b) {
                  return nodes[a.first] < nodes[b.first];
                });
    }
    for (const auto& [n, step] : next) {
      if (on_trail[n]) continue;
      on_trail[n] = 1;
      trail.push_back(n);
      steps.push_back(step);
      run(n);
      steps.pop_back();
      trail.pop_back();
      on_trail[n] = 0;
    }
  }
};

std::vector<Path> enumerate_paths(const Dag& g, const std::string& a,
                                  const std::string& b, std::size_t cap,
                                  bool undirected) {
  std::size_t ai = g.index_of(a);
  std::size_t bi = g.index_of(b);
  if (ai == bi) {
    throw GraphError("path endpoints must differ: " + a);
  }
  std::vector<Path> out;
  PathSearch search{g,   g.nodes(), bi, cap, undirected, &out, {ai}, {},
                    std::vector<char>(g.node_count(), 0)};
  search.on_trail[ai] = 1;
  search.run(ai);
  return out;
}

}  // namespace

std::vector<Path> Dag::undirected_paths(const std::string& a,
                                        const std::string& b,
                                        std::size_t cap) const {
  return enumerate_paths(*this, a, b, cap, /*undirected=*/true);
}

std::vector<Path> Dag::directed_paths(const std::string& source,
                                      const std::string& target,
                                      std::size_t cap) const {
  return enumerate_paths(*this, source, target, cap, /*undirected=*/false);
}

Dag Dag::cut_incoming(const std::vector<std::string>& targets) const {
  std::set<std::string> cut;
  for (const auto& t : targets) {
    index_of(t);
    cut.insert(t);
  }
  std::vector<std::pair<std::string, std::string>> kept;
  for (const auto& e : edges_) {
    if (!cut.count(e.second)) kept.push_back(e);
  }
  return Dag(nodes_, std::move(kept));
}

Dag Dag::cut_outgoing(const std::vector<std::string>& targets) const {
  std::set<std::string> cut;
  for (const auto& t : targets) {
    index_of(t);
    cut.insert(t);
  }
  std::vector<std::pair<std::string, std::string>> kept;
  for (const auto& e : edges_) {
    if (!cut.count(e.first)) kept.push_back(e);
  }
  return Dag(nodes_, std::move(kept));
}

}  // namespace causal
