#include "causal/dsep.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "causal/error.hpp"

namespace causal {

namespace {

std::set<std::string> to_set(const std::vector<std::string>& v) {
  return std::set<std::string>(v.begin(), v.end());
}

void require_known(const Dag& g, const std::vector<std::string>& v) {
  for (const auto& n : v) g.index_of(n);
}

void require_disjoint(const std::set<std::string>& a,
                      const std::set<std::string>& b, const char* what) {
  for (const auto& n : a) {
    if (b.count(n)) {
      throw QueryError(std::string("overlapping sets: node ") + n + " " +
                       what);
    }
  }
}

}  // namespace

bool path_blocked(const Dag& g, const Path& p,
                  const std::vector<std::string>& z) {
  if (p.nodes.size() < 2 || p.steps.size() != p.nodes.size() - 1) {
    throw QueryError("malformed path: node/step arity mismatch");
  }
  for (std::size_t i = 0; i + 1 < p.nodes.size(); ++i) {
    const auto& from = p.nodes[i];
    const auto& to = p.nodes[i + 1];
    bool ok = p.steps[i] == Step::Along ? g.has_edge(from, to)
                                        : g.has_edge(to, from);
    if (!ok) {
      throw QueryError("malformed path: no edge between " + from + " and " +
                       to);
    }
  }
  auto zset = to_set(z);
  require_known(g, z);
  if (zset.count(p.nodes.front()) || zset.count(p.nodes.back())) {
    throw QueryError("conditioning set must not contain path endpoints");
  }

  for (std::size_t i = 1; i + 1 < p.nodes.size(); ++i) {
    const auto& v = p.nodes[i];
    bool collider = p.steps[i - 1] == Step::Along && p.steps[i] == Step::Against;
    if (collider) {
      bool opened = zset.count(v) > 0;
      if (!opened) {
        for (const auto& d : g.descendants(v)) {
          if (zset.count(d)) {
            opened = true;
            break;
          }
        }
      }
      if (!opened) return true;  // rule 1
    } else if (zset.count(v)) {
      return true;  // rule 2
    }
  }
  return false;
}

// Reachability over (node, approach direction) states. Phase one marks z
// and its ancestors so colliders can be opened in O(1); phase two walks the
// active-trail transition rules. Linear in nodes + edges.
bool d_separated(const Dag& g, const std::vector<std::string>& x,
                 const std::vector<std::string>& y,
                 const std::vector<std::string>& z) {
  require_known(g, x);
  require_known(g, y);
  require_known(g, z);
  if (x.empty() || y.empty()) {
    throw QueryError("d-separation requires non-empty x and y");
  }
  auto xs = to_set(x);
  auto ys = to_set(y);
  auto zs = to_set(z);
  require_disjoint(xs, ys, "is in both x and y");
  require_disjoint(xs, zs, "is in both x and z");
  require_disjoint(ys, zs, "is in both y and z");

  const std::size_t n = g.node_count();
  std::vector<char> in_z(n, 0);
  std::vector<char> in_y(n, 0);
  std::vector<char> z_or_anc(n, 0);
  std::deque<std::size_t> queue;
  for (const auto& label : y) in_y[g.index_of(label)] = 1;
  for (const auto& label : z) {
    std::size_t i = g.index_of(label);
    in_z[i] = 1;
    if (!z_or_anc[i]) {
      z_or_anc[i] = 1;
      queue.push_back(i);
    }
  }
  while (!queue.empty()) {
    std::size_t v = queue.front();
    queue.pop_front();
    for (std::size_t p : g.parent_indices(v)) {
      if (!z_or_anc[p]) {
        z_or_anc[p] = 1;
        queue.push_back(p);
      }
    }
  }

  // State: (node, approached-from-child?). Starting nodes behave as if
  // approached from a child, which enables both directions.
  enum { FromChild = 0, FromParent = 1 };
  std::vector<std::array<char, 2>> visited(n, {0, 0});
  std::deque<std::pair<std::size_t, int>> active;
  for (const auto& label : x) {
    active.emplace_back(g.index_of(label), FromChild);
  }
  while (!active.empty()) {
    auto [v, dir] = active.front();
    active.pop_front();
    if (visited[v][dir]) continue;
    visited[v][dir] = 1;
    if (!in_z[v] && in_y[v]) return false;

    if (dir == FromChild && !in_z[v]) {
      for (std::size_t p : g.parent_indices(v)) {
        active.emplace_back(p, FromChild);
      }
      for (std::size_t c : g.child_indices(v)) {
        active.emplace_back(c, FromParent);
      }
    } else if (dir == FromParent) {
      if (!in_z[v]) {
        for (std::size_t c : g.child_indices(v)) {
          active.emplace_back(c, FromParent);
        }
      }
      if (z_or_anc[v]) {
        // Collider with z in its closure: the trail may turn upward.
        for (std::size_t p : g.parent_indices(v)) {
          active.emplace_back(p, FromChild);
        }
      }
    }
  }
  return true;
}

std::vector<Path> backdoor_paths(const Dag& g, const std::string& t,
                                 const std::string& y, std::size_t cap) {
  if (t == y) {
    throw QueryError("treatment and outcome must differ");
  }
  std::vector<Path> out;
  for (auto& p : g.undirected_paths(t, y, cap)) {
    if (!p.steps.empty() && p.steps.front() == Step::Against) {
      out.push_back(std::move(p));
    }
  }
  return out;
}

bool check_backdoor(const Dag& g, const std::vector<std::string>& t,
                    const std::string& y, const std::vector<std::string>& w) {
  require_known(g, t);
  g.index_of(y);
  require_known(g, w);
  auto ts = to_set(t);
  auto ws = to_set(w);
  if (ws.count(y)) {
    throw QueryError("overlapping sets: adjustment set contains outcome " + y);
  }
  require_disjoint(ws, ts, "is in both the adjustment and treatment sets");

  // Rule 1: no adjustment node descends from a treatment.
  for (const auto& tr : t) {
    for (const auto& d : g.descendants(tr)) {
      if (ws.count(d)) return false;
    }
  }
  // Rule 2: w blocks every back-door path from each treatment to y.
  for (const auto& tr : t) {
    for (const auto& p : backdoor_paths(g, tr, y)) {
      if (!path_blocked(g, p, w)) return false;
    }
  }
  return true;
}

std::vector<std::string> default_adjustment_set(
    const Dag& g, const std::vector<std::string>& t, const std::string& y) {
  require_known(g, t);
  g.index_of(y);
  auto ts = to_set(t);
  std::set<std::string> w;
  for (const auto& tr : t) {
    for (const auto& p : g.parents(tr)) {
      if (!ts.count(p)) w.insert(p);
    }
  }
  if (w.count(y)) {
    throw QueryError(
        "default adjustment set verification failed: outcome " + y +
        " is a parent of a treatment");
  }
  std::vector<std::string> out(w.begin(), w.end());
  if (!check_backdoor(g, t, y, out)) {
    throw QueryError(
        "default adjustment set verification failed: parents of the "
        "treatments do not satisfy the back-door criterion");
  }
  return out;
}

}  // namespace causal
