#ifndef CAUSAL_GRAPH_HPP
#define CAUSAL_GRAPH_HPP

#include <cstddef>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace causal {

// Traversal direction of one path step relative to the underlying edge.
enum class Step {
  Along,    // edge points from nodes[i] to nodes[i+1]
  Against,  // edge points from nodes[i+1] to nodes[i]
};

// A simple path over named nodes. steps.size() == nodes.size() - 1, and
// steps[i] records how the edge between nodes[i] and nodes[i+1] is oriented.
struct Path {
  std::vector<std::string> nodes;
  std::vector<Step> steps;

  bool operator==(const Path& other) const = default;
};

struct Relatives {
  std::vector<std::string> parents;
  std::vector<std::string> children;
  std::vector<std::string> ancestors;
  std::vector<std::string> descendants;
};

// Directed acyclic graph over string-labelled nodes.
//
// Node order is the declared insertion order; every set-valued query result
// is returned sorted by label so outputs are reproducible. A Dag is immutable
// after construction and safe to query from multiple threads.
class Dag {
 public:
  static constexpr std::size_t kDefaultPathCap = 1000000;

  // The empty graph.
  Dag() = default;

  // Validates labels, endpoints, self-loops, duplicates, and acyclicity.
  // A cycle is reported with one offending node sequence in the message.
  Dag(std::vector<std::string> nodes,
      std::vector<std::pair<std::string, std::string>> edges);

  const std::vector<std::string>& nodes() const { return nodes_; }
  const std::vector<std::pair<std::string, std::string>>& edges() const {
    return edges_;
  }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  bool has_node(const std::string& label) const;
  bool has_edge(const std::string& from, const std::string& to) const;

  // Index of a node in insertion order; throws GraphError if unknown.
  std::size_t index_of(const std::string& label) const;

  // Cached at construction; every edge goes forward in this order.
  const std::vector<std::string>& topological_order() const {
    return topo_order_;
  }
  // Position of a node within topological_order().
  std::size_t topological_rank(const std::string& label) const;

  std::vector<std::string> parents(const std::string& v) const;
  std::vector<std::string> children(const std::string& v) const;

  // Index-based adjacency (label-sorted), for traversal-heavy callers.
  const std::vector<std::size_t>& parent_indices(std::size_t v) const {
    return parents_[v];
  }
  const std::vector<std::size_t>& child_indices(std::size_t v) const {
    return children_[v];
  }
  std::vector<std::string> ancestors(const std::string& v) const;
  std::vector<std::string> descendants(const std::string& v) const;
  Relatives relatives(const std::string& v) const;

  // All simple paths between a and b ignoring edge orientation, in
  // lexicographic order of their node label sequences. Throws PathLimitError
  // once more than `cap` paths would be produced.
  std::vector<Path> undirected_paths(const std::string& a,
                                     const std::string& b,
                                     std::size_t cap = kDefaultPathCap) const;

  // All simple directed paths from source to target, lexicographic order.
  std::vector<Path> directed_paths(const std::string& source,
                                   const std::string& target,
                                   std::size_t cap = kDefaultPathCap) const;

  // Graph surgery. cut_incoming removes every edge pointing into a member of
  // `targets` (the do-operator on the graph level); cut_outgoing removes
  // edges leaving them.
  Dag cut_incoming(const std::vector<std::string>& targets) const;
  Dag cut_outgoing(const std::vector<std::string>& targets) const;

  // True if `to` is reachable from `from` along directed edges (from != to).
  bool has_directed_path(const std::string& from, const std::string& to) const;

 private:
  std::vector<std::string> nodes_;
  std::vector<std::pair<std::string, std::string>> edges_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<std::size_t>> children_;  // sorted by label
  std::vector<std::vector<std::size_t>> parents_;   // sorted by label
  std::vector<std::string> topo_order_;
  std::unordered_map<std::string, std::size_t> topo_rank_;

  std::vector<std::size_t> closure(std::size_t start, bool forward) const;
  std::vector<std::string> labels_sorted(
      const std::vector<std::size_t>& idx) const;
};

}  // namespace causal

#endif  // CAUSAL_GRAPH_HPP
