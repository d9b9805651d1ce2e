#ifndef CAUSAL_DSEP_HPP
#define CAUSAL_DSEP_HPP

#include <string>
#include <vector>

#include "causal/graph.hpp"

namespace causal {

// Blocking, d-separation, and the back-door criterion.
//
// path_blocked applies the two blocking rules directly to an explicit path:
// a path is blocked by z iff some interior node v either (1) is a collider
// on the path with neither v nor any descendant of v in z, or (2) is a
// non-collider that belongs to z.
bool path_blocked(const Dag& g, const Path& p,
                  const std::vector<std::string>& z);

// True iff every path between x and y is blocked by z. Implemented as a
// linear-time reachability sweep, not by path enumeration; the enumerating
// variant lives in the test suites as an oracle.
bool d_separated(const Dag& g, const std::vector<std::string>& x,
                 const std::vector<std::string>& y,
                 const std::vector<std::string>& z);

// All undirected paths from t to y whose first step enters t against the
// edge direction, in the enumeration order of Dag::undirected_paths.
std::vector<Path> backdoor_paths(const Dag& g, const std::string& t,
                                 const std::string& y,
                                 std::size_t cap = Dag::kDefaultPathCap);

// Back-door criterion for a treatment set: no member of w may descend from
// a treatment, and w must block every back-door path from each treatment
// to y.
bool check_backdoor(const Dag& g, const std::vector<std::string>& t,
                    const std::string& y, const std::vector<std::string>& w);

// Union of the treatments' parents minus the treatments themselves,
// verified with check_backdoor before being returned. Verification failure
// throws QueryError; it indicates a treatment that is entangled with
// another treatment's ancestry rather than a user mistake.
std::vector<std::string> default_adjustment_set(
    const Dag& g, const std::vector<std::string>& t, const std::string& y);

}  // namespace causal

#endif  // CAUSAL_DSEP_HPP
