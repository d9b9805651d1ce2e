#ifndef CAUSAL_ORACLE_HPP
#define CAUSAL_ORACLE_HPP

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "causal/scm.hpp"

namespace causal {

// Exhaustive joint distribution of a CptModel: one probability per full
// assignment. Assignments are indexed mixed-radix over the graph's node
// insertion order, first node most significant. This is the ground truth
// the rest of the library is checked against, so it is exact or it refuses.
class JointTable {
 public:
  JointTable(std::vector<std::string> nodes,
             std::vector<std::vector<std::string>> domains,
             std::vector<double> probs);

  const std::vector<std::string>& nodes() const { return nodes_; }
  const std::vector<std::vector<std::string>>& domains() const {
    return domains_;
  }
  std::size_t size() const { return probs_.size(); }
  double prob(std::size_t index) const { return probs_[index]; }

  std::size_t node_index(const std::string& label) const;
  // Writes the value indices of assignment `index` into `out`.
  void decode(std::size_t index, std::vector<std::size_t>& out) const;

  // Probability of the event fixing (node index, value index) pairs,
  // accumulated with compensated summation.
  double event_prob(
      const std::vector<std::pair<std::size_t, std::size_t>>& fixed) const;
  double event_prob(const DiscreteAssignment& event) const;

  double total_mass() const;
  std::map<std::string, double> marginal(const std::string& node) const;

 private:
  std::vector<std::string> nodes_;
  std::vector<std::vector<std::string>> domains_;
  std::vector<double> probs_;
  std::vector<std::size_t> strides_;
  std::map<std::string, std::size_t> index_;
};

// Cap on the assignment-space size; exceeding it reports the product.
inline constexpr std::size_t kDefaultStateCap = std::size_t{1} << 20;

// The factorised joint: every full assignment with probability equal to the
// product of its CPT entries.
JointTable enumerate_joint(const CptModel& m,
                           std::size_t cap = kDefaultStateCap);

// Truncated-factorisation ground truth: enumerate the mutilated model and
// marginalise onto the target.
std::map<std::string, double> interventional_oracle(
    const CptModel& m, const DiscreteIntervention& forced,
    const std::string& target, std::size_t cap = kDefaultStateCap);

struct CiResult {
  bool independent = false;
  std::size_t skipped_strata = 0;  // zero-mass z-strata, skipped by design
};

// Exact conditional-independence check on an enumerated joint: x and y are
// independent given z iff the stratum-wise product rule holds within `tol`
// on every positive-mass z-stratum.
CiResult ci_test_exact(const JointTable& joint,
                       const std::vector<std::string>& x,
                       const std::vector<std::string>& y,
                       const std::vector<std::string>& z, double tol = 1e-10);

}  // namespace causal

#endif  // CAUSAL_ORACLE_HPP
