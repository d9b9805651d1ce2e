#ifndef CAUSAL_IDENTIFY_HPP
#define CAUSAL_IDENTIFY_HPP

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "causal/graph.hpp"
#include "causal/scm.hpp"

namespace causal {

class Expression;
using ExprPtr = std::shared_ptr<const Expression>;

// One variable occurrence inside an expression. `bound` marks occurrences
// quantified by an enclosing sum; they render as "X=x" instead of "X".
struct Slot {
  std::string node;
  bool bound = false;

  bool operator==(const Slot&) const = default;
};

// Symbolic distribution formula over observational conditionals: the output
// language of forward counterfactual identification. Expressions are
// immutable trees shared through ExprPtr; identical sub-queries are
// memoised into shared subtrees, and rendering re-expands them.
class Expression {
 public:
  enum class Kind { Conditional, Marginal, SumOver, Product };

  // Constructors normalise: a conditional with no conditioning collapses to
  // a marginal, nested products flatten, singleton products unwrap.
  static ExprPtr conditional(Slot target, std::vector<Slot> given);
  static ExprPtr marginal(std::vector<Slot> nodes);
  static ExprPtr sum_over(std::string var, ExprPtr body);
  static ExprPtr product(std::vector<ExprPtr> factors);

  Kind kind() const { return kind_; }
  const Slot& target() const;              // Conditional
  const std::vector<Slot>& given() const;  // Conditional
  const std::vector<Slot>& event() const;  // Marginal
  const std::string& bound_var() const;    // SumOver
  const ExprPtr& body() const;             // SumOver
  const std::vector<ExprPtr>& factors() const;  // Product

  // Node names occurring free (unbound) anywhere below, sorted.
  const std::vector<std::string>& free_nodes() const { return free_; }

  // Unique expression nodes reachable from this one (DAG count).
  std::size_t node_count() const;

  // Structurally shared copy in which free occurrences of `var` are marked
  // bound; used when wrapping a sub-expression into an enclosing sum.
  static ExprPtr bind(const ExprPtr& e, const std::string& var);

 private:
  explicit Expression(Kind kind) : kind_(kind) {}

  Kind kind_;
  Slot target_;
  std::vector<Slot> given_;
  std::vector<Slot> event_;
  std::string var_;
  ExprPtr body_;
  std::vector<ExprPtr> factors_;
  std::vector<std::string> free_;
};

// Interventional query: P(target | do(sources...)).
struct QuerySpec {
  std::string target;
  std::vector<std::string> sources;      // ordered, non-empty
  DiscreteIntervention source_values;    // optional, used at evaluation time
};

// All simple directed paths from each source to the target, merged and
// lexicographically ordered by node sequence.
std::vector<Path> causal_pathways(const Dag& g,
                                  const std::vector<std::string>& sources,
                                  const std::string& target);

// Immediate successors of `source` that lie on some directed path to
// `target`, excluding the target itself. Throws QueryError when no directed
// path of length >= 2 exists.
std::vector<std::string> first_mediators(const Dag& g,
                                         const std::string& source,
                                         const std::string& target);

// Forward counterfactual identification: factorise P(target | do(sources))
// into an expression over observational conditionals.
//
// Direct-cause queries resolve to a bare conditional, or to the
// parents-of-treatments back-door adjustment when an open back-door trek
// remains. Other sources are replaced by their first mediators and the
// query recurses. Every rewrite is validated with a d-separation check on
// the corresponding surgered graph; when a rewrite's side condition fails
// (for instance a mediator confounded with the target), the query falls
// back to the truncated-factorisation expression over the target's
// post-surgery ancestors, which is always sound under causal sufficiency.
//
// Sources with no directed path to the target do not affect it; they are
// dropped from the expression and reported through `warnings`.
ExprPtr fci(const Dag& g, const QuerySpec& q,
            std::vector<std::string>* warnings = nullptr);

// Deterministic probability notation, e.g. "Σ_{x} P(Y|T,X=x) P(X=x)".
// Shadowed sum variables are disambiguated with primes.
std::string render_expression(const Expression& e);
std::string render_expression(const ExprPtr& e);

// Numeric backend: evaluates every conditional and marginal exactly from
// the enumerated joint of `m`. All free slots except one (the target) must
// be covered by `bindings`; the result maps each target value to its
// probability and sums to 1 within 1e-9.
std::map<std::string, double> evaluate_expression(
    const Expression& e, const CptModel& m,
    const DiscreteIntervention& bindings);
std::map<std::string, double> evaluate_expression(
    const ExprPtr& e, const CptModel& m, const DiscreteIntervention& bindings);

}  // namespace causal

#endif  // CAUSAL_IDENTIFY_HPP
