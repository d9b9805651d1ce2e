#include "causal/identify.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <optional>
#include <set>
#include <unordered_set>

#include "causal/dsep.hpp"
#include "causal/error.hpp"
#include "causal/oracle.hpp"

namespace causal {

// ---------------------------------------------------------------------------
// Expression

namespace {

std::vector<std::string> slot_free(const std::vector<Slot>& slots) {
  std::set<std::string> out;
  for (const auto& s : slots) {
    if (!s.bound) out.insert(s.node);
  }
  return std::vector<std::string>(out.begin(), out.end());
}

}  // namespace

ExprPtr Expression::conditional(Slot target, std::vector<Slot> given) {
  if (given.empty()) {
    return marginal({std::move(target)});
  }
  auto e = std::shared_ptr<Expression>(new Expression(Kind::Conditional));
  e->target_ = std::move(target);
  e->given_ = std::move(given);
  auto free = slot_free(e->given_);
  if (!e->target_.bound) {
    free.push_back(e->target_.node);
    std::sort(free.begin(), free.end());
    free.erase(std::unique(free.begin(), free.end()), free.end());
  }
  e->free_ = std::move(free);
  return e;
}

ExprPtr Expression::marginal(std::vector<Slot> nodes) {
  auto e = std::shared_ptr<Expression>(new Expression(Kind::Marginal));
  e->event_ = std::move(nodes);
  e->free_ = slot_free(e->event_);
  return e;
}

ExprPtr Expression::sum_over(std::string var, ExprPtr body) {
  auto e = std::shared_ptr<Expression>(new Expression(Kind::SumOver));
  e->var_ = std::move(var);
  e->body_ = std::move(body);
  e->free_ = e->body_->free_;
  e->free_.erase(std::remove(e->free_.begin(), e->free_.end(), e->var_),
                 e->free_.end());
  return e;
}

ExprPtr Expression::product(std::vector<ExprPtr> factors) {
  std::vector<ExprPtr> flat;
  for (auto& f : factors) {
    if (f->kind() == Kind::Product) {
      flat.insert(flat.end(), f->factors_.begin(), f->factors_.end());
    } else {
      flat.push_back(std::move(f));
    }
  }
  if (flat.size() == 1) return flat.front();
  auto e = std::shared_ptr<Expression>(new Expression(Kind::Product));
  e->factors_ = std::move(flat);
  std::set<std::string> free;
  for (const auto& f : e->factors_) {
    free.insert(f->free_.begin(), f->free_.end());
  }
  e->free_.assign(free.begin(), free.end());
  return e;
}

const Slot& Expression::target() const {
  if (kind_ != Kind::Conditional) throw InternalError("not a conditional");
  return target_;
}
const std::vector<Slot>& Expression::given() const {
  if (kind_ != Kind::Conditional) throw InternalError("not a conditional");
  return given_;
}
const std::vector<Slot>& Expression::event() const {
  if (kind_ != Kind::Marginal) throw InternalError("not a marginal");
  return event_;
}
const std::string& Expression::bound_var() const {
  if (kind_ != Kind::SumOver) throw InternalError("not a sum");
  return var_;
}
const ExprPtr& Expression::body() const {
  if (kind_ != Kind::SumOver) throw InternalError("not a sum");
  return body_;
}
const std::vector<ExprPtr>& Expression::factors() const {
  if (kind_ != Kind::Product) throw InternalError("not a product");
  return factors_;
}

std::size_t Expression::node_count() const {
  std::unordered_set<const Expression*> seen;
  std::function<void(const Expression*)> walk = [&](const Expression* e) {
    if (!seen.insert(e).second) return;
    if (e->kind_ == Kind::SumOver) {
      walk(e->body_.get());
    } else if (e->kind_ == Kind::Product) {
      for (const auto& f : e->factors_) walk(f.get());
    }
  };
  walk(this);
  return seen.size();
}

ExprPtr Expression::bind(const ExprPtr& e, const std::string& var) {
  const auto& free = e->free_;
  if (!std::binary_search(free.begin(), free.end(), var)) {
    return e;  // no free occurrence below: share as-is
  }
  switch (e->kind_) {
    case Kind::Conditional: {
      Slot t = e->target_;
      if (!t.bound && t.node == var) t.bound = true;
      auto given = e->given_;
      for (auto& s : given) {
        if (!s.bound && s.node == var) s.bound = true;
      }
      return conditional(std::move(t), std::move(given));
    }
    case Kind::Marginal: {
      auto event = e->event_;
      for (auto& s : event) {
        if (!s.bound && s.node == var) s.bound = true;
      }
      return marginal(std::move(event));
    }
    case Kind::SumOver: {
      // A nested sum over the same name shadows it; free_ already excludes
      // the shadowed occurrences, so var free here implies var_ != var.
      return sum_over(e->var_, bind(e->body_, var));
    }
    case Kind::Product: {
      std::vector<ExprPtr> factors;
      factors.reserve(e->factors_.size());
      for (const auto& f : e->factors_) factors.push_back(bind(f, var));
      return product(std::move(factors));
    }
  }
  throw InternalError("unreachable expression kind");
}

// ---------------------------------------------------------------------------
// Path-level operations

std::vector<Path> causal_pathways(const Dag& g,
                                  const std::vector<std::string>& sources,
                                  const std::string& target) {
  g.index_of(target);
  for (const auto& s : sources) {
    if (s == target) {
      throw QueryError("target " + target + " is among the sources");
    }
  }
  std::vector<Path> out;
  for (const auto& s : sources) {
    auto paths = g.directed_paths(s, target);
    out.insert(out.end(), std::make_move_iterator(paths.begin()),
               std::make_move_iterator(paths.end()));
  }
  std::sort(out.begin(), out.end(),
            [](const Path& a, const Path& b) { return a.nodes < b.nodes; });
  return out;
}

std::vector<std::string> first_mediators(const Dag& g,
                                         const std::string& source,
                                         const std::string& target) {
  g.index_of(target);
  std::vector<std::string> out;
  for (const auto& child : g.children(source)) {
    if (child == target) continue;
    if (g.has_directed_path(child, target)) {
      out.push_back(child);
    }
  }
  if (out.empty()) {
    throw QueryError("no directed path of length >= 2 from " + source +
                     " to " + target);
  }
  return out;  // children() is already label-sorted
}

// ---------------------------------------------------------------------------
// Forward counterfactual identification

namespace {

struct FciContext {
  const Dag& g;
  std::vector<std::string>* warnings;
  // Memo key: target + '\n' + sorted sources joined by '\n'.
  std::map<std::string, ExprPtr> memo;
};

std::string memo_key(const std::string& target,
                     std::vector<std::string> sources) {
  std::sort(sources.begin(), sources.end());
  std::string key = target;
  for (const auto& s : sources) {
    key += '\n';
    key += s;
  }
  return key;
}

std::vector<Slot> free_slots(const std::vector<std::string>& nodes) {
  std::vector<Slot> out;
  out.reserve(nodes.size());
  for (const auto& n : nodes) out.push_back(Slot{n, false});
  return out;
}

bool contains(const std::vector<std::string>& v, const std::string& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

ExprPtr helper(FciContext& ctx, const std::vector<std::string>& sources,
               const std::string& target);

// Truncated-factorisation expression over the target's ancestors in the
// mutilated graph: sum over every non-source ancestor of the product of the
// nodes' observational conditionals given their parents. Always a valid
// identification under causal sufficiency; used when a lighter rewrite's
// side condition fails.
ExprPtr g_formula(const Dag& g, const std::vector<std::string>& sources,
                  const std::string& target) {
  const Dag mutilated = g.cut_incoming(sources);
  std::vector<std::string> hidden;  // summation variables, topo order
  for (const auto& v : mutilated.topological_order()) {
    if (v == target || contains(sources, v)) continue;
    if (mutilated.has_directed_path(v, target)) hidden.push_back(v);
  }
  std::set<std::string> bound(hidden.begin(), hidden.end());

  std::vector<std::string> factor_nodes;
  factor_nodes.push_back(target);
  for (auto it = hidden.rbegin(); it != hidden.rend(); ++it) {
    factor_nodes.push_back(*it);
  }
  std::vector<ExprPtr> factors;
  for (const auto& v : factor_nodes) {
    Slot t{v, bound.count(v) > 0};
    std::vector<Slot> given;
    for (const auto& p : mutilated.parents(v)) {
      given.push_back(Slot{p, bound.count(p) > 0});
    }
    factors.push_back(Expression::conditional(t, std::move(given)));
  }
  ExprPtr expr = Expression::product(std::move(factors));
  for (auto it = hidden.rbegin(); it != hidden.rend(); ++it) {
    expr = Expression::sum_over(*it, expr);
  }
  return expr;
}

// Direct-cause query: every source is a parent of the target.
ExprPtr base_case(FciContext& ctx, const std::vector<std::string>& sources,
                  const std::string& target) {
  const Dag& g = ctx.g;

  // Rule-2 test for the bare conditional: with the sources' outgoing edges
  // removed, any remaining open trail into the target is a back-door trek
  // that confounds the conditional.
  const bool bare_ok =
      d_separated(g.cut_outgoing(sources), {target}, sources, {});
  if (bare_ok) {
    return Expression::conditional(Slot{target, false}, free_slots(sources));
  }

  // Parents-of-treatments adjustment. Every proper back-door path is blocked
  // at its first hop by construction, so validity reduces to the descendant
  // rule; a violation means a source feeds another source's parent, in which
  // case plain adjustment is biased and the g-formula takes over.
  std::set<std::string> source_set(sources.begin(), sources.end());
  std::set<std::string> w_set;
  for (const auto& s : sources) {
    for (const auto& p : g.parents(s)) {
      if (!source_set.count(p)) w_set.insert(p);
    }
  }
  std::vector<std::string> w(w_set.begin(), w_set.end());
  bool valid = !w_set.count(target);
  if (valid) {
    for (const auto& s : sources) {
      for (const auto& d : g.descendants(s)) {
        if (w_set.count(d)) {
          valid = false;
          break;
        }
      }
      if (!valid) break;
    }
  }
  if (!valid) {
    return g_formula(g, sources, target);
  }

  std::vector<Slot> given = free_slots(sources);
  std::vector<Slot> w_slots;
  for (const auto& node : w) {
    given.push_back(Slot{node, true});
    w_slots.push_back(Slot{node, true});
  }
  ExprPtr expr = Expression::product(
      {Expression::conditional(Slot{target, false}, std::move(given)),
       Expression::marginal(std::move(w_slots))});
  for (auto it = w.rbegin(); it != w.rend(); ++it) {
    expr = Expression::sum_over(*it, expr);
  }
  return expr;
}

// Mediator expansion of every non-parent source, validated step by step:
//   P(t|do(S)) = sum_M P(t|do(parent sources + M)) prod_m P(m|do(Pa(m) & S))
// Each equality in the derivation corresponds to one d-separation condition
// on a surgered graph; if any fails the g-formula is used instead.
ExprPtr recursive_case(FciContext& ctx, const std::vector<std::string>& sources,
                       const std::string& target) {
  const Dag& g = ctx.g;
  std::vector<std::string> parent_sources;
  std::vector<std::string> expanded;
  for (const auto& s : sources) {
    if (g.has_edge(s, target)) {
      parent_sources.push_back(s);
    } else {
      expanded.push_back(s);
    }
  }

  std::set<std::string> source_set(sources.begin(), sources.end());
  std::set<std::string> mediator_set;
  for (const auto& s : expanded) {
    for (const auto& m : first_mediators(g, s, target)) {
      if (!source_set.count(m)) mediator_set.insert(m);
    }
  }
  std::vector<std::string> mediators(mediator_set.begin(), mediator_set.end());
  std::sort(mediators.begin(), mediators.end(),
            [&g](const std::string& a, const std::string& b) {
              return g.topological_rank(a) < g.topological_rank(b);
            });

  std::vector<std::string> inner = parent_sources;
  inner.insert(inner.end(), mediators.begin(), mediators.end());

  // Rule 2: observing the mediators under do(sources) equals doing them.
  bool ok = mediators.empty() ||
            d_separated(g.cut_incoming(sources).cut_outgoing(mediators),
                        {target}, mediators, sources);
  // Rule 3: the expanded sources may be dropped once the mediators are held.
  if (ok) {
    auto cut = inner;
    cut.insert(cut.end(), expanded.begin(), expanded.end());
    ok = d_separated(g.cut_incoming(cut), {target}, expanded, inner);
  }
  // The mediator joint must factorise into per-mediator terms...
  if (ok && mediators.size() > 1) {
    const Dag after_do = g.cut_incoming(sources);
    for (std::size_t i = 1; i < mediators.size() && ok; ++i) {
      std::vector<std::string> earlier(mediators.begin(),
                                       mediators.begin() + i);
      ok = d_separated(after_do, {mediators[i]}, earlier, sources);
    }
  }
  // ... and each term may restrict its do() to the mediator's own parents.
  if (ok) {
    const Dag after_do = g.cut_incoming(sources);
    for (const auto& m : mediators) {
      std::vector<std::string> own, other;
      for (const auto& s : sources) {
        (g.has_edge(s, m) ? own : other).push_back(s);
      }
      if (other.empty()) continue;
      if (!d_separated(after_do, {m}, other, own)) {
        ok = false;
        break;
      }
    }
  }
  if (!ok) {
    return g_formula(g, sources, target);
  }

  ExprPtr main_factor = helper(ctx, inner, target);
  std::vector<ExprPtr> factors{main_factor};
  for (const auto& m : mediators) {
    std::vector<std::string> own;
    for (const auto& s : sources) {
      if (g.has_edge(s, m)) own.push_back(s);
    }
    factors.push_back(helper(ctx, own, m));
  }
  for (const auto& m : mediators) {
    for (auto& f : factors) f = Expression::bind(f, m);
  }
  ExprPtr expr = Expression::product(std::move(factors));
  for (auto it = mediators.rbegin(); it != mediators.rend(); ++it) {
    expr = Expression::sum_over(*it, expr);
  }
  return expr;
}

ExprPtr helper(FciContext& ctx, const std::vector<std::string>& sources,
               const std::string& target) {
  const Dag& g = ctx.g;
  std::vector<std::string> relevant;
  for (const auto& s : sources) {
    if (g.has_directed_path(s, target)) {
      relevant.push_back(s);
    } else if (ctx.warnings) {
      ctx.warnings->push_back("source " + s + " has no directed path to " +
                              target +
                              "; the intervention cannot affect the target "
                              "and was dropped from the expression");
    }
  }
  if (relevant.empty()) {
    return Expression::marginal({Slot{target, false}});
  }
  const std::string key = memo_key(target, relevant);
  auto hit = ctx.memo.find(key);
  if (hit != ctx.memo.end()) return hit->second;

  bool all_parents = true;
  for (const auto& s : relevant) {
    if (!g.has_edge(s, target)) {
      all_parents = false;
      break;
    }
  }
  ExprPtr expr = all_parents ? base_case(ctx, relevant, target)
                             : recursive_case(ctx, relevant, target);
  ctx.memo.emplace(key, expr);
  return expr;
}

}  // namespace

ExprPtr fci(const Dag& g, const QuerySpec& q,
            std::vector<std::string>* warnings) {
  g.index_of(q.target);
  if (q.sources.empty()) {
    throw QueryError("query needs at least one intervention source");
  }
  std::set<std::string> seen;
  for (const auto& s : q.sources) {
    g.index_of(s);
    if (s == q.target) {
      throw QueryError("target " + q.target + " is among the sources");
    }
    if (!seen.insert(s).second) {
      throw QueryError("duplicate source: " + s);
    }
  }
  FciContext ctx{g, warnings, {}};
  return helper(ctx, q.sources, q.target);
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

std::string lower_sym(const std::string& node) {
  std::string out;
  out.reserve(node.size());
  for (char c : node) {
    out.push_back(static_cast<char>(
        std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

struct Renderer {
  std::map<std::string, std::vector<std::string>> active;  // node -> syms

  std::string slot(const Slot& s) {
    if (!s.bound) return s.node;
    auto it = active.find(s.node);
    const std::string sym = (it != active.end() && !it->second.empty())
                                ? it->second.back()
                                : lower_sym(s.node);
    return s.node + "=" + sym;
  }

  std::string slots(const std::vector<Slot>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out += ",";
      out += slot(v[i]);
    }
    return out;
  }

  std::string render(const Expression& e) {
    switch (e.kind()) {
      case Expression::Kind::Conditional:
        return "P(" + slot(e.target()) + "|" + slots(e.given()) + ")";
      case Expression::Kind::Marginal:
        return "P(" + slots(e.event()) + ")";
      case Expression::Kind::SumOver: {
        auto& stack = active[e.bound_var()];
        std::string sym = lower_sym(e.bound_var());
        sym += std::string(stack.size(), '\'');  // disambiguate shadowing
        stack.push_back(sym);
        std::string body = render(*e.body());
        stack.pop_back();
        return "Σ_{" + sym + "} " + body;
      }
      case Expression::Kind::Product: {
        std::string out;
        for (std::size_t i = 0; i < e.factors().size(); ++i) {
          if (i) out += " ";
          const auto& f = *e.factors()[i];
          if (f.kind() == Expression::Kind::SumOver) {
            out += "(" + render(f) + ")";
          } else {
            out += render(f);
          }
        }
        return out;
      }
    }
    throw InternalError("unreachable expression kind");
  }
};

}  // namespace

std::string render_expression(const Expression& e) {
  Renderer r;
  return r.render(e);
}

std::string render_expression(const ExprPtr& e) {
  return render_expression(*e);
}

// ---------------------------------------------------------------------------
// Numeric evaluation

namespace {

struct Evaluator {
  const CptModel& model;
  const JointTable joint;
  // Value index per node, nullopt when unbound.
  std::vector<std::optional<std::size_t>> env;
  std::map<std::vector<std::pair<std::size_t, std::size_t>>, double> cache;

  explicit Evaluator(const CptModel& m)
      : model(m), joint(enumerate_joint(m)) {
    env.assign(m.graph().node_count(), std::nullopt);
  }

  std::size_t value_of(const Slot& s) {
    const std::size_t v = model.graph().index_of(s.node);
    if (!env[v].has_value()) {
      throw InternalError("unbound expression slot: " + s.node);
    }
    return *env[v];
  }

  double event(std::vector<std::pair<std::size_t, std::size_t>> fixed) {
    std::sort(fixed.begin(), fixed.end());
    auto it = cache.find(fixed);
    if (it != cache.end()) return it->second;
    const double p = joint.event_prob(fixed);
    cache.emplace(std::move(fixed), p);
    return p;
  }

  std::string describe(
      const std::vector<std::pair<std::size_t, std::size_t>>& fixed) {
    std::string out;
    for (const auto& [node, value] : fixed) {
      if (!out.empty()) out += ",";
      out += joint.nodes()[node] + "=" + joint.domains()[node][value];
    }
    return out;
  }

  double eval(const Expression& e) {
    switch (e.kind()) {
      case Expression::Kind::Conditional: {
        std::vector<std::pair<std::size_t, std::size_t>> given;
        for (const auto& s : e.given()) {
          given.emplace_back(model.graph().index_of(s.node), value_of(s));
        }
        auto full = given;
        full.emplace_back(model.graph().index_of(e.target().node),
                          value_of(e.target()));
        const double pg = event(given);
        if (pg <= 0.0) {
          std::sort(given.begin(), given.end());
          throw QueryError("conditioning event has probability 0: {" +
                           describe(given) + "}");
        }
        return event(full) / pg;
      }
      case Expression::Kind::Marginal: {
        std::vector<std::pair<std::size_t, std::size_t>> fixed;
        for (const auto& s : e.event()) {
          fixed.emplace_back(model.graph().index_of(s.node), value_of(s));
        }
        return event(fixed);
      }
      case Expression::Kind::SumOver: {
        const std::size_t v = model.graph().index_of(e.bound_var());
        const auto saved = env[v];
        double total = 0.0;
        const std::size_t dsize = model.domain_size(v);
        for (std::size_t k = 0; k < dsize; ++k) {
          env[v] = k;
          total += eval(*e.body());
        }
        env[v] = saved;
        return total;
      }
      case Expression::Kind::Product: {
        double p = 1.0;
        for (const auto& f : e.factors()) p *= eval(*f);
        return p;
      }
    }
    throw InternalError("unreachable expression kind");
  }
};

}  // namespace

std::map<std::string, double> evaluate_expression(
    const Expression& e, const CptModel& m,
    const DiscreteIntervention& bindings) {
  Evaluator ev(m);
  for (const auto& [node, value] : bindings) {
    ev.env[m.graph().index_of(node)] = m.value_index(node, value);
  }
  std::string target;
  for (const auto& node : e.free_nodes()) {
    if (bindings.count(node)) continue;
    if (!target.empty()) {
      throw QueryError("expression has more than one unbound free slot: " +
                       target + " and " + node);
    }
    target = node;
  }
  if (target.empty()) {
    throw QueryError("expression has no unbound free slot left as target");
  }

  const std::size_t t = m.graph().index_of(target);
  const auto& domain = m.domain(target);
  std::map<std::string, double> result;
  double total = 0.0;
  for (std::size_t k = 0; k < domain.size(); ++k) {
    ev.env[t] = k;
    const double p = ev.eval(e);
    result[domain[k]] = p;
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw InternalError("evaluated distribution sums to " +
                        std::to_string(total) + ", expected 1");
  }
  return result;
}

std::map<std::string, double> evaluate_expression(
    const ExprPtr& e, const CptModel& m,
    const DiscreteIntervention& bindings) {
  return evaluate_expression(*e, m, bindings);
}

}  // namespace causal
