#include "causal/mediation.hpp"

#include <cmath>

#include "causal/error.hpp"
#include "causal/ols.hpp"

namespace causal {

namespace {

// Two-sided p-value against the standard normal.
double normal_two_sided_p(double z) {
  return std::erfc(std::abs(z) / std::sqrt(2.0));
}

// Coefficients from an exact (zero residual) fit carry solver noise around
// 1e-16; below this they count as zero.
constexpr double kExactZeroTol = 1e-9;

bool nonzero_exact(double v) { return std::abs(v) > kExactZeroTol; }

}  // namespace

MediationFit fit_mediation(const std::vector<MediationSample>& data) {
  if (data.size() < 4) {
    throw ModelError("fit_mediation needs at least 4 observations, got " +
                     std::to_string(data.size()));
  }
  std::vector<std::vector<double>> design_t;
  std::vector<std::vector<double>> design_tm;
  std::vector<double> mediator;
  std::vector<double> outcome;
  design_t.reserve(data.size());
  design_tm.reserve(data.size());
  for (const auto& s : data) {
    design_t.push_back({1.0, s.t});
    design_tm.push_back({1.0, s.t, s.m});
    mediator.push_back(s.m);
    outcome.push_back(s.y);
  }

  const OlsFit m_on_t = ols(design_t, mediator, "mediator ~ treatment");
  const OlsFit y_on_tm =
      ols(design_tm, outcome, "outcome ~ treatment + mediator");
  const OlsFit y_on_t = ols(design_t, outcome, "outcome ~ treatment");

  MediationFit fit;
  fit.n = data.size();
  fit.a = m_on_t.beta[1];
  fit.se_a = m_on_t.se[1];
  fit.intercept_m = m_on_t.beta[0];
  fit.b = y_on_tm.beta[1];
  fit.se_b = y_on_tm.se[1];
  fit.c = y_on_tm.beta[2];
  fit.se_c = y_on_tm.se[2];
  fit.intercept_y = y_on_tm.beta[0];
  fit.b_total = y_on_t.beta[1];
  fit.se_b_total = y_on_t.se[1];
  fit.intercept_total = y_on_t.beta[0];
  return fit;
}

CausalStepsDecision causal_steps(const MediationFit& fit, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw QueryError("alpha must lie in (0, 1)");
  }
  auto rejects = [alpha](double coef, double se) {
    if (se <= kExactZeroTol) return nonzero_exact(coef);  // exact fit
    return normal_two_sided_p(coef / se) < alpha;
  };
  CausalStepsDecision d;
  d.alpha = alpha;
  d.a_significant = rejects(fit.a, fit.se_a);
  d.b_significant = rejects(fit.b, fit.se_b);
  d.c_significant = rejects(fit.c, fit.se_c);
  d.effect_shrinks = std::abs(fit.b) < std::abs(fit.b_total);
  d.detected = d.a_significant && d.b_significant && d.c_significant &&
               d.effect_shrinks;
  return d;
}

MediationTest difference_test(const MediationFit& fit) {
  const double diff = fit.b_total - fit.b;
  const double se =
      std::sqrt(fit.se_b_total * fit.se_b_total + fit.se_b * fit.se_b);
  MediationTest t;
  if (se <= kExactZeroTol) {
    t.degenerate = nonzero_exact(diff);
    t.statistic = 0.0;
    t.p = t.degenerate ? 0.0 : 1.0;
    return t;
  }
  t.statistic = diff / se;
  t.p = normal_two_sided_p(t.statistic);
  return t;
}

MediationTest sobel_test(const MediationFit& fit) {
  const double product = fit.a * fit.c;
  const double var = fit.c * fit.c * fit.se_a * fit.se_a +
                     fit.a * fit.a * fit.se_c * fit.se_c;
  MediationTest t;
  if (!nonzero_exact(fit.a) && !nonzero_exact(fit.c)) {
    t.statistic = 0.0;
    t.p = 1.0;
    return t;
  }
  if (var == 0.0) {
    t.degenerate = nonzero_exact(product);
    t.statistic = 0.0;
    t.p = t.degenerate ? 0.0 : 1.0;
    return t;
  }
  t.statistic = product / std::sqrt(var);
  t.p = normal_two_sided_p(t.statistic);
  return t;
}

}  // namespace causal
