#ifndef CAUSAL_MEDIATION_HPP
#define CAUSAL_MEDIATION_HPP

#include <cstddef>
#include <vector>

namespace causal {

// One observation for mediation analysis.
struct MediationSample {
  double t = 0.0;  // treatment
  double m = 0.0;  // mediator
  double y = 0.0;  // outcome
};

// The three regressions of causal-steps mediation analysis, fitted on a
// common sample:
//   mediator ~ 1 + t                  -> a
//   outcome  ~ 1 + t + mediator       -> b (t slope), c (mediator slope)
//   outcome  ~ 1 + t                  -> b_total
// a is the treatment->mediator path, c the mediator->outcome path given
// treatment, b the direct effect given the mediator, b_total the total
// effect. On every common-sample OLS fit, b_total = b + a*c exactly.
struct MediationFit {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double b_total = 0.0;
  double se_a = 0.0;
  double se_b = 0.0;
  double se_c = 0.0;
  double se_b_total = 0.0;
  double intercept_m = 0.0;      // bias of the mediator regression
  double intercept_y = 0.0;      // bias of the joint outcome regression
  double intercept_total = 0.0;  // bias of the total-effect regression
  std::size_t n = 0;
};

// OLS fits with classical standard errors; needs n >= 4 and full-rank
// designs.
MediationFit fit_mediation(const std::vector<MediationSample>& data);

struct CausalStepsDecision {
  bool a_significant = false;
  bool b_significant = false;
  bool c_significant = false;
  bool effect_shrinks = false;  // |b| < |b_total|
  bool detected = false;        // all four conditions hold
  double alpha = 0.05;
};

// Causal-steps rule: indirect causation is declared iff the a, b and c
// two-sided tests all reject at level alpha and |b| < |b_total|. A standard
// error below 1e-9 is treated as an exact fit whose coefficient rejects iff
// it is nonzero beyond solver noise.
CausalStepsDecision causal_steps(const MediationFit& fit, double alpha = 0.05);

struct MediationTest {
  double statistic = 0.0;
  double p = 1.0;
  bool degenerate = false;  // zero standard error met a nonzero effect
};

// Tests H0: b_total - b = 0. The standard error of the difference is
// approximated as sqrt(se(b_total)^2 + se(b)^2); the two estimates are
// positively correlated, so this overstates the error and the test is
// conservative. Large-sample normal reference.
MediationTest difference_test(const MediationFit& fit);

// Product-of-paths test of H0: a*c = 0 with the delta-method error
// sqrt(c^2 se(a)^2 + a^2 se(c)^2). Large-sample normal reference.
MediationTest sobel_test(const MediationFit& fit);

}  // namespace causal

#endif  // CAUSAL_MEDIATION_HPP
