#ifndef CAUSAL_OLS_HPP
#define CAUSAL_OLS_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace causal {

// Ordinary least squares via the normal equations. Design matrices here are
// tiny (a node and its parents), so a dense solve is plenty.
struct OlsFit {
  std::vector<double> beta;  // one per design column
  std::vector<double> se;    // classical standard errors
  double ssr = 0.0;          // sum of squared residuals
  double sigma2 = 0.0;       // ssr / (n - p), 0 when saturated
  std::size_t n = 0;
};

// rows: one regressor vector per observation (the caller supplies the
// intercept column). Throws ModelError on a rank-deficient design; the
// message includes `label` to identify the offending regression.
OlsFit ols(const std::vector<std::vector<double>>& rows,
           const std::vector<double>& response, const std::string& label);

}  // namespace causal

#endif  // CAUSAL_OLS_HPP
