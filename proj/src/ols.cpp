#include "causal/ols.hpp"

#include <cmath>
#include <string>

#include "causal/error.hpp"

namespace causal {

OlsFit ols(const std::vector<std::vector<double>>& rows,
           const std::vector<double>& response, const std::string& label) {
  const std::size_t n = rows.size();
  if (n == 0 || n != response.size()) {
    throw ModelError("regression for " + label +
                     ": empty data or row/response size mismatch");
  }
  const std::size_t p = rows[0].size();
  for (const auto& r : rows) {
    if (r.size() != p) {
      throw ModelError("regression for " + label + ": ragged design matrix");
    }
  }
  if (n < p) {
    throw ModelError("regression for " + label + ": fewer rows (" +
                     std::to_string(n) + ") than parameters (" +
                     std::to_string(p) + ")");
  }

  // xtx and xty, then invert xtx by Gauss-Jordan with partial pivoting.
  std::vector<std::vector<double>> xtx(p, std::vector<double>(p, 0.0));
  std::vector<double> xty(p, 0.0);
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < p; ++a) {
      xty[a] += rows[i][a] * response[i];
      for (std::size_t b = 0; b < p; ++b) {
        xtx[a][b] += rows[i][a] * rows[i][b];
      }
    }
  }
  for (std::size_t a = 0; a < p; ++a) {
    scale = std::max(scale, std::abs(xtx[a][a]));
  }
  if (scale == 0.0) scale = 1.0;

  std::vector<std::vector<double>> inv(p, std::vector<double>(p, 0.0));
  for (std::size_t a = 0; a < p; ++a) inv[a][a] = 1.0;
  auto work = xtx;
  for (std::size_t col = 0; col < p; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < p; ++r) {
      if (std::abs(work[r][col]) > std::abs(work[pivot][col])) pivot = r;
    }
    if (std::abs(work[pivot][col]) <= 1e-12 * scale) {
      throw ModelError("regression for " + label +
                       ": design matrix is rank-deficient");
    }
    std::swap(work[pivot], work[col]);
    std::swap(inv[pivot], inv[col]);
    const double d = work[col][col];
    for (std::size_t c = 0; c < p; ++c) {
      work[col][c] /= d;
      inv[col][c] /= d;
    }
    for (std::size_t r = 0; r < p; ++r) {
      if (r == col) continue;
      const double f = work[r][col];
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < p; ++c) {
        work[r][c] -= f * work[col][c];
        inv[r][c] -= f * inv[col][c];
      }
    }
  }

  OlsFit fit;
  fit.n = n;
  fit.beta.assign(p, 0.0);
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = 0; b < p; ++b) {
      fit.beta[a] += inv[a][b] * xty[b];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double pred = 0.0;
    for (std::size_t a = 0; a < p; ++a) pred += rows[i][a] * fit.beta[a];
    const double res = response[i] - pred;
    fit.ssr += res * res;
  }
  fit.sigma2 = n > p ? fit.ssr / static_cast<double>(n - p) : 0.0;
  fit.se.assign(p, 0.0);
  for (std::size_t a = 0; a < p; ++a) {
    const double v = fit.sigma2 * inv[a][a];
    fit.se[a] = v > 0.0 ? std::sqrt(v) : 0.0;
  }
  return fit;
}

}  // namespace causal
