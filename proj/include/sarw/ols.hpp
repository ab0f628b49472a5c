#ifndef SARW_OLS_HPP_
#define SARW_OLS_HPP_

#include <cmath>

#include "sarw/common.hpp"
#include "sarw/numerics.hpp"

namespace sarw {

struct OlsFit {
  Vector beta;
  Vector fitted;
  Vector residuals;
  double r_squared = 0.0;
  Warnings warnings;
};

//! 1 - SSR/SST; 0 when y has no variance.
inline double r_squared(const Vector& y, const Vector& fitted) {
  require(y.size() == fitted.size(), "ols", "r_squared: length mismatch");
  const double mean = y.mean();
  const double sst = (y.array() - mean).square().sum();
  if (sst == 0.0) return 0.0;
  const double ssr = (y - fitted).squaredNorm();
  return 1.0 - ssr / sst;
}

//! Least squares without an implicit intercept; collinear X gets the numerics ridge fallback.
inline OlsFit fit_ols(const Matrix& x, const Vector& y) {
  require_same_rows(x, y, "ols");
  require(x.cols() >= 1, "ols", "X has no columns");
  require(x.allFinite() && y.allFinite(), "ols", "non-finite input");
  OlsFit fit;
  if (x.rows() <= x.cols()) {
    fit.warnings.push_back("n (" + std::to_string(x.rows()) + ") <= p (" + std::to_string(x.cols()) + ")");
  }
  const numerics::GramSolver gram(x);
  fit.warnings.insert(fit.warnings.end(), gram.warnings().begin(), gram.warnings().end());
  fit.beta = gram.least_squares(y);
  fit.fitted = x * fit.beta;
  fit.residuals = y - fit.fitted;
  fit.r_squared = r_squared(y, fit.fitted);
  return fit;
}

inline double rmse(const Vector& actual, const Vector& predicted) {
  require(actual.size() == predicted.size(), "ols", "rmse: length mismatch");
  if (actual.size() == 0) return 0.0;
  return std::sqrt((actual - predicted).squaredNorm() / static_cast<double>(actual.size()));
}

}  // namespace sarw

#endif  // SARW_OLS_HPP_
