#ifndef SARW_SPILLOVER_HPP_
#define SARW_SPILLOVER_HPP_

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "sarw/admm.hpp"
#include "sarw/common.hpp"
#include "sarw/csv.hpp"
#include "sarw/numerics.hpp"

namespace sarw::spillover {

inline constexpr double kRadiusMargin = 1e-6;

struct Edit {
  Index row = 0;
  Index col = 0;
  double value = 0.0;
};

//! Copy of X with the given cells replaced.
inline Matrix perturb(const Matrix& x, const std::vector<Edit>& edits) {
  Matrix out = x;
  for (const Edit& e : edits) {
    require(e.row >= 0 && e.row < x.rows(), "spillover", "edit row " + std::to_string(e.row) + " out of range");
    require(e.col >= 0 && e.col < x.cols(), "spillover", "edit column " + std::to_string(e.col) + " out of range");
    out(e.row, e.col) = e.value;
  }
  return out;
}

struct RadiusCheck {
  double power_estimate = 0.0;  //!< power iteration on W
  double upper_bound = 0.0;     //!< min of the Perron and symmetrized bounds on |W|
  double exact = -1.0;          //!< set only when the bounds were inconclusive
  //! The exact radius when computed, otherwise the certified upper bound.
  double radius() const { return exact >= 0.0 ? exact : upper_bound; }
};

//! Verifies spectral radius(W) < 1 - margin. Cheap certificates first: rho(W) <= rho(|W|), which is
//! bounded by the Collatz-Wielandt value and by lambda_max((|W| + |W|^T) / 2). Falls back to a
//! full eigen-decomposition only when neither bound certifies.
inline RadiusCheck check_spectral_radius(const Matrix& w, double margin = kRadiusMargin) {
  require(w.rows() == w.cols(), "spillover", "W must be square");
  require(w.allFinite(), "spillover", "W has non-finite entries");
  const double limit = 1.0 - margin;
  RadiusCheck rc;
  rc.power_estimate = numerics::power_iteration_radius(w);
  if (rc.power_estimate >= limit) {
    throw Error("spillover", "power-iteration spectral radius estimate " + csv::format_double(rc.power_estimate) +
                                 " >= " + csv::format_double(limit) + "; (I - W) is not safely invertible");
  }
  const Matrix aw = w.cwiseAbs();
  const double perron = numerics::perron_upper_bound(aw);
  const double sym = w.rows() > 0 ? numerics::sym_eig(0.5 * (aw + aw.transpose())).values(0) : 0.0;
  rc.upper_bound = std::min(perron, sym);
  if (rc.upper_bound < limit) return rc;
  rc.exact = numerics::spectral_radius(w);
  if (rc.exact >= limit) {
    throw Error("spillover", "eigenvalue spectral radius " + csv::format_double(rc.exact) + " >= " +
                                 csv::format_double(limit) + " (symmetrized bound " + csv::format_double(sym) +
                                 "); (I - W) is not safely invertible");
  }
  return rc;
}

struct SpilloverResult {
  Vector y_base;
  Vector y_new;
  Vector delta;  //!< y_base - y_new
  std::vector<Index> perturbed_rows;
  double spectral_radius = 0.0;  //!< RadiusCheck::radius(): exact, or a certified upper bound
  bool radius_exact = false;
};

//! Predictions y = (I - W)^{-1} X beta from one LU factorization of I - W, shared read-only
//! across scenarios.
class SpilloverModel {
 public:
  SpilloverModel(const Matrix& w, const Vector& beta) : beta_(beta) {
    radius_ = check_spectral_radius(w);
    lu_.compute(Matrix::Identity(w.rows(), w.cols()) - w);
  }

  Vector predict(const Matrix& x) const {
    require(x.rows() == lu_.rows(), "spillover", "X has " + std::to_string(x.rows()) + " rows, W has " +
                                                    std::to_string(lu_.rows()));
    require(x.cols() == beta_.size(), "spillover", "X has " + std::to_string(x.cols()) + " columns, beta has " +
                                                       std::to_string(beta_.size()));
    return lu_.solve(x * beta_);
  }

  SpilloverResult compare(const Matrix& x, const Matrix& x_new) const {
    require(x.rows() == x_new.rows() && x.cols() == x_new.cols(), "spillover", "X and X_new differ in shape");
    SpilloverResult r;
    r.y_base = predict(x);
    r.y_new = predict(x_new);
    r.delta = r.y_base - r.y_new;
    for (Index i = 0; i < x.rows(); ++i) {
      if (x.row(i) != x_new.row(i)) r.perturbed_rows.push_back(i);
    }
    r.spectral_radius = radius_.radius();
    r.radius_exact = radius_.exact >= 0.0;
    return r;
  }

  const RadiusCheck& radius() const { return radius_; }

 private:
  Vector beta_;
  Eigen::PartialPivLU<Matrix> lu_;
  RadiusCheck radius_;
};

inline SpilloverResult predict_spillover(const Matrix& w, const Vector& beta, const Matrix& x, const Matrix& x_new) {
  return SpilloverModel(w, beta).compare(x, x_new);
}

inline SpilloverResult predict_spillover(const admm::SarFit& fit, const Matrix& x, const Matrix& x_new) {
  return predict_spillover(fit.w, fit.beta, x, x_new);
}

}  // namespace sarw::spillover

#endif  // SARW_SPILLOVER_HPP_
