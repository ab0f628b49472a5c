#ifndef SARW_NUMERICS_HPP_
#define SARW_NUMERICS_HPP_

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sarw/common.hpp"

namespace sarw::numerics {

//! Module tolerances. Callers may pass a modified copy where an overload accepts one.
struct Tolerances {
  double symmetry = 1e-8;       //!< max |S - S^T| accepted without a warning in sym_eig
  double ridge_scale = 1e-8;    //!< ridge = ridge_scale * trace(G) / p when G is singular
  double rank_ratio = 1e-12;    //!< pivot^2 / max diag(G) below this counts as singular
};

inline constexpr Tolerances kDefaultTolerances{};

enum class Side { kLeft, kRight };

//! Applies (y y^T + rho I)^{-1} without forming it, via Sherman-Morrison:
//! (y y^T + rho I)^{-1} = (I - y y^T / (rho + y^T y)) / rho.
class Rank1Inverse {
 public:
  Rank1Inverse(double rho, Vector y) : rho_(rho), y_(std::move(y)), yty_(y_.squaredNorm()) {
    require(rho_ > 0.0 && std::isfinite(rho_), "numerics", "Rank1Inverse requires rho > 0");
  }

  double rho() const { return rho_; }
  const Vector& y() const { return y_; }
  double yty() const { return yty_; }

  //! M S^{-1} (kRight) or S^{-1} M (kLeft), O(n^2).
  Matrix apply(const Matrix& m, Side side) const {
    const double denom = rho_ * (rho_ + yty_);
    if (side == Side::kRight) {
      require(m.cols() == y_.size(), "numerics", "apply_rank1_inverse: dimension mismatch");
      const Vector my = m * y_;
      return m / rho_ - (my / denom) * y_.transpose();
    }
    require(m.rows() == y_.size(), "numerics", "apply_rank1_inverse: dimension mismatch");
    const Vector ytm = m.transpose() * y_;
    return m / rho_ - y_ * (ytm.transpose() / denom);
  }

  //! The dense matrix S = y y^T + rho I (tests and diagnostics only).
  Matrix dense() const {
    Matrix s = y_ * y_.transpose();
    s.diagonal().array() += rho_;
    return s;
  }

 private:
  double rho_;
  Vector y_;
  double yty_;
};

inline Matrix apply_rank1_inverse(const Rank1Inverse& inv, const Matrix& m, Side side) {
  return inv.apply(m, side);
}

inline double soft_threshold(double x, double f) {
  const double mag = std::abs(x) - f;
  if (mag <= 0.0) return 0.0;
  return x > 0.0 ? mag : -mag;
}

inline Matrix soft_threshold(const Matrix& x, double f) {
  return x.unaryExpr([f](double v) { return soft_threshold(v, f); });
}

struct EigenDecomposition {
  Vector values;   //!< descending
  Matrix vectors;  //!< column i pairs with values(i); orthonormal
  bool symmetrized = false;
};

//! Eigen-decomposition of a symmetric matrix, eigenvalues sorted descending.
//! Inputs asymmetric beyond tol.symmetry are replaced by (S + S^T) / 2 and flagged.
inline EigenDecomposition sym_eig(const Matrix& s, const Tolerances& tol = kDefaultTolerances) {
  require(s.rows() == s.cols(), "numerics", "sym_eig: matrix is not square");
  require(s.allFinite(), "numerics", "sym_eig: non-finite entries");
  EigenDecomposition out;
  Matrix sym = s;
  if (s.size() > 0 && (s - s.transpose()).cwiseAbs().maxCoeff() > tol.symmetry) {
    sym = 0.5 * (s + s.transpose());
    out.symmetrized = true;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  require(solver.info() == Eigen::Success, "numerics", "sym_eig: eigen-solver did not converge");
  const Index n = sym.rows();
  out.values.resize(n);
  out.vectors.resize(n, n);
  // SelfAdjointEigenSolver returns ascending order.
  for (Index i = 0; i < n; ++i) {
    out.values(i) = solver.eigenvalues()(n - 1 - i);
    out.vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
  }
  return out;
}

//! Cholesky factor of a symmetric positive-definite matrix.
class Cholesky {
 public:
  explicit Cholesky(const Matrix& g, const Tolerances& tol = kDefaultTolerances) : llt_(g) {
    require(g.rows() == g.cols(), "numerics", "cholesky: matrix is not square");
    ok_ = llt_.info() == Eigen::Success && g.allFinite();
    if (ok_ && g.rows() > 0) {
      const Vector piv = llt_.matrixL().toDenseMatrix().diagonal();
      const double max_diag = g.diagonal().cwiseAbs().maxCoeff();
      const double min_piv2 = piv.cwiseAbs2().minCoeff();
      ok_ = max_diag > 0.0 && min_piv2 > tol.rank_ratio * max_diag;
    }
  }

  bool ok() const { return ok_; }

  Matrix solve(const Matrix& b) const {
    require(ok_, "numerics", "cholesky_solve: matrix is not positive definite; use a ridge fallback");
    require(b.rows() == llt_.rows(), "numerics", "cholesky_solve: dimension mismatch");
    return llt_.solve(b);
  }

 private:
  Eigen::LLT<Matrix> llt_;
  bool ok_ = false;
};

inline Matrix cholesky_solve(const Matrix& g, const Matrix& b, const Tolerances& tol = kDefaultTolerances) {
  return Cholesky(g, tol).solve(b);
}

//! Cached factorization of X^T X for repeated least-squares solves. A singular Gram
//! matrix gets ridge_scale * trace / p added to its diagonal, with a warning.
class GramSolver {
 public:
  explicit GramSolver(const Matrix& x, const Tolerances& tol = kDefaultTolerances)
      : x_(x), gram_(x.transpose() * x), chol_(gram_, tol) {
    if (!chol_.ok()) {
      const double p = static_cast<double>(gram_.rows());
      ridge_ = tol.ridge_scale * gram_.trace() / p;
      if (!(ridge_ > 0.0)) ridge_ = tol.ridge_scale;
      Matrix g = gram_;
      g.diagonal().array() += ridge_;
      chol_ = Cholesky(g, tol);
      require(chol_.ok(), "numerics", "X^T X is not factorizable even after ridge fallback");
      warnings_.push_back("X^T X is singular (collinear columns); added ridge " + std::to_string(ridge_));
    }
  }

  //! argmin_b ||rhs - X b||^2 (ridge-regularized when flagged).
  Vector least_squares(const Vector& rhs) const { return chol_.solve(x_.transpose() * rhs); }

  const Matrix& gram() const { return gram_; }
  double ridge() const { return ridge_; }
  const Warnings& warnings() const { return warnings_; }

 private:
  Matrix x_;
  Matrix gram_;
  Cholesky chol_;
  double ridge_ = 0.0;
  Warnings warnings_;
};

//! Power-iteration estimate of the spectral radius: ||W x_k|| / ||x_k|| after `iters` steps
//! from the all-ones start. Exact for nilpotent W once iters >= n.
inline double power_iteration_radius(const Matrix& w, int iters = 1000) {
  require(w.rows() == w.cols(), "numerics", "power iteration needs a square matrix");
  if (w.rows() == 0) return 0.0;
  Vector x = Vector::Ones(w.rows()).normalized();
  double est = 0.0;
  for (int k = 0; k < iters; ++k) {
    const Vector wx = w * x;
    est = wx.norm();
    if (!(est > 0.0)) return 0.0;
    x = wx / est;
  }
  return est;
}

//! Collatz-Wielandt upper bound on the spectral radius of a nonnegative matrix:
//! max_i (W x)_i / x_i for a positive x refined by iterating the shifted matrix W + I.
inline double perron_upper_bound(const Matrix& w, int iters = 200) {
  require(w.rows() == w.cols(), "numerics", "perron bound needs a square matrix");
  require(w.size() == 0 || w.minCoeff() >= 0.0, "numerics", "perron bound needs a nonnegative matrix");
  if (w.rows() == 0) return 0.0;
  Vector x = Vector::Ones(w.rows());
  auto bound = [&](const Vector& v) { return ((w * v).array() / v.array()).maxCoeff(); };
  double best = bound(x);
  for (int k = 0; k < iters; ++k) {
    x = w * x + x;
    x /= x.maxCoeff();
    if (x.minCoeff() <= 0.0) break;
    best = std::min(best, bound(x));
  }
  return best;
}

//! Exact spectral radius from a full nonsymmetric eigen-decomposition, O(n^3).
inline double spectral_radius(const Matrix& w) {
  require(w.rows() == w.cols(), "numerics", "spectral radius needs a square matrix");
  if (w.rows() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(w, false);
  require(es.info() == Eigen::Success, "numerics", "eigenvalues did not converge");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace sarw::numerics

#endif  // SARW_NUMERICS_HPP_
