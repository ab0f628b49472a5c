#ifndef SARW_ADMM_HPP_
#define SARW_ADMM_HPP_

// Joint estimation of a sparse nonnegative spatial weights matrix W and coefficients beta for
//
//   min  1/2 ||y - W y - X beta||^2 + lambda1 ||W||_1   s.t. diag(W) = 0, W >= 0,
//
// by ADMM on the split A = W - diag(W) with unscaled multiplier Delta:
//
//   L = 1/2 ||y - W y - X beta||^2 + lambda1 ||A||_1 + I+(A)
//       + tr(Delta^T (A - W + diag W)) + rho/2 ||A - W + diag W||^2.
//
// One iteration is W-step, A-step, beta-step, dual step. The W-step minimizes L over the
// off-diagonal entries of W (diag is pinned at zero). Row i only sees u_i = y with entry i
// zeroed, so each row is a (u_i u_i^T + rho I) system solved by Sherman-Morrison, O(n) per row.
// Nonnegativity and the L1 term live in the A-step, whose prox is max(W - Delta/rho - lambda/rho, 0).
// The returned W is the final A: exactly nonnegative with an exactly zero diagonal.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "sarw/common.hpp"
#include "sarw/numerics.hpp"
#include "sarw/ols.hpp"

namespace sarw::admm {

enum class UpdateRule {
  kCorrected,     //!< updates derived from the augmented Lagrangian above (default)
  kLiteral,       //!< uncorrected closed forms, kept for comparison: left-applied inverse,
                  //!< +rho diag(A), A = S(W + Delta/rho), Delta += rho (W - A), clamp W
};

struct AdmmConfig {
  double lambda1 = 0.0;
  double rho1 = 1.0;
  double eps_abs = 1e-6;
  double eps_rel = 1e-4;
  int max_iter = 20000;
  std::uint64_t seed = 42;  //!< unused by the deterministic solver
  bool adaptive_rho = false;
  UpdateRule rule = UpdateRule::kCorrected;

  void validate() const {
    require(lambda1 >= 0.0 && std::isfinite(lambda1), "admm_sar", "lambda1 must be >= 0");
    require(rho1 > 0.0 && std::isfinite(rho1), "admm_sar", "rho1 must be > 0");
    require(eps_abs > 0.0 && eps_rel > 0.0, "admm_sar", "tolerances must be > 0");
    require(max_iter >= 1, "admm_sar", "max_iter must be >= 1");
  }
};

struct AdmmState {
  Matrix w;  //!< after fit_admm (kCorrected): the W-step output from the final A, beta, Delta
  Matrix a;
  Vector beta;
  Matrix delta1;
  int iter = 0;
  double rho = 1.0;  //!< current penalty (differs from rho1 only with adaptive_rho)
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

struct ResidualRecord {
  double primal = 0.0;
  double dual = 0.0;
  double eps_primal = 0.0;
  double eps_dual = 0.0;
};

struct SarFit {
  Matrix w;
  Vector beta;
  Vector fitted;  //!< W y + X beta
  double r_squared = 0.0;
  double objective = 0.0;
  double lambda1 = 0.0;
  int iterations = 0;
  bool converged = false;
  double primal_residual = 0.0;  //!< at the last iteration
  double eps_primal = 0.0;       //!< combined tolerance at the last iteration
  std::vector<ResidualRecord> residual_history;
  Warnings warnings;
};

//! Data shared by every iteration: y, X, the cached Gram factorization and y^T y.
class Problem {
 public:
  Problem(const Vector& y, const Matrix& x) : y_(y), x_(x), gram_(x), yty_(y.squaredNorm()) {
    require_same_rows(x, y, "admm_sar");
    require(y.size() >= 2, "admm_sar", "need at least 2 locations");
    require(y.allFinite() && x.allFinite(), "admm_sar", "non-finite input");
  }

  const Vector& y() const { return y_; }
  const Matrix& x() const { return x_; }
  const numerics::GramSolver& gram() const { return gram_; }
  double yty() const { return yty_; }
  Index n() const { return y_.size(); }

 private:
  Vector y_;
  Matrix x_;
  numerics::GramSolver gram_;
  double yty_;
};

inline Matrix offdiag(Matrix m) {
  m.diagonal().setZero();
  return m;
}

//! 1/2 ||y - W y - X beta||^2 + lambda1 sum |w_ij|. W must have zero diagonal and be >= 0.
inline double objective(const Matrix& w, const Vector& beta, const Vector& y, const Matrix& x, double lambda1) {
  require(w.rows() == y.size() && w.cols() == y.size(), "admm_sar", "objective: W must be n x n");
  require(x.rows() == y.size() && x.cols() == beta.size(), "admm_sar", "objective: dimension mismatch");
  require(w.diagonal().cwiseAbs().maxCoeff() == 0.0, "admm_sar", "objective: W has a nonzero diagonal");
  require(w.minCoeff() >= 0.0, "admm_sar", "objective: W has negative entries");
  const Vector r = y - w * y - x * beta;
  return 0.5 * r.squaredNorm() + lambda1 * w.cwiseAbs().sum();
}

//! Smooth part of the augmented Lagrangian as a function of W (everything except lambda1 ||A||_1
//! and the indicator), used by the stationarity checks.
inline double smooth_lagrangian(const Matrix& w, const AdmmState& s, const Problem& pb) {
  const Vector r = pb.y() - w * pb.y() - pb.x() * s.beta;
  const Matrix c = s.a - offdiag(w);
  return 0.5 * r.squaredNorm() + (s.delta1.array() * c.array()).sum() + 0.5 * s.rho * c.squaredNorm();
}

//! The W-step. For kCorrected this is the exact minimizer of smooth_lagrangian over the
//! off-diagonal entries (the diagonal stays zero).
inline Matrix update_w(const AdmmState& s, const Problem& pb, const AdmmConfig& cfg) {
  const Vector& y = pb.y();
  const double rho = s.rho;
  const Vector c = y - pb.x() * s.beta;
  if (cfg.rule == UpdateRule::kLiteral) {
    Matrix rhs = c * y.transpose() + offdiag(s.delta1) + rho * s.a;
    rhs.diagonal() += rho * s.a.diagonal();
    const numerics::Rank1Inverse inv(rho, y);
    return inv.apply(rhs, numerics::Side::kLeft).cwiseMax(0.0);
  }
  Matrix v = s.a + s.delta1 / rho;
  v.diagonal().setZero();
  const Vector vy = v * y;
  Vector t(y.size());
  for (Index i = 0; i < y.size(); ++i) t(i) = (c(i) - vy(i)) / (rho + pb.yty() - y(i) * y(i));
  v.noalias() += t * y.transpose();
  v.diagonal().setZero();
  return v;
}

//! The A-step.
inline Matrix update_a(const AdmmState& s, const AdmmConfig& cfg) {
  const double rho = s.rho;
  if (cfg.rule == UpdateRule::kLiteral) {
    return offdiag(numerics::soft_threshold(s.w + s.delta1 / rho, cfg.lambda1 / rho));
  }
  Matrix a = (s.w - s.delta1 / rho).array() - cfg.lambda1 / rho;
  a = a.cwiseMax(0.0);
  a.diagonal().setZero();
  return a;
}

//! The beta-step: least squares of (y - W y) on X via the cached Gram factorization.
inline Vector update_beta(const AdmmState& s, const Problem& pb) {
  return pb.gram().least_squares(pb.y() - s.w * pb.y());
}

//! The dual step: Delta += rho (A - W + diag W), or rho (W - A) for kLiteral.
inline Matrix update_dual(const AdmmState& s, const AdmmConfig& cfg) {
  if (cfg.rule == UpdateRule::kLiteral) return s.delta1 + s.rho * (s.w - s.a);
  return s.delta1 + s.rho * (s.a - offdiag(s.w));
}

//! Smallest lambda1 scale above which W = 0 is stationary: max off-diagonal |(y - X b_ols) y^T|.
inline double lambda_max(const Vector& y, const Matrix& x) {
  const OlsFit ols = fit_ols(x, y);
  double m = 0.0;
  for (Index j = 0; j < y.size(); ++j) {
    for (Index i = 0; i < y.size(); ++i) {
      if (i != j) m = std::max(m, std::abs(ols.residuals(i) * y(j)));
    }
  }
  return m;
}

inline AdmmState initial_state(const Problem& pb, double rho) {
  const Index n = pb.n();
  AdmmState s;
  s.w = Matrix::Zero(n, n);
  s.a = Matrix::Zero(n, n);
  s.delta1 = Matrix::Zero(n, n);
  s.beta = pb.gram().least_squares(pb.y());
  s.rho = rho;
  return s;
}

namespace detail {

// One kCorrected iteration with the W-, A- and dual steps fused into a single column sweep.
// Produces the same A, beta and Delta as update_w, update_a, update_beta, update_dual in turn.
// W is consumed column by column and never stored; the sweep also accumulates A y and Delta y
// for the next iteration's W-step.
struct FusedNorms {
  double primal2 = 0.0;
  double a_change2 = 0.0;
  double w2 = 0.0;
  double a2 = 0.0;
  double delta2 = 0.0;
};

struct FusedCache {
  Vector ay;  //!< A y
  Vector dy;  //!< Delta y
};

inline FusedCache make_cache(const AdmmState& s, const Vector& y) { return {s.a * y, s.delta1 * y}; }

inline FusedNorms fused_iteration(AdmmState& s, const Problem& pb, double lambda1, FusedCache& cache) {
  const Vector& y = pb.y();
  const Index n = y.size();
  const double rho = s.rho;
  const double inv_rho = 1.0 / rho;
  const double thr = lambda1 * inv_rho;

  const Vector c = y - pb.x() * s.beta;
  const Vector t = ((c - cache.ay - inv_rho * cache.dy).array() /
                    (rho + pb.yty() - y.array().square()))
                       .matrix();

  FusedNorms nm;
  Vector wy = Vector::Zero(n);
  Vector ay = Vector::Zero(n);
  Vector dy = Vector::Zero(n);
  Eigen::ArrayXd wseg(n), aseg(n), viol(n);
  auto sweep = [&](Index j, Index start, Index len) {
    if (len == 0) return;
    const double yj = y(j);
    auto a = s.a.col(j).segment(start, len).array();
    auto d = s.delta1.col(j).segment(start, len).array();
    auto ws = wseg.head(len);
    auto as = aseg.head(len);
    auto vs = viol.head(len);
    ws = a + d * inv_rho + t.segment(start, len).array() * yj;
    as = (ws - d * inv_rho - thr).max(0.0);
    vs = as - ws;
    nm.a_change2 += (as - a).square().sum();
    d += rho * vs;
    a = as;
    wy.segment(start, len).array() += ws * yj;
    ay.segment(start, len).array() += as * yj;
    dy.segment(start, len).array() += d * yj;
    nm.primal2 += vs.square().sum();
    nm.w2 += ws.square().sum();
    nm.a2 += as.square().sum();
    nm.delta2 += d.square().sum();
  };
  for (Index j = 0; j < n; ++j) {
    sweep(j, 0, j);
    sweep(j, j + 1, n - j - 1);
    s.a(j, j) = 0.0;
  }
  cache.ay = std::move(ay);
  cache.dy = std::move(dy);
  s.beta = pb.gram().least_squares(y - wy);
  return nm;
}

}  // namespace detail

//! Runs ADMM from W = A = Delta = 0, beta = OLS until the primal residual ||A - W + diag W||_F
//! and the dual residual rho ||A_k - A_{k-1}||_F fall below
//!   eps_pri  = n eps_abs + eps_rel max(||W||_F, ||A||_F),
//!   eps_dual = n eps_abs + eps_rel ||Delta||_F,
//! or max_iter is reached (converged = false, not an error).
inline SarFit fit_admm(const Vector& y, const Matrix& x, const AdmmConfig& cfg, AdmmState* warm = nullptr) {
  cfg.validate();
  const Problem pb(y, x);
  const Index n = pb.n();
  AdmmState s = warm ? *warm : initial_state(pb, cfg.rho1);
  s.rho = cfg.rho1;
  require(s.w.rows() == n && s.a.rows() == n && s.delta1.rows() == n, "admm_sar", "warm state has wrong size");

  SarFit fit;
  fit.lambda1 = cfg.lambda1;
  fit.warnings = pb.gram().warnings();
  const double nd = static_cast<double>(n);
  bool finite = true;
  detail::FusedCache cache;
  if (cfg.rule == UpdateRule::kCorrected) cache = detail::make_cache(s, pb.y());
  for (int it = 1; it <= cfg.max_iter; ++it) {
    double primal = 0.0, dual = 0.0, eps_pri = 0.0, eps_dual = 0.0;
    if (cfg.rule == UpdateRule::kCorrected) {
      const detail::FusedNorms nm = detail::fused_iteration(s, pb, cfg.lambda1, cache);
      primal = std::sqrt(nm.primal2);
      dual = s.rho * std::sqrt(nm.a_change2);
      eps_pri = nd * cfg.eps_abs + cfg.eps_rel * std::sqrt(std::max(nm.w2, nm.a2));
      eps_dual = nd * cfg.eps_abs + cfg.eps_rel * std::sqrt(nm.delta2);
    } else {
      s.w = update_w(s, pb, cfg);
      const Matrix a_old = s.a;
      s.a = update_a(s, cfg);
      s.beta = update_beta(s, pb);
      s.delta1 = update_dual(s, cfg);
      primal = (s.a - offdiag(s.w)).norm();
      dual = s.rho * (s.a - a_old).norm();
      eps_pri = nd * cfg.eps_abs + cfg.eps_rel * std::max(offdiag(s.w).norm(), s.a.norm());
      eps_dual = nd * cfg.eps_abs + cfg.eps_rel * s.delta1.norm();
    }
    s.iter = it;
    s.primal_residual = primal;
    s.dual_residual = dual;
    fit.residual_history.push_back({primal, dual, eps_pri, eps_dual});
    fit.iterations = it;
    fit.primal_residual = primal;
    fit.eps_primal = eps_pri;
    if (!std::isfinite(primal) || !std::isfinite(dual) || !s.beta.allFinite()) {
      finite = false;
      fit.warnings.push_back("iterates became non-finite at iteration " + std::to_string(it));
      break;
    }
    if (primal <= eps_pri && dual <= eps_dual) {
      fit.converged = true;
      break;
    }
    if (cfg.adaptive_rho) {
      // Balance the residuals relative to their tolerances; Delta is unscaled so it needs no
      // rescaling when rho changes.
      const double rp = primal / eps_pri;
      const double rd = dual / eps_dual;
      if (rp > 10.0 * rd) {
        s.rho *= 2.0;
      } else if (rd > 10.0 * rp) {
        s.rho /= 2.0;
      }
    }
  }
  if (!fit.converged && finite) {
    fit.warnings.push_back("did not converge in " + std::to_string(cfg.max_iter) + " iterations");
  }

  if (finite) {
    fit.w = cfg.rule == UpdateRule::kCorrected ? s.a : offdiag(s.w.cwiseMax(0.0));
    fit.w.diagonal().setZero();
  } else {
    fit.w = Matrix::Zero(n, n);
  }
  fit.beta = pb.gram().least_squares(y - fit.w * y);
  fit.fitted = fit.w * y + x * fit.beta;
  fit.r_squared = r_squared(y, fit.fitted);
  fit.objective = objective(fit.w, fit.beta, y, x, cfg.lambda1);
  if (warm) {
    if (cfg.rule == UpdateRule::kCorrected && finite) s.w = update_w(s, pb, cfg);
    *warm = std::move(s);
  }
  return fit;
}

//! Independent fits for each lambda1 (ordered as given). With warm_start the fits run
//! sequentially, each starting from the previous state; otherwise they may run on `threads`
//! workers and the results do not depend on scheduling.
inline std::vector<SarFit> lambda_sweep(const Vector& y, const Matrix& x, const std::vector<double>& lambdas,
                                        const AdmmConfig& cfg, bool warm_start = false, unsigned threads = 1) {
  require(!lambdas.empty(), "admm_sar", "lambda list is empty");
  std::vector<SarFit> out(lambdas.size());
  if (warm_start) {
    const Problem pb(y, x);
    AdmmState state = initial_state(pb, cfg.rho1);
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      AdmmConfig c = cfg;
      c.lambda1 = lambdas[i];
      out[i] = fit_admm(y, x, c, &state);
    }
    return out;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < lambdas.size(); i = next++) {
      AdmmConfig c = cfg;
      c.lambda1 = lambdas[i];
      out[i] = fit_admm(y, x, c);
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(lambdas.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return out;
}

//! Entries of W above `threshold`.
inline Index count_nonzeros(const Matrix& w, double threshold = 1e-8) {
  return static_cast<Index>((w.array().abs() > threshold).count());
}

}  // namespace sarw::admm

#endif  // SARW_ADMM_HPP_
