#ifndef SARW_SAR_FIXED_HPP_
#define SARW_SAR_FIXED_HPP_

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sarw/common.hpp"
#include "sarw/numerics.hpp"

namespace sarw {

//! An a-priori spatial weights matrix: row-normalized, zero diagonal, nonnegative.
struct FixedW {
  enum class Source { kKnn, kAdjacency };

  Matrix w;
  Source source = Source::kKnn;
  int k = 0;  //!< neighbours per row for kKnn
  Warnings warnings;
};

//! Row i gets 1/k at its k nearest Euclidean neighbours. Ties go to the lower index.
inline FixedW build_knn_weights(const Matrix& coords, int k) {
  const Index n = coords.rows();
  require(coords.cols() == 2, "sar_fixed", "coords must have 2 columns");
  require(coords.allFinite(), "sar_fixed", "coords have non-finite entries");
  require(k >= 1 && k < n, "sar_fixed", "k must satisfy 1 <= k < n");
  FixedW out;
  out.source = FixedW::Source::kKnn;
  out.k = k;
  out.w = Matrix::Zero(n, n);
  std::vector<std::pair<double, Index>> dist(static_cast<std::size_t>(n - 1));
  for (Index i = 0; i < n; ++i) {
    std::size_t m = 0;
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      dist[m++] = {(coords.row(i) - coords.row(j)).squaredNorm(), j};
    }
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    for (int r = 0; r < k; ++r) out.w(i, dist[static_cast<std::size_t>(r)].second) = 1.0 / k;
  }
  return out;
}

//! Symmetric 0/1 contiguity from an undirected edge list over row indices, row-normalized.
inline FixedW build_adjacency_weights(Index n, const std::vector<std::pair<Index, Index>>& edges) {
  require(n >= 1, "sar_fixed", "n must be positive");
  FixedW out;
  out.source = FixedW::Source::kAdjacency;
  out.w = Matrix::Zero(n, n);
  for (const auto& [a, b] : edges) {
    require(a >= 0 && a < n && b >= 0 && b < n, "sar_fixed", "edge index out of range");
    require(a != b, "sar_fixed", "self-loop at index " + std::to_string(a));
    out.w(a, b) = 1.0;
    out.w(b, a) = 1.0;
  }
  if (edges.empty()) out.warnings.push_back("empty edge list: W is the zero matrix");
  for (Index i = 0; i < n; ++i) {
    const double s = out.w.row(i).sum();
    if (s > 0.0) out.w.row(i) /= s;
  }
  return out;
}

//! Same, with edges given as location ids.
inline FixedW build_adjacency_weights(const std::vector<std::string>& ids,
                                      const std::vector<std::pair<std::string, std::string>>& edges) {
  std::unordered_map<std::string, Index> pos;
  for (std::size_t i = 0; i < ids.size(); ++i) pos.emplace(ids[i], static_cast<Index>(i));
  std::vector<std::pair<Index, Index>> idx;
  idx.reserve(edges.size());
  for (const auto& [a, b] : edges) {
    const auto ia = pos.find(a);
    const auto ib = pos.find(b);
    if (ia == pos.end()) throw Error("sar_fixed", "unknown id '" + a + "' in edge list");
    if (ib == pos.end()) throw Error("sar_fixed", "unknown id '" + b + "' in edge list");
    if (ia->second == ib->second) throw Error("sar_fixed", "self-loop at id '" + a + "'");
    idx.emplace_back(ia->second, ib->second);
  }
  return build_adjacency_weights(static_cast<Index>(ids.size()), idx);
}

struct SarMlFit {
  double rho = 0.0;
  Vector beta;
  Vector fitted;  //!< rho W y + X beta
  double objective = 0.0;
  std::vector<std::pair<double, double>> profile;  //!< (rho, objective) on the grid
  Warnings warnings;
};

struct SarMlOptions {
  double grid_step = 0.01;
  double rho_bound = 0.99;      //!< grid covers [-rho_bound, rho_bound]
  double golden_tol = 1e-6;
};

//! Profiled criterion -(2/n) ln|I - rho W| + SSE(rho)/n for the fixed-W SAR model, with
//! SSE(rho) the least-squares residual of (y - rho W y) on X. ln|I - rho W| comes from the
//! eigenvalues of W, computed once; complex eigenvalues enter through |1 - rho lambda|.
class SarProfile {
 public:
  SarProfile(const Vector& y, const Matrix& x, const Matrix& w) : gram_(x) {
    require_same_rows(x, y, "sar_fixed");
    require(w.rows() == y.size() && w.cols() == y.size(), "sar_fixed", "W must be n x n");
    n_ = static_cast<double>(y.size());
    eigenvalues_ = eigenvalues_of(w);
    const Vector wy = w * y;
    e0_ = y - x * gram_.least_squares(y);
    e1_ = wy - x * gram_.least_squares(wy);
  }

  double log_det(double rho) const {
    double acc = 0.0;
    for (const auto& lam : eigenvalues_) {
      const std::complex<double> f = 1.0 - rho * lam;
      if (std::abs(lam.imag()) < 1e-12 && f.real() <= 0.0) return -std::numeric_limits<double>::infinity();
      const double mod = std::abs(f);
      if (mod <= 0.0) return -std::numeric_limits<double>::infinity();
      acc += std::log(mod);
    }
    return acc;
  }

  double sse(double rho) const { return (e0_ - rho * e1_).squaredNorm(); }

  double operator()(double rho) const {
    const double ld = log_det(rho);
    if (!std::isfinite(ld)) return std::numeric_limits<double>::infinity();
    return -2.0 / n_ * ld + sse(rho) / n_;
  }

  const std::vector<std::complex<double>>& eigenvalues() const { return eigenvalues_; }
  const numerics::GramSolver& gram() const { return gram_; }

  static std::vector<std::complex<double>> eigenvalues_of(const Matrix& w) {
    std::vector<std::complex<double>> out;
    out.reserve(static_cast<std::size_t>(w.rows()));
    if ((w - w.transpose()).cwiseAbs().maxCoeff() == 0.0) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(w, Eigen::EigenvaluesOnly);
      for (Index i = 0; i < w.rows(); ++i) out.emplace_back(es.eigenvalues()(i), 0.0);
    } else {
      Eigen::EigenSolver<Matrix> es(w, false);
      require(es.info() == Eigen::Success, "sar_fixed", "eigenvalues of W did not converge");
      for (Index i = 0; i < w.rows(); ++i) out.push_back(es.eigenvalues()(i));
    }
    return out;
  }

 private:
  numerics::GramSolver gram_;
  double n_ = 0.0;
  std::vector<std::complex<double>> eigenvalues_;
  Vector e0_;
  Vector e1_;
};

//! Concentrated estimation of rho by a grid scan then golden-section refinement; beta is the
//! least-squares solve of (y - rho W y) on X at the chosen rho.
inline SarMlFit fit_sar_ml(const Vector& y, const Matrix& x, const FixedW& fw, const SarMlOptions& opt = {}) {
  require(opt.grid_step > 0.0 && opt.rho_bound > 0.0 && opt.rho_bound < 1.0, "sar_fixed", "bad grid options");
  const SarProfile f(y, x, fw.w);
  SarMlFit fit;
  fit.warnings = f.gram().warnings();
  const int steps = static_cast<int>(std::floor(2.0 * opt.rho_bound / opt.grid_step + 1e-9));
  double best_rho = 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= steps; ++i) {
    const double rho = -opt.rho_bound + i * opt.grid_step;
    const double v = f(rho);
    fit.profile.emplace_back(rho, v);
    // A flat profile (e.g. W = 0) resolves to the rho nearest zero.
    if (v < best || (v == best && std::abs(rho) < std::abs(best_rho))) {
      best = v;
      best_rho = rho;
    }
  }
  require(std::isfinite(best), "sar_fixed", "objective is infinite at every grid probe");

  // Golden-section on the bracket around the best probe.
  double a = std::max(-opt.rho_bound, best_rho - opt.grid_step);
  double b = std::min(opt.rho_bound, best_rho + opt.grid_step);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > opt.golden_tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  const double refined = 0.5 * (a + b);
  const double fr = f(refined);
  fit.rho = fr < best ? refined : best_rho;
  fit.objective = std::min(fr, best);

  const Vector wy = fw.w * y;
  fit.beta = f.gram().least_squares(y - fit.rho * wy);
  fit.fitted = fit.rho * wy + x * fit.beta;
  return fit;
}

}  // namespace sarw

#endif  // SARW_SAR_FIXED_HPP_
