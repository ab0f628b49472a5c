#ifndef SARW_SYNTH_HPP_
#define SARW_SYNTH_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "sarw/admm.hpp"
#include "sarw/common.hpp"
#include "sarw/dataset.hpp"
#include "sarw/numerics.hpp"

namespace sarw::synth {

struct SynthSpec {
  Index n = 50;
  Index p = 3;
  double density = 0.05;         //!< fraction of nonzero off-diagonal entries
  double spectral_scale = 0.5;   //!< target spectral radius of W_true
  double noise_sigma = 0.01;
  std::optional<int> n_blocks;   //!< concentrate links inside this many contiguous blocks
  std::uint64_t seed = 42;

  void validate() const {
    require(n >= 2 && p >= 1, "synth", "need n >= 2 and p >= 1");
    require(density > 0.0 && density <= 1.0, "synth", "density must be in (0, 1]");
    require(spectral_scale > 0.0 && spectral_scale < 1.0, "synth", "spectral_scale must be in (0, 1)");
    require(noise_sigma >= 0.0, "synth", "noise_sigma must be >= 0");
    if (n_blocks) require(*n_blocks >= 1 && *n_blocks <= n, "synth", "n_blocks must be in [1, n]");
  }
};

//! Block label of location i when n locations are cut into `blocks` contiguous groups.
inline int block_of(Index i, Index n, int blocks) {
  return static_cast<int>((i * blocks) / n);
}

//! Sparse nonnegative W with zero diagonal and spectral radius spectral_scale. With n_blocks,
//! 95% of the links fall inside blocks and the rest connect different blocks.
inline Matrix generate_w(const SynthSpec& spec) {
  spec.validate();
  const Index n = spec.n;
  std::mt19937_64 rng(spec.seed);
  std::vector<std::pair<Index, Index>> inside, across;
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      if (i == j) continue;
      if (spec.n_blocks && block_of(i, n, *spec.n_blocks) != block_of(j, n, *spec.n_blocks)) {
        across.emplace_back(i, j);
      } else {
        inside.emplace_back(i, j);
      }
    }
  }
  const auto total = static_cast<std::size_t>(std::max<double>(
      1.0, std::round(spec.density * static_cast<double>(n) * static_cast<double>(n - 1))));
  std::size_t n_across = spec.n_blocks ? static_cast<std::size_t>(std::floor(0.05 * static_cast<double>(total))) : 0;
  n_across = std::min(n_across, across.size());
  const std::size_t n_inside = std::min(total - n_across, inside.size());

  auto sample = [&rng](std::vector<std::pair<Index, Index>>& pool, std::size_t k) {
    for (std::size_t m = 0; m < k; ++m) {
      std::uniform_int_distribution<std::size_t> pick(m, pool.size() - 1);
      std::swap(pool[m], pool[pick(rng)]);
    }
    pool.resize(k);
  };
  sample(inside, n_inside);
  sample(across, n_across);

  Matrix w = Matrix::Zero(n, n);
  std::uniform_real_distribution<double> weight(0.5, 1.5);
  for (const auto& [i, j] : inside) w(i, j) = weight(rng);
  for (const auto& [i, j] : across) w(i, j) = weight(rng);

  const double radius = numerics::spectral_radius(w);
  if (radius > 1e-12) {
    w *= spec.spectral_scale / radius;
  } else {
    // Nilpotent draw: any scaling keeps the radius at 0; bound the row sums instead.
    const double rows = w.rowwise().sum().maxCoeff();
    if (rows > 0.0) w *= spec.spectral_scale / rows;
  }
  return w;
}

//! X ~ N(0, 1), eps ~ N(0, sigma^2), y solves (I - W) y = X beta + eps.
inline Dataset generate_dataset(const Matrix& w_true, const Vector& beta_true, const SynthSpec& spec) {
  spec.validate();
  const Index n = w_true.rows();
  require(w_true.cols() == n, "synth", "W_true must be square");
  require(beta_true.size() >= 1, "synth", "beta_true is empty");
  std::mt19937_64 rng(spec.seed ^ 0x9E3779B97F4A7C15ULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Index p = beta_true.size();
  Dataset d;
  d.x.resize(n, p);
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i < n; ++i) d.x(i, j) = gauss(rng);
  }
  Vector eps(n);
  for (Index i = 0; i < n; ++i) eps(i) = spec.noise_sigma * gauss(rng);
  const Matrix iw = Matrix::Identity(n, n) - w_true;
  d.y = iw.partialPivLu().solve(d.x * beta_true + eps);
  for (Index i = 0; i < n; ++i) d.ids.push_back("s" + std::to_string(i));
  for (Index j = 0; j < p; ++j) d.column_names.push_back("x" + std::to_string(j + 1));
  d.dependent_name = "y";
  d.validate();
  return d;
}

//! Deterministic coefficient draw used by the CLI and tests: beta_j ~ N(0, 1).
inline Vector generate_beta(Index p, std::uint64_t seed) {
  std::mt19937_64 rng(seed + 7);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector b(p);
  for (Index j = 0; j < p; ++j) b(j) = gauss(rng);
  return b;
}

//! Submarket data: `betas.rows()` clusters of `cluster_size` rows each; row i of cluster c is
//! y = x^T betas.row(c) + eps with x ~ N(0, 1) plus a leading ones column.
struct ClusteredData {
  Dataset data;
  std::vector<int> labels;
};

inline ClusteredData generate_submarket_dataset(const Matrix& betas, Index cluster_size, double sigma,
                                                std::uint64_t seed) {
  require(betas.rows() >= 1 && betas.cols() >= 2, "synth", "betas must be k x p with p >= 2");
  require(cluster_size >= 2, "synth", "cluster_size must be >= 2");
  const Index k = betas.rows();
  const Index p = betas.cols();
  const Index n = k * cluster_size;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ClusteredData out;
  out.data.x.resize(n, p);
  out.data.y.resize(n);
  for (Index i = 0; i < n; ++i) {
    const auto c = static_cast<int>(i / cluster_size);
    out.data.x(i, 0) = 1.0;
    for (Index j = 1; j < p; ++j) out.data.x(i, j) = gauss(rng);
    out.data.y(i) = out.data.x.row(i).dot(betas.row(c)) + sigma * gauss(rng);
    out.labels.push_back(c);
    out.data.ids.push_back("m" + std::to_string(i));
  }
  out.data.column_names.push_back("const");
  for (Index j = 1; j < p; ++j) out.data.column_names.push_back("x" + std::to_string(j));
  out.data.validate();
  return out;
}

struct OracleResult {
  Matrix w;
  Vector beta;
  double objective = 0.0;
  std::vector<double> history;  //!< objective after every accepted step
  int halvings = 0;
};

//! Reference minimizer by projected proximal gradient on the reduced objective
//! f(W) = min_beta 1/2 ||y - W y - X beta||^2 + lambda1 ||W||_1 over W >= 0 with zero diagonal.
//! beta is refreshed exactly after each step. step_size <= 0 means 1/||y||^2, the Lipschitz
//! constant of the reduced gradient. Dense and slow; meant for n <= 30.
inline OracleResult oracle_solve(const Vector& y, const Matrix& x, double lambda1, int steps, double step_size = 0.0) {
  require(y.size() <= 30, "synth", "oracle_solve is for n <= 30");
  require(lambda1 >= 0.0, "synth", "lambda1 must be >= 0");
  const numerics::GramSolver gram(x);
  const Index n = y.size();
  const double yty = y.squaredNorm();
  double t = step_size > 0.0 ? step_size : (yty > 0.0 ? 1.0 / yty : 1.0);

  auto eval = [&](const Matrix& w, Vector& beta) {
    beta = gram.least_squares(y - w * y);
    const Vector r = y - w * y - x * beta;
    return 0.5 * r.squaredNorm() + lambda1 * w.sum();
  };

  OracleResult res;
  Matrix w = Matrix::Zero(n, n);
  Vector beta;
  double f = eval(w, beta);
  res.w = w;
  res.beta = beta;
  res.objective = f;
  res.history.push_back(f);
  int rising = 0;
  for (int k = 0; k < steps; ++k) {
    const Vector r = y - w * y - x * beta;
    // Gradient of the smooth term in W is -r y^T.
    Matrix next = (w + t * (r * y.transpose())).array() - t * lambda1;
    next = next.cwiseMax(0.0);
    next.diagonal().setZero();
    Vector nb;
    const double fn = eval(next, nb);
    if (fn > f + 1e-13 * (1.0 + std::abs(f))) {
      if (++rising > 10) {
        if (++res.halvings > 20) throw Error("synth", "oracle_solve diverged after 20 step halvings");
        t *= 0.5;
        rising = 0;
        w = res.w;
        beta = res.beta;
        f = res.objective;
        continue;
      }
    } else {
      rising = 0;
    }
    w = std::move(next);
    beta = std::move(nb);
    f = fn;
    res.history.push_back(f);
    if (f <= res.objective) {
      res.objective = f;
      res.w = w;
      res.beta = beta;
    }
  }
  return res;
}

//! F1 of the support {|W_est| > threshold} against {W_true > 0}, diagonal excluded.
inline double support_f1(const Matrix& w_est, const Matrix& w_true, double threshold = 1e-6) {
  require(w_est.rows() == w_true.rows() && w_est.cols() == w_true.cols(), "synth", "support_f1: shape mismatch");
  double tp = 0, fp = 0, fn = 0;
  for (Index j = 0; j < w_true.cols(); ++j) {
    for (Index i = 0; i < w_true.rows(); ++i) {
      if (i == j) continue;
      const bool est = std::abs(w_est(i, j)) > threshold;
      const bool tru = w_true(i, j) > 0.0;
      tp += est && tru;
      fp += est && !tru;
      fn += !est && tru;
    }
  }
  if (tp == 0) return 0.0;
  return 2.0 * tp / (2.0 * tp + fp + fn);
}

}  // namespace sarw::synth

#endif  // SARW_SYNTH_HPP_
