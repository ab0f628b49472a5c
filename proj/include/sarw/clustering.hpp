#ifndef SARW_CLUSTERING_HPP_
#define SARW_CLUSTERING_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "sarw/common.hpp"
#include "sarw/numerics.hpp"

namespace sarw::clustering {

struct SpectralEmbedding {
  int k = 1;
  Vector eigenvalues;  //!< of (W + W^T) / 2, descending
  Matrix coords;       //!< n x k leading eigenvectors
  Warnings warnings;
};

struct ClusterAssignment {
  std::vector<int> labels;  //!< in [0, k), numbered by first appearance
  int k = 0;
  double inertia = 0.0;
  std::uint64_t seed = 42;
  Warnings warnings;
};

inline constexpr int kDefaultKMax = 10;
inline constexpr int kDefaultRestarts = 20;

//! k maximizing the relative gap (l_i - l_{i+1}) / (|l_{i+1}| + 1e-12) over 1 <= i < k_max.
//! A spectrum without any gap yields 1 and a warning.
inline int select_k(const Vector& eigenvalues, int k_max = kDefaultKMax, Warnings* warnings = nullptr) {
  require(eigenvalues.size() >= 1, "clustering", "select_k: empty spectrum");
  require(k_max >= 1, "clustering", "k_max must be >= 1");
  const Index last = std::min<Index>(k_max, eigenvalues.size());
  const double scale = std::max(1.0, eigenvalues.cwiseAbs().maxCoeff());
  int best_k = 1;
  double best = -1.0;
  bool any_gap = false;
  for (Index i = 1; i < last; ++i) {
    const double lo = eigenvalues(i);
    const double diff = eigenvalues(i - 1) - lo;
    if (diff <= 1e-10 * scale) continue;
    any_gap = true;
    const double rel = diff / (std::abs(lo) + 1e-12);
    if (rel > best) {
      best = rel;
      best_k = static_cast<int>(i);
    }
  }
  if (!any_gap) {
    if (warnings) warnings->push_back("no eigen-gap among the leading eigenvalues; using k = 1");
    return 1;
  }
  return best_k;
}

//! Spectral embedding of the symmetrized W. k comes from select_k unless `k` is given.
inline SpectralEmbedding spectral_embed(const Matrix& w, std::optional<int> k = std::nullopt,
                                        int k_max = kDefaultKMax) {
  require(w.rows() == w.cols(), "clustering", "W must be square");
  require(w.rows() >= 1, "clustering", "W is empty");
  require(w.allFinite(), "clustering", "W has non-finite entries");
  const numerics::EigenDecomposition eig = numerics::sym_eig(0.5 * (w + w.transpose()));
  SpectralEmbedding out;
  out.eigenvalues = eig.values;
  out.k = k ? *k : select_k(eig.values, k_max, &out.warnings);
  require(out.k >= 1 && out.k <= w.rows(), "clustering", "k must be in [1, n]");
  out.coords = eig.vectors.leftCols(out.k);
  return out;
}

//! Renumbers labels by order of first appearance.
inline std::vector<int> canonical_labels(const std::vector<int>& labels) {
  std::map<int, int> seen;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int l : labels) {
    const auto it = seen.emplace(l, static_cast<int>(seen.size())).first;
    out.push_back(it->second);
  }
  return out;
}

namespace detail {

struct LloydResult {
  std::vector<int> labels;
  double inertia = 0.0;
};

inline LloydResult lloyd(const Matrix& pts, int k, std::mt19937_64& rng, int max_iter) {
  const Index n = pts.rows();
  // k-means++ seeding.
  Matrix centers(k, pts.cols());
  std::uniform_int_distribution<Index> first(0, n - 1);
  centers.row(0) = pts.row(first(rng));
  Vector d2(n);
  for (Index i = 0; i < n; ++i) d2(i) = (pts.row(i) - centers.row(0)).squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Index pick = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double r = u(rng);
      for (pick = 0; pick < n - 1; ++pick) {
        r -= d2(pick);
        if (r < 0.0) break;
      }
    } else {
      pick = first(rng);
    }
    centers.row(c) = pts.row(pick);
    for (Index i = 0; i < n; ++i) d2(i) = std::min(d2(i), (pts.row(i) - centers.row(c)).squaredNorm());
  }

  LloydResult res;
  res.labels.assign(static_cast<std::size_t>(n), -1);
  Vector dist(n);
  for (int it = 0; it < max_iter; ++it) {
    bool changed = false;
    for (Index i = 0; i < n; ++i) {
      int best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = (pts.row(i) - centers.row(c)).squaredNorm();
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      dist(i) = bd;
      if (res.labels[static_cast<std::size_t>(i)] != best) {
        res.labels[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    // Empty clusters take the point farthest from its centre.
    std::vector<Index> counts(static_cast<std::size_t>(k), 0);
    for (int l : res.labels) ++counts[static_cast<std::size_t>(l)];
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) continue;
      Index far = -1;
      for (Index i = 0; i < n; ++i) {
        if (counts[static_cast<std::size_t>(res.labels[static_cast<std::size_t>(i)])] < 2) continue;
        if (far < 0 || dist(i) > dist(far)) far = i;
      }
      if (far < 0) break;
      --counts[static_cast<std::size_t>(res.labels[static_cast<std::size_t>(far)])];
      res.labels[static_cast<std::size_t>(far)] = c;
      counts[static_cast<std::size_t>(c)] = 1;
      dist(far) = 0.0;
      changed = true;
    }
    centers.setZero();
    for (Index i = 0; i < n; ++i) centers.row(res.labels[static_cast<std::size_t>(i)]) += pts.row(i);
    for (int c = 0; c < k; ++c) centers.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
    if (!changed) break;
  }
  res.inertia = 0.0;
  for (Index i = 0; i < n; ++i) res.inertia += (pts.row(i) - centers.row(res.labels[static_cast<std::size_t>(i)])).squaredNorm();
  return res;
}

}  // namespace detail

//! Lloyd's algorithm with k-means++ seeding; restart r uses seed + r and the lowest inertia wins.
inline ClusterAssignment kmeans(const Matrix& coords, int k, std::uint64_t seed = 42, int restarts = kDefaultRestarts,
                                int max_iter = 300) {
  require(k >= 1, "clustering", "k must be >= 1");
  require(k <= coords.rows(), "clustering", "k (" + std::to_string(k) + ") exceeds n (" +
                                                std::to_string(coords.rows()) + ")");
  require(restarts >= 1, "clustering", "restarts must be >= 1");
  require(coords.allFinite(), "clustering", "embedding has non-finite entries");
  ClusterAssignment out;
  out.k = k;
  out.seed = seed;
  out.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(r));
    detail::LloydResult res = detail::lloyd(coords, k, rng, max_iter);
    if (res.inertia < out.inertia) {
      out.inertia = res.inertia;
      out.labels = std::move(res.labels);
    }
  }
  out.labels = canonical_labels(out.labels);
  return out;
}

//! spectral_embed followed by kmeans on the embedding rows.
inline ClusterAssignment cluster_w(const Matrix& w, std::optional<int> k_override = std::nullopt,
                                   std::uint64_t seed = 42, SpectralEmbedding* embedding = nullptr,
                                   int restarts = kDefaultRestarts) {
  SpectralEmbedding emb = spectral_embed(w, k_override);
  ClusterAssignment a = kmeans(emb.coords, emb.k, seed, restarts);
  a.warnings = emb.warnings;
  if (embedding) *embedding = std::move(emb);
  return a;
}

//! Adjusted Rand index between two labelings of the same points.
inline double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  require(a.size() == b.size(), "clustering", "label vectors differ in length");
  const std::vector<int> ca = canonical_labels(a);
  const std::vector<int> cb = canonical_labels(b);
  const int ka = ca.empty() ? 0 : *std::max_element(ca.begin(), ca.end()) + 1;
  const int kb = cb.empty() ? 0 : *std::max_element(cb.begin(), cb.end()) + 1;
  Matrix table = Matrix::Zero(ka, kb);
  for (std::size_t i = 0; i < ca.size(); ++i) table(ca[i], cb[i]) += 1.0;
  auto choose2 = [](double v) { return v * (v - 1.0) / 2.0; };
  double sum_ij = 0.0;
  for (Index i = 0; i < table.size(); ++i) sum_ij += choose2(table.data()[i]);
  double sum_a = 0.0, sum_b = 0.0;
  for (Index i = 0; i < ka; ++i) sum_a += choose2(table.row(i).sum());
  for (Index j = 0; j < kb; ++j) sum_b += choose2(table.col(j).sum());
  const double total = choose2(static_cast<double>(ca.size()));
  if (total == 0.0) return 1.0;
  const double expected = sum_a * sum_b / total;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;
  return (sum_ij - expected) / (max_index - expected);
}

}  // namespace sarw::clustering

#endif  // SARW_CLUSTERING_HPP_
