#ifndef SARW_BENCH_HPP_
#define SARW_BENCH_HPP_

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "sarw/admm.hpp"
#include "sarw/common.hpp"
#include "sarw/synth.hpp"

namespace sarw::bench {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

//! Synthetic problem used by the benchmarks: sparse W_true (about 5 links per row, radius 0.5),
//! standard-normal X and beta, noise 0.01.
inline Dataset bench_instance(Index n, Index p, std::uint64_t seed) {
  synth::SynthSpec spec;
  spec.n = n;
  spec.p = p;
  spec.density = std::min(1.0, 5.0 / static_cast<double>(n - 1));
  spec.spectral_scale = 0.5;
  spec.noise_sigma = 0.01;
  spec.seed = seed;
  const Matrix w = synth::generate_w(spec);
  return synth::generate_dataset(w, synth::generate_beta(p, seed), spec);
}

struct ConvergenceRun {
  Index n = 0;
  Index p = 0;
  double seconds = 0.0;
  admm::SarFit fit;
};

inline ConvergenceRun time_fit(const Dataset& d, const admm::AdmmConfig& cfg) {
  ConvergenceRun r;
  r.n = d.n();
  r.p = d.p();
  const auto t0 = Clock::now();
  r.fit = admm::fit_admm(d.y, d.x, cfg);
  r.seconds = seconds_since(t0);
  return r;
}

struct ScalingPoint {
  Index n = 0;
  double seconds_per_iter = 0.0;
};

struct ScalingResult {
  std::vector<ScalingPoint> points;
  double slope = 0.0;  //!< least-squares slope of log(time per iteration) on log(n)
};

//! Time per ADMM iteration at each n: `iters` iterations with stopping disabled, best of `repeats`.
inline ScalingResult iteration_scaling(const std::vector<Index>& ns, Index p, int iters, int repeats,
                                       std::uint64_t seed, double lambda1 = 0.1) {
  require(ns.size() >= 2, "bench", "need at least two problem sizes");
  require(iters >= 1 && repeats >= 1, "bench", "iters and repeats must be >= 1");
  ScalingResult out;
  for (Index n : ns) {
    const Dataset d = bench_instance(n, p, seed);
    admm::AdmmConfig cfg;
    cfg.lambda1 = lambda1;
    cfg.max_iter = iters;
    cfg.eps_abs = std::numeric_limits<double>::min();
    cfg.eps_rel = std::numeric_limits<double>::min();
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < repeats; ++r) {
      const ConvergenceRun run = time_fit(d, cfg);
      best = std::min(best, run.seconds / static_cast<double>(run.fit.iterations));
    }
    out.points.push_back({n, best});
  }
  double mx = 0.0, my = 0.0;
  for (const auto& pt : out.points) {
    mx += std::log(static_cast<double>(pt.n));
    my += std::log(pt.seconds_per_iter);
  }
  mx /= static_cast<double>(out.points.size());
  my /= static_cast<double>(out.points.size());
  double sxy = 0.0, sxx = 0.0;
  for (const auto& pt : out.points) {
    const double dx = std::log(static_cast<double>(pt.n)) - mx;
    sxy += dx * (std::log(pt.seconds_per_iter) - my);
    sxx += dx * dx;
  }
  out.slope = sxy / sxx;
  return out;
}

}  // namespace sarw::bench

#endif  // SARW_BENCH_HPP_
