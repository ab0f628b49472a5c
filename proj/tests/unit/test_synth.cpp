#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"
#include "sarw/numerics.hpp"
#include "sarw/synth.hpp"

using namespace sarw;
using namespace sarw::synth;

TEST(GenerateW, Invariants) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    SynthSpec spec;
    spec.n = 60;
    spec.seed = seed;
    const Matrix w = generate_w(spec);
    EXPECT_EQ(w.diagonal().cwiseAbs().maxCoeff(), 0.0);
    EXPECT_GE(w.minCoeff(), 0.0);
    EXPECT_EQ((w.array() > 0.0).count(), static_cast<Index>(std::round(0.05 * 60 * 59)));
    const double r = numerics::spectral_radius(w);
    if (r > 1e-9) {
      EXPECT_NEAR(r, 0.5, 1e-9);
    }
    EXPECT_TRUE(generate_w(spec) == w);
  }
}

TEST(GenerateW, BlocksHoldMostLinks) {
  SynthSpec spec;
  spec.n = 100;
  spec.density = 0.1;
  spec.n_blocks = 4;
  const Matrix w = generate_w(spec);
  double inside = 0, across = 0;
  for (Index j = 0; j < 100; ++j) {
    for (Index i = 0; i < 100; ++i) {
      if (w(i, j) <= 0.0) continue;
      (block_of(i, 100, 4) == block_of(j, 100, 4) ? inside : across) += 1;
    }
  }
  EXPECT_NEAR(across / (inside + across), 0.05, 0.005);
}

TEST(GenerateW, Validation) {
  SynthSpec spec;
  spec.density = 0.0;
  EXPECT_THROW(generate_w(spec), Error);
  spec.density = 0.1;
  spec.spectral_scale = 1.0;
  EXPECT_THROW(generate_w(spec), Error);
}

TEST(GenerateDataset, SolvesTheModelExactlyWithoutNoise) {
  SynthSpec spec;
  spec.n = 40;
  spec.noise_sigma = 0.0;
  const Matrix w = generate_w(spec);
  const Vector beta = generate_beta(3, 1);
  const Dataset d = generate_dataset(w, beta, spec);
  EXPECT_LE((d.y - w * d.y - d.x * beta).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(d.ids[0], "s0");
  EXPECT_EQ(d.column_names[2], "x3");
}

TEST(GenerateDataset, NoiseHasRequestedScale) {
  SynthSpec spec;
  spec.n = 400;
  spec.noise_sigma = 0.5;
  spec.density = 0.01;
  const Matrix w = generate_w(spec);
  const Vector beta = generate_beta(3, 2);
  const Dataset d = generate_dataset(w, beta, spec);
  const Vector eps = d.y - w * d.y - d.x * beta;
  EXPECT_NEAR(std::sqrt(eps.squaredNorm() / 400.0), 0.5, 0.06);
}

TEST(GenerateSubmarkets, LayoutAndLabels) {
  Matrix betas(2, 2);
  betas << 1.0, 2.0, -1.0, 0.0;
  const ClusteredData cd = generate_submarket_dataset(betas, 10, 0.0, 3);
  EXPECT_EQ(cd.data.n(), 20);
  EXPECT_EQ(cd.data.column_names[0], "const");
  EXPECT_EQ(cd.labels[9], 0);
  EXPECT_EQ(cd.labels[10], 1);
  EXPECT_NEAR(cd.data.y(12), -1.0, 1e-15);
  EXPECT_TRUE((cd.data.x.col(0).array() == 1.0).all());
}

TEST(Oracle, ObjectiveNeverRisesAndMeetsOptimality) {
  SynthSpec spec;
  spec.n = 8;
  spec.p = 2;
  spec.density = 0.2;
  const Matrix w = generate_w(spec);
  const Dataset d = generate_dataset(w, generate_beta(2, 3), spec);
  const double lambda1 = 0.1;
  const OracleResult r = oracle_solve(d.y, d.x, lambda1, 50000);
  for (std::size_t k = 1; k < r.history.size(); ++k) {
    EXPECT_LE(r.history[k], r.history[k - 1] + 1e-12 * (1.0 + std::abs(r.history[k - 1])));
  }
  // Optimality of the reduced problem: gradient g = -(r y^T) with g + lambda = 0 on the support
  // and g + lambda >= 0 off it.
  const Vector res = d.y - r.w * d.y - d.x * r.beta;
  const Matrix g = -res * d.y.transpose();
  for (Index j = 0; j < 8; ++j) {
    for (Index i = 0; i < 8; ++i) {
      if (i == j) continue;
      if (r.w(i, j) > 1e-10) {
        EXPECT_NEAR(g(i, j) + lambda1, 0.0, 1e-4);
      } else {
        EXPECT_GE(g(i, j) + lambda1, -1e-4);
      }
    }
  }
  EXPECT_THROW(oracle_solve(Vector::Ones(31), Matrix::Ones(31, 1), 0.1, 1), Error);
}

TEST(SupportF1, KnownValues) {
  Matrix t = Matrix::Zero(3, 3);
  t(0, 1) = 1.0;
  t(1, 2) = 1.0;
  EXPECT_DOUBLE_EQ(support_f1(t, t), 1.0);
  Matrix e = Matrix::Zero(3, 3);
  e(0, 1) = 0.3;
  e(2, 0) = 0.3;
  // tp = 1, fp = 1, fn = 1.
  EXPECT_DOUBLE_EQ(support_f1(e, t), 0.5);
  EXPECT_DOUBLE_EQ(support_f1(Matrix::Zero(3, 3), t), 0.0);
  e(0, 0) = 5.0;
  EXPECT_DOUBLE_EQ(support_f1(e, t), 0.5);
}
