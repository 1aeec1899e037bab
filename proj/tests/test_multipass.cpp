// Copyright 2026 The schatten-stream Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "schatten/core/spectral.hpp"
#include "schatten/core/stream.hpp"
#include "schatten/fixtures.hpp"
#include "schatten/multipass.hpp"
#include "support.hpp"

namespace {

using namespace schatten;
using rng::GeneratorKind;
using schatten::testing::moments;
using schatten::testing::random_symmetric;

MultipassConfig config(std::size_t n, int p, GeneratorKind kind, std::uint64_t seed,
                       std::size_t t, std::size_t reps = 1) {
  MultipassConfig cfg;
  cfg.n = n;
  cfg.p = p;
  cfg.kind = kind;
  cfg.seed = seed;
  cfg.t = t;
  cfg.repetitions = reps;
  cfg.psd_asserted = true;
  return cfg;
}

/// M_l = G_l A G_{l+1}^T from the dense generators of repetition rho.
DenseMatrix factor(const MultipassSketch& s, const DenseMatrix& a, int l) {
  const DenseMatrix gl = s.generator(0, l).dense_matrix();
  const DenseMatrix gn = s.generator(0, (l + 1) % s.p()).dense_matrix();
  return multiply_transposed(multiply(gl, a), gn);
}

TEST(MultipassSizing, DefaultSketchRows) {
  MultipassConfig cfg;
  cfg.n = 1024;
  cfg.p = 4;
  cfg.repetitions = 1;
  MultipassSketch s(cfg);
  EXPECT_EQ(s.t(), 204u);  // ceil(2 * 1024^(2/3))
  EXPECT_EQ(s.t_prime(), 1u);
  cfg.p = 2;
  EXPECT_EQ(MultipassSketch(cfg).t(), 2u);
  cfg.kind = GeneratorKind::DebugIdentity;
  MultipassSketch id(cfg);
  EXPECT_EQ(id.t(), 1024u);
  EXPECT_EQ(id.t_prime(), 1024u);
}

TEST(MultipassSizing, PassCount) {
  for (int p = 2; p <= 9; ++p) {
    MultipassSketch s(config(8, p, GeneratorKind::ZdSparse, 0, 3));
    EXPECT_EQ(s.total_passes(), (p + 1) / 2) << p;
  }
}

TEST(MultipassSizing, TPrimeBoundedByT) {
  auto cfg = config(8, 4, GeneratorKind::ZdSparse, 0, 3);
  cfg.t_prime = 4;
  EXPECT_THROW(MultipassSketch s(cfg), Error);
}

TEST(MultipassAlgebra, FirstPassBlocks) {
  const DenseMatrix a = random_symmetric(9, 3);
  for (auto kind : {GeneratorKind::ZdSparse, GeneratorKind::Gaussian}) {
    MultipassSketch s(config(9, 2, kind, 4, 3));
    s.run_pass(to_stream(a, StreamMode::Entrywise));
    ASSERT_TRUE(s.finalized());
    const DenseMatrix xl = factor(s, a, 0);
    const DenseMatrix xr = factor(s, a, 1);
    for (std::size_t k = 0; k < 3; ++k) {
      EXPECT_NEAR(s.left(0).data()[k], xl.data()[k], 1e-12);
      EXPECT_NEAR(s.right(0).data()[k], xr.data()[k], 1e-12);
    }
    EXPECT_NEAR(s.estimator_value(0), trace_of_product(xl, xr), 1e-12);
  }
}

TEST(MultipassAlgebra, ChainMatchesDirectProduct) {
  const DenseMatrix a = random_symmetric(10, 5);
  for (int p : {3, 4, 5, 6}) {
    for (auto kind : {GeneratorKind::ZdSparse, GeneratorKind::Gaussian}) {
      MultipassSketch s(config(10, p, kind, 6, 4));
      const auto stream = to_stream(a, StreamMode::Turnstile);
      while (!s.finalized()) s.run_pass(stream);
      DenseMatrix chain = factor(s, a, 0);
      for (int l = 1; l < p; ++l) chain = multiply(chain, factor(s, a, l));
      EXPECT_NEAR(s.estimator_value(0), trace(chain), 1e-10 * (1 + std::abs(trace(chain))))
          << "p=" << p;
    }
  }
}

TEST(MultipassAlgebra, ZeroMatrixGivesZero) {
  MatrixStream empty{16, 16, StreamMode::Turnstile, {}, true};
  MultipassConfig cfg;
  cfg.p = 5;
  cfg.psd_asserted = true;
  cfg.repetitions = 4;
  EXPECT_EQ(estimate_multipass(empty, cfg).value, 0.0);
}

TEST(MultipassAlgebra, IdentityKindIsExact) {
  const double d[] = {1, 2, 3};
  const auto stream = to_stream(DenseMatrix::diagonal(d), StreamMode::Entrywise);
  for (int p : {2, 3, 4, 5}) {
    MultipassConfig cfg;
    cfg.p = p;
    cfg.kind = GeneratorKind::DebugIdentity;
    cfg.repetitions = 1;
    cfg.psd_asserted = true;
    const auto e = estimate_multipass(stream, cfg);
    EXPECT_NEAR(e.value, 1 + std::pow(2, p) + std::pow(3, p), 1e-9);
    EXPECT_EQ(e.passes, (p + 1) / 2);
  }
}

TEST(MultipassAlgebra, DensePassMatchesStreaming) {
  const DenseMatrix a = random_symmetric(12, 7);
  for (auto kind : {GeneratorKind::ZdSparse, GeneratorKind::Gaussian}) {
    MultipassSketch dense(config(12, 5, kind, 2, 4, 3));
    MultipassSketch streamed(config(12, 5, kind, 2, 4, 3));
    const auto stream = to_stream(a, StreamMode::Turnstile);
    while (!dense.finalized()) dense.run_pass(a);
    while (!streamed.finalized()) streamed.run_pass(stream);
    for (std::size_t rho = 0; rho < 3; ++rho)
      EXPECT_NEAR(dense.estimator_value(rho), streamed.estimator_value(rho),
                  1e-10 * (1 + std::abs(streamed.estimator_value(rho))));
  }
}

TEST(MultipassErrors, StreamChangeBetweenPassesDetected) {
  MultipassSketch s(config(6, 4, GeneratorKind::ZdSparse, 0, 2));
  MatrixStream stream{6, 6, StreamMode::Turnstile, {{0, 0, 1.0}, {1, 2, 2.0}}, true};
  s.run_pass(stream);
  stream.updates[1].value = 2.5;
  try {
    s.run_pass(stream);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::StreamDrift);
  }
}

TEST(MultipassErrors, ExtraPassRejected) {
  MultipassSketch s(config(6, 3, GeneratorKind::ZdSparse, 0, 2));
  MatrixStream stream{6, 6, StreamMode::Turnstile, {{0, 0, 1.0}}, true};
  s.run_pass(stream);
  s.run_pass(stream);
  try {
    s.run_pass(stream);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::PassOverflow);
  }
}

TEST(MultipassErrors, EstimateBeforeLastPass) {
  MultipassSketch s(config(6, 6, GeneratorKind::ZdSparse, 0, 2));
  MatrixStream stream{6, 6, StreamMode::Turnstile, {{0, 0, 1.0}}, true};
  s.run_pass(stream);
  try {
    s.estimate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotFinalized);
  }
}

TEST(MultipassErrors, OddPNeedsPsd) {
  auto cfg = config(6, 3, GeneratorKind::ZdSparse, 0, 2);
  cfg.psd_asserted = false;
  MatrixStream stream{6, 6, StreamMode::Turnstile, {{0, 0, 1.0}}, true};
  try {
    estimate_multipass(stream, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::RequiresPSD);
  }
}

TEST(MultipassErrors, NonReplayableRejected) {
  MultipassSketch s(config(6, 4, GeneratorKind::ZdSparse, 0, 2));
  MatrixStream stream{6, 6, StreamMode::Turnstile, {{0, 0, 1.0}}, false};
  EXPECT_THROW(s.run_pass(stream), Error);
}

TEST(MultipassStatistics, IdentityWithinTolerance) {
  const auto stream = to_stream(DenseMatrix::identity(64), StreamMode::Entrywise);
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    MultipassConfig cfg;
    cfg.p = 4;
    cfg.epsilon = 0.2;
    cfg.seed = seed;
    ok += schatten::testing::relative_error(estimate_multipass(stream, cfg).value, 64.0) <= 0.2;
  }
  EXPECT_GE(ok, 90);
}

TEST(MultipassStatistics, Unbiased) {
  const auto fx = fixtures::random_psd(16, fixtures::UniformProfile{}, 61);
  for (int p : {3, 4, 5}) {
    const double truth = schatten_norm_exact(fx.matrix, p);
    std::vector<double> ys;
    for (std::uint64_t seed = 0; seed < 3000; ++seed) {
      MultipassSketch s(config(16, p, GeneratorKind::ZdSparse, seed, 4));
      while (!s.finalized()) s.run_pass(fx.matrix);
      ys.push_back(s.estimator_value(0));
    }
    const auto m = moments(ys);
    EXPECT_LT(std::abs(m.mean - truth), 4 * m.standard_error) << "p=" << p;
  }
}

TEST(MultipassSpace, LiveAndPeakCells) {
  MultipassSketch s(config(32, 6, GeneratorKind::ZdSparse, 1, 8, 2));
  EXPECT_EQ(s.live_cells_per_repetition(), 16u);
  EXPECT_EQ(s.sketch_cells(), 32u);
  const auto a = random_symmetric(32, 1);
  while (!s.finalized()) s.run_pass(a);
  EXPECT_LE(s.peak_cells_per_repetition(), 4u * 8u);
  EXPECT_GE(s.peak_cells_per_repetition(), 2u * 8u);
}

TEST(MultipassStatistics, RelativeVarianceFlatInN) {
  // At the default t the relative variance does not grow with n.
  std::vector<double> rel_var;
  for (std::size_t n : {32u, 128u}) {
    const DenseMatrix id = DenseMatrix::identity(n);
    std::vector<double> ys;
    for (std::uint64_t seed = 0; seed < 400; ++seed) {
      MultipassConfig cfg;
      cfg.n = n;
      cfg.p = 4;
      cfg.seed = seed;
      cfg.repetitions = 1;
      MultipassSketch s(cfg);
      while (!s.finalized()) s.run_pass(id);
      ys.push_back(s.estimator_value(0) / static_cast<double>(n));
    }
    rel_var.push_back(moments(ys).variance);
  }
  EXPECT_LT(rel_var[1], 1.5 * rel_var[0]);
}

}  // namespace
