// Copyright 2026 The schatten-stream Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "schatten/core/spectral.hpp"
#include "schatten/core/stream.hpp"
#include "schatten/fixtures.hpp"
#include "schatten/roworder/count_sketch.hpp"
#include "schatten/roworder/roworder_sketch.hpp"
#include "schatten/roworder/weighted_reservoir.hpp"
#include "support.hpp"

namespace {

using namespace schatten;
using schatten::testing::moments;

template <typename Fn>
ErrorKind error_kind_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorKind::InvalidParameter;
}

RowOrderConfig config(std::size_t n, int p, std::uint64_t seed) {
  RowOrderConfig cfg;
  cfg.n = n;
  cfg.p = p;
  cfg.seed = seed;
  return cfg;
}

RowOrderSketch ingested(const MatrixStream& s, RowOrderConfig cfg) {
  cfg.n = s.n;
  RowOrderSketch sketch(cfg);
  sketch.ingest(s);
  sketch.finish();
  return sketch;
}

MatrixStream diagonal_rows(const std::vector<double>& values) {
  return to_stream(fixtures::diagonal(values), StreamMode::RowOrder);
}

TEST(RowOrderSizing, SampleBudget) {
  EXPECT_EQ(RowOrderSketch(config(400, 6, 0)).sample_budget(), 223u);  // 20 / 0.09
  // k = 2: n^(2/3) / eps^2.
  const auto expected = static_cast<std::size_t>(std::ceil(std::pow(400.0, 2.0 / 3.0) / 0.09));
  RowOrderSketch p10(config(400, 10, 0));
  EXPECT_EQ(p10.sample_budget(), expected);
  EXPECT_EQ(p10.k(), 2);
}

TEST(RowOrderSizing, CountSketchShape) {
  RowOrderSketch s(config(256, 6, 0));
  const std::size_t t = s.sample_budget();
  EXPECT_EQ(s.cs_width(), 8 * t * 8);
  EXPECT_EQ(s.cs_depth(), 40u);
  auto cfg = config(256, 6, 0);
  cfg.cs_width = 100;
  cfg.cs_depth = 3;
  RowOrderSketch o(cfg);
  EXPECT_EQ(o.cs_width(), 100u);
  EXPECT_EQ(o.cs_depth(), 3u);
}

TEST(RowOrderSizing, UnsupportedExponents) {
  for (int p : {2, 3, 4, 8, 12})
    EXPECT_EQ(error_kind_of([&] { RowOrderSketch s(config(10, p, 0)); }), ErrorKind::UnsupportedP)
        << p;
  EXPECT_EQ(error_kind_of([] { RowOrderSketch s(config(0, 6, 0)); }),
            ErrorKind::InvalidParameter);
}

TEST(RowOrderIngest, SingleEntryRow) {
  RowOrderSketch s(config(8, 6, 1));
  const SparseEntry row[] = {{3, 2.0}};
  s.ingest_row(5, row);
  s.finish();
  EXPECT_EQ(s.frobenius_a(), 4.0);
  EXPECT_EQ(s.frobenius_b_estimate(), 16.0);
  EXPECT_EQ(s.gram_updates(), 1u);
  EXPECT_EQ(s.row_norm_estimates()[3], 16.0);
  EXPECT_EQ(s.heavy_rows(), std::vector<std::size_t>{3});
}

TEST(RowOrderIngest, ZeroRowIsIgnored) {
  RowOrderSketch s(config(8, 6, 1));
  const SparseEntry row[] = {{1, 0.0}, {2, 0.0}};
  s.ingest_row(0, row);
  EXPECT_EQ(s.rows_ingested(), 1u);
  EXPECT_EQ(s.gram_updates(), 0u);
  EXPECT_EQ(s.frobenius_a(), 0.0);
}

TEST(RowOrderIngest, FrobeniusOfAIsExact) {
  const auto stream = fixtures::random_sparse(100, 3, 5);
  const DenseMatrix a = materialize(stream);
  auto cfg = config(100, 6, 0);
  RowOrderSketch s(cfg);
  s.ingest(stream);
  EXPECT_NEAR(s.frobenius_a(), frobenius_norm_squared(a), 1e-12 * frobenius_norm_squared(a));
  EXPECT_EQ(s.rows_ingested(), 100u);
  EXPECT_EQ(s.gram_updates(), 100u * 9u);
}

TEST(RowOrderIngest, Errors) {
  RowOrderSketch s(config(8, 6, 1));
  const SparseEntry ok[] = {{1, 1.0}};
  const SparseEntry unsorted[] = {{3, 1.0}, {1, 1.0}};
  const SparseEntry wide[] = {{0, 1.0}, {1, 1.0}, {2, 1.0}, {3, 1.0}, {4, 1.0}};
  const SparseEntry outside[] = {{8, 1.0}};
  EXPECT_EQ(error_kind_of([&] { s.heavy_rows(); }), ErrorKind::NotFinalized);
  s.ingest_row(2, ok);
  EXPECT_EQ(error_kind_of([&] { s.ingest_row(2, ok); }), ErrorKind::ModeMismatch);
  EXPECT_EQ(error_kind_of([&] { s.ingest_row(1, ok); }), ErrorKind::ModeMismatch);
  EXPECT_EQ(error_kind_of([&] { s.ingest_row(3, unsorted); }), ErrorKind::ModeMismatch);
  EXPECT_EQ(error_kind_of([&] { s.ingest_row(4, wide); }), ErrorKind::SparsityExceeded);
  EXPECT_EQ(error_kind_of([&] { s.ingest_row(5, outside); }), ErrorKind::IndexOutOfRange);
  EXPECT_EQ(error_kind_of([&] { s.ingest_row(8, ok); }), ErrorKind::IndexOutOfRange);
  MatrixStream turnstile{8, 8, StreamMode::Turnstile, {}, true};
  EXPECT_EQ(error_kind_of([&] { s.ingest(turnstile); }), ErrorKind::ModeMismatch);
  s.finish();
  EXPECT_EQ(error_kind_of([&] { s.ingest_row(6, ok); }), ErrorKind::ModeMismatch);
  EXPECT_EQ(error_kind_of([&] { s.precision_sample(2); }), ErrorKind::InvalidParameter);
}

TEST(RowOrderHeavy, EmptyForZeroMatrix) {
  MatrixStream empty{50, 50, StreamMode::RowOrder, {}, true};
  auto s = ingested(empty, config(50, 6, 0));
  EXPECT_TRUE(s.heavy_rows().empty());
  EXPECT_EQ(s.finalize().value, 0.0);
}

TEST(RowOrderHeavy, DominantRowFound) {
  std::vector<double> d(200, 1.0);
  d[17] = 10.0;
  const auto stream = diagonal_rows(d);
  int found = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto cfg = config(200, 6, seed);
    cfg.sample_budget = 2;
    auto s = ingested(stream, cfg);
    const auto& k = s.heavy_rows();
    found += std::find(k.begin(), k.end(), 17u) != k.end();
    EXPECT_LE(k.size(), 20u);
  }
  EXPECT_GE(found, 95);
}

TEST(RowOrderHeavy, CapAtTenT) {
  // Every row is equally heavy; K keeps exactly 10T of them.
  const auto stream = diagonal_rows(std::vector<double>(100, 1.0));
  auto cfg = config(100, 6, 3);
  cfg.sample_budget = 3;
  cfg.row_norm_bucket_factor = 1.0;  // force collisions so estimates exceed the threshold
  auto s = ingested(stream, cfg);
  EXPECT_EQ(s.heavy_rows().size(), 30u);
  const auto e = s.finalize();
  EXPECT_EQ(e.heavy_a_rows, 30u);
}

TEST(RowOrderHeavy, ThresholdSeparatesRows) {
  // ||B_i||^2 = d_i^4. With T = 4 the threshold is ~L/40: rows well above
  // it are kept, rows well below are not (collisions aside).
  std::vector<double> d;
  for (int i = 0; i < 8; ++i) d.push_back(2.5);   // 39.06 each
  for (int i = 0; i < 64; ++i) d.push_back(1.0);  // 1 each
  const auto stream = diagonal_rows(d);
  double l = 0.0;
  for (double v : d) l += std::pow(v, 4);
  int heavy_kept = 0, light_kept = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto cfg = config(d.size(), 6, seed);
    cfg.sample_budget = 4;
    auto s = ingested(stream, cfg);
    for (std::size_t i : s.heavy_rows()) (i < 8 ? heavy_kept : light_kept) += 1;
  }
  ASSERT_GT(39.06, 2 * l / 40);
  EXPECT_GE(heavy_kept, 50 * 8 * 95 / 100);
  EXPECT_LE(light_kept, 50 * 64 * 5 / 100);
}

TEST(RowOrderSampling, FullCoverage) {
  const auto stream = fixtures::random_sparse(40, 2, 9);
  auto cfg = config(40, 6, 4);
  cfg.sample_budget = 1000;
  auto s = ingested(stream, cfg);
  const auto sample = s.precision_sample(1);
  ASSERT_EQ(sample.indices.size(), 40u);
  for (std::size_t i = 0; i < 40; ++i) {
    EXPECT_EQ(sample.indices[i], i);
    EXPECT_EQ(sample.tau[i], 1.0);
    EXPECT_TRUE(sample.heavy[i]);
  }
  const auto rows = s.row_sample();
  EXPECT_EQ(rows.indices.size(), 40u);
}

TEST(RowOrderSampling, DiagonalRowsRecovered) {
  std::vector<double> d(60);
  for (std::size_t i = 0; i < 60; ++i) d[i] = 1.0 + 0.008 * i;
  const auto stream = diagonal_rows(d);
  int exact = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto cfg = config(60, 6, seed);
    cfg.sample_budget = 100;
    auto s = ingested(stream, cfg);
    const auto sample = s.precision_sample(1);
    bool all = sample.indices.size() == 60;
    for (std::size_t k = 0; all && k < sample.indices.size(); ++k) {
      const std::size_t i = sample.indices[k];
      const auto& row = sample.rows[k];
      all = row.size() == 1 && row[0].col == i &&
            std::abs(row[0].value - d[i] * d[i]) <= 1e-6;
    }
    exact += all;
  }
  EXPECT_GE(exact, 95);
}

TEST(RowOrderSampling, InclusionMatchesPrecisionRate) {
  // Four heavy rows and 36 rows with graded norms; a row clear of K should
  // enter I_1 with probability ~ T ||B_i||^2 / ||B||_F^2.
  std::vector<double> d;
  for (int i = 0; i < 4; ++i) d.push_back(3.0);
  for (int i = 0; i < 36; ++i) d.push_back(1.0 + 0.02 * i);
  const auto stream = diagonal_rows(d);
  double l = 0.0;
  for (double v : d) l += std::pow(v, 4);
  const int seeds = 1500;
  std::vector<int> hits(d.size(), 0);
  for (int seed = 0; seed < seeds; ++seed) {
    auto cfg = config(d.size(), 6, seed);
    cfg.sample_budget = 8;
    cfg.row_norm_bucket_factor = 200.0;
    auto s = ingested(stream, cfg);
    const auto sample = s.precision_sample(1);
    for (std::size_t k = 0; k < sample.indices.size(); ++k)
      if (!sample.heavy[k]) ++hits[sample.indices[k]];
  }
  for (std::size_t i = 4; i < d.size(); ++i) {
    const double q = std::min(1.0, 8.0 * std::pow(d[i], 4) / l);
    if (q > 0.08) continue;  // near the K threshold q = 1/10
    const double freq = static_cast<double>(hits[i]) / seeds;
    const double se = std::sqrt(q * (1 - q) / seeds);
    EXPECT_NEAR(freq, q, std::max(0.1 * q, 4 * se)) << "row " << i;
  }
}

TEST(RowOrderEstimator, FullCoverageIsExact) {
  for (int p : {6, 10}) {
    const auto stream = fixtures::random_sparse(30, 2, 12);
    const double truth = schatten_norm_exact(materialize(stream), p);
    auto cfg = config(30, p, 1);
    cfg.sample_budget = 1000;
    const auto e = estimate_roworder(stream, cfg);
    EXPECT_NEAR(e.value / truth, 1.0, 1e-9) << "p=" << p;
    EXPECT_EQ(e.algorithm, "roworder");
    EXPECT_EQ(e.sample_budget, 1000u);
  }
}

TEST(RowOrderEstimator, IdentityGivesN) {
  const auto stream = to_stream(DenseMatrix::identity(100), StreamMode::RowOrder);
  const auto e = estimate_roworder(stream, config(100, 6, 2));
  EXPECT_NEAR(e.value, 100.0, 1e-9);
  EXPECT_EQ(e.heavy_b_rows, 100u);
}

TEST(RowOrderEstimator, SubsampledIsNearlyUnbiased) {
  const auto stream = fixtures::random_sparse(200, 2, 77);
  const DenseMatrix a = materialize(stream);
  for (int p : {6, 10}) {
    const double truth = schatten_norm_exact(a, p);
    std::vector<double> ys;
    for (std::uint64_t seed = 0; seed < (p == 6 ? 300u : 150u); ++seed) {
      auto cfg = config(200, p, 5000 + seed);
      cfg.sample_budget = 8;
      ys.push_back(estimate_roworder(stream, cfg).value / truth);
    }
    const auto m = moments(ys);
    EXPECT_LT(std::abs(m.mean - 1.0), std::max(p == 6 ? 0.15 : 0.0, 4 * m.standard_error))
        << "p=" << p << " mean " << m.mean << " se " << m.standard_error;
  }
}

TEST(WeightedReservoirTest, MatchesSuccessiveSampling) {
  // Inclusion probabilities of weighted sampling without replacement, by
  // enumerating all ordered draws.
  const std::vector<double> w = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const std::size_t k = 3;
  std::vector<double> exact(w.size(), 0.0);
  std::function<void(std::vector<bool>&, double, double, std::size_t)> draw =
      [&](std::vector<bool>& used, double prob, double remaining, std::size_t depth) {
        if (depth == k) return;
        for (std::size_t i = 0; i < w.size(); ++i) {
          if (used[i]) continue;
          const double pi = prob * w[i] / remaining;
          exact[i] += pi;
          used[i] = true;
          draw(used, pi, remaining - w[i], depth + 1);
          used[i] = false;
        }
      };
  std::vector<bool> used(w.size(), false);
  draw(used, 1.0, 55.0, 0);

  const int seeds = 10000;
  std::vector<int> hits(w.size(), 0);
  for (int seed = 0; seed < seeds; ++seed) {
    WeightedReservoir<int> r(k, rng::mix64(seed));
    for (std::size_t i = 0; i < w.size(); ++i) r.offer(i, w[i], 0);
    ASSERT_EQ(r.size(), k);
    for (const auto& e : r.entries()) ++hits[e.index];
  }
  for (std::size_t i = 0; i < w.size(); ++i)
    EXPECT_NEAR(static_cast<double>(hits[i]) / seeds, exact[i], 0.03) << "item " << i;
}

TEST(WeightedReservoirTest, ZeroWeightNeverSampled) {
  WeightedReservoir<int> r(5, 1);
  r.offer(0, 0.0, 0);
  r.offer(1, 1.0, 0);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r.entries()[0].index, 1u);
  EXPECT_EQ(r.offered(), 2u);
}

TEST(TopWeightedTest, KeepsHeaviestWithLowIndexTies) {
  TopWeighted<int> top(3);
  const double w[] = {5, 1, 7, 5, 9, 5};
  for (std::size_t i = 0; i < 6; ++i) top.offer(i, w[i], static_cast<int>(i));
  const auto e = top.entries();
  ASSERT_EQ(e.size(), 3u);
  EXPECT_EQ(e[0].index, 4u);
  EXPECT_EQ(e[1].index, 2u);
  EXPECT_EQ(e[2].index, 0u);
}

TEST(CountSketchTest, RecoveryErrorBound) {
  std::mt19937_64 gen(8);
  const std::size_t keys = 2000, width = 200, depth = 7;
  std::vector<double> x(keys);
  double f2 = 0.0;
  for (double& v : x) {
    v = 4.0 * fixtures::uniform01(gen) - 2.0;
    f2 += v * v;
  }
  f2 += 2500.0 - x[5] * x[5];
  x[5] = 50.0;
  CountSketch cs(depth, width, 123);
  for (std::size_t i = 0; i < keys; ++i) cs.update(i, x[i]);
  const double bound = 3.0 * std::sqrt(f2 / width);
  std::size_t bad = 0;
  for (std::size_t i = 0; i < keys; ++i) bad += std::abs(cs.query(i) - x[i]) > bound;
  // Per row a key misses with probability <= 1/9, the median of 7 only
  // when 4 rows miss: < 1%.
  EXPECT_LE(bad, keys / 100);
  EXPECT_NEAR(cs.query(5), 50.0, bound);
}

TEST(CountSketchTest, EmptyAndCancelled) {
  CountSketch cs(5, 16, 3);
  EXPECT_EQ(cs.query(42), 0.0);
  EXPECT_EQ(cs.row_f2(0), 0.0);
  cs.update(42, 1.5);
  cs.update(42, -1.5);
  EXPECT_EQ(cs.query(42), 0.0);
}

TEST(CountSketchTest, Linear) {
  CountSketch ab(5, 32, 9);
  for (std::uint64_t k = 0; k < 100; ++k) {
    ab.update(k, 0.5 * k);
    ab.update(k, 1.0 - k);
  }
  CountSketch sum(5, 32, 9);
  for (std::uint64_t k = 0; k < 100; ++k) sum.update(k, 0.5 * k + 1.0 - k);
  for (std::uint64_t k = 0; k < 100; ++k) EXPECT_NEAR(ab.query(k), sum.query(k), 1e-9);
}

TEST(FrobeniusSketchTest, WithinAccuracy) {
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto f = FrobeniusSketch::for_accuracy(0.1, seed);
    std::mt19937_64 gen(seed);
    double truth = 0.0;
    for (std::uint64_t k = 0; k < 3000; ++k) {
      const double v = fixtures::uniform01(gen) - 0.5;
      truth += v * v;
      f.update(k, v);
    }
    ok += std::abs(f.estimate() / truth - 1.0) <= 0.1;
  }
  EXPECT_GE(ok, 95);
}

TEST(Reduction, IdentityKindIsExact) {
  const auto stream = to_stream(DenseMatrix::identity(100), StreamMode::RowOrder);
  OnepassConfig cfg;
  cfg.p = 8;
  cfg.kind = rng::GeneratorKind::DebugIdentity;
  cfg.repetitions = 1;
  const auto e = estimate_4z(stream, cfg);
  EXPECT_NEAR(e.value, 100.0, 1e-12);
  EXPECT_EQ(e.p, 8);
  EXPECT_EQ(e.algorithm, "roworder4z");
}

TEST(Reduction, SparseMatrixWithIdentityKind) {
  const auto stream = fixtures::random_sparse(40, 3, 4);
  OnepassConfig cfg;
  cfg.p = 4;
  cfg.kind = rng::GeneratorKind::DebugIdentity;
  cfg.repetitions = 1;
  const double truth = schatten_norm_exact(materialize(stream), 4);
  EXPECT_NEAR(estimate_4z(stream, cfg).value / truth, 1.0, 1e-12);
}

TEST(Reduction, Errors) {
  const auto stream = to_stream(DenseMatrix::identity(10), StreamMode::RowOrder);
  OnepassConfig cfg;
  cfg.p = 6;
  EXPECT_EQ(error_kind_of([&] { estimate_4z(stream, cfg); }), ErrorKind::UnsupportedP);
  cfg.p = 8;
  const auto turnstile = to_stream(DenseMatrix::identity(10), StreamMode::Turnstile);
  EXPECT_EQ(error_kind_of([&] { estimate_4z(turnstile, cfg); }), ErrorKind::ModeMismatch);
}

TEST(RowOrderSpace, SublinearGrowth) {
  std::vector<double> cells;
  for (std::size_t n : {200u, 800u}) {
    RowOrderSketch s(config(n, 6, 1));
    s.ingest(fixtures::random_sparse(n, 2, n));
    const double live = static_cast<double>(s.live_cells());
    const double log_n = std::log2(static_cast<double>(n));
    EXPECT_LE(live, 100.0 * s.sample_budget() * log_n * log_n) << n;
    cells.push_back(live);
  }
  EXPECT_LT(cells[1] / cells[0], 4.0);
}

}  // namespace
