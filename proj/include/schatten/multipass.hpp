// Copyright 2026 The schatten-stream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "schatten/core/matrix.hpp"
#include "schatten/core/stream.hpp"
#include "schatten/error.hpp"
#include "schatten/estimate.hpp"
#include "schatten/onepass.hpp"
#include "schatten/rng/sketch_generator.hpp"

namespace schatten {

struct MultipassConfig {
  std::size_t n = 0;
  int p = 2;
  double epsilon = 0.2;
  rng::GeneratorKind kind = rng::GeneratorKind::ZdSparse;
  std::uint64_t seed = 0;
  std::optional<std::size_t> t;
  std::optional<std::size_t> repetitions;
  std::optional<std::size_t> t_prime;  // rows of G_1; 1 unless overridden
  double c_t = 2.0;
  double c_r = 6.0;
  bool psd_asserted = false;
};

/// ceil(p/2)-pass estimator. G_1 has t' rows (default 1), G_2..G_p have t.
/// Writing M_l = G_l A G_{l+1}^T (G_{p+1} := G_1), each repetition keeps a
/// left block X_L (t' x t) and a right block X_R (t x t'):
///
///   pass 1:               X_L = M_1,              X_R = M_p
///   pass i, 2..floor(p/2): X_L <- X_L M_i,        X_R <- M_{p-i+1} X_R
///   pass ceil(p/2), odd p: X_L <- X_L M_{floor(p/2)+1}
///
/// and Y = Tr(X_L X_R) = Tr(M_1 ... M_p). Each pass is a linear sketch of A
/// given the previous blocks, so one update (a, b, delta) costs O(t t').
class MultipassSketch {
 public:
  explicit MultipassSketch(const MultipassConfig& cfg)
      : p_(cfg.p), n_(cfg.n), kind_(cfg.kind), seed_(cfg.seed),
        psd_asserted_(cfg.psd_asserted) {
    require(cfg.p >= 2, ErrorKind::InvalidParameter, "p must be an integer >= 2");
    require(cfg.epsilon > 0.0 && cfg.epsilon < 0.5, ErrorKind::InvalidParameter,
            "epsilon must lie in (0, 1/2)");
    require(cfg.n >= 1, ErrorKind::InvalidParameter, "n must be >= 1");
    const bool identity = cfg.kind == rng::GeneratorKind::DebugIdentity;
    if (cfg.t) {
      t_ = *cfg.t;
    } else if (identity) {
      t_ = cfg.n;
    } else {
      t_ = std::max<std::size_t>(
          1, ceil_count(cfg.c_t * std::pow(static_cast<double>(cfg.n),
                                           1.0 - 1.0 / (cfg.p - 1))));
    }
    t_prime_ = cfg.t_prime ? *cfg.t_prime : (identity ? cfg.n : 1);
    require(t_ >= 1 && t_prime_ >= 1 && t_prime_ <= t_, ErrorKind::InvalidParameter,
            "need 1 <= t' <= t");
    r_ = cfg.repetitions ? *cfg.repetitions : default_repetitions(cfg.epsilon, cfg.c_r);
    require(r_ >= 1, ErrorKind::InvalidParameter, "repetitions must be >= 1");

    gens_.reserve(r_ * p_);
    for (std::size_t rho = 0; rho < r_; ++rho)
      for (int l = 0; l < p_; ++l)
        gens_.emplace_back(kind_, l == 0 ? t_prime_ : t_, n_, seed_, l, rho);
    left_.assign(r_, DenseMatrix(t_prime_, t_));
    right_.assign(r_, DenseMatrix(t_, t_prime_));
    col_a_.resize(t_);
    col_b_.resize(t_);
    tmp_.resize(t_prime_);
  }

  int p() const noexcept { return p_; }
  std::size_t n() const noexcept { return n_; }
  std::size_t t() const noexcept { return t_; }
  std::size_t t_prime() const noexcept { return t_prime_; }
  std::size_t repetitions() const noexcept { return r_; }
  int total_passes() const noexcept { return (p_ + 1) / 2; }
  int passes_completed() const noexcept { return pass_index_ - 1; }
  /// 1-based index of the next pass to run.
  int pass_index() const noexcept { return pass_index_; }
  bool finalized() const noexcept { return passes_completed() == total_passes(); }
  std::size_t cells_touched() const noexcept { return touched_; }
  std::size_t updates_applied() const noexcept { return updates_; }
  void assert_psd(bool value = true) noexcept { psd_asserted_ = value; }

  /// Vector cells held between passes, per repetition: X_L and X_R.
  std::size_t live_cells_per_repetition() const noexcept { return 2 * t_ * t_prime_; }
  /// Peak cells per repetition inside a pass (both blocks double-buffered).
  std::size_t peak_cells_per_repetition() const noexcept { return peak_per_rep_; }
  std::size_t sketch_cells() const noexcept { return r_ * live_cells_per_repetition(); }

  const rng::SketchGenerator& generator(std::size_t rho, int l) const {
    return gens_[rho * p_ + static_cast<std::size_t>(l)];
  }
  const DenseMatrix& left(std::size_t rho) const { return left_[rho]; }
  const DenseMatrix& right(std::size_t rho) const { return right_[rho]; }

  /// Consumes one full pass over a replayable stream.
  void run_pass(const MatrixStream& stream) {
    require(stream.replayable, ErrorKind::InvalidParameter,
            "multi-pass estimation needs a replayable stream");
    require(stream.n == n_ && stream.m == n_, ErrorKind::ShapeMismatch,
            "stream dimension does not match the sketch");
    begin_pass(content_hash(stream));
    for (const auto& u : stream.updates) {
      if (u.row >= n_ || u.col >= n_)
        fail(ErrorKind::IndexOutOfRange, "update outside n=" + std::to_string(n_));
      accumulate(u.row, u.col, u.value);
    }
    end_pass();
  }

  /// One pass over a materialized n x n matrix, as dense products. Equal, by
  /// linearity, to streaming its nonzeros.
  void run_pass(const DenseMatrix& a) {
    require(a.rows() == n_ && a.cols() == n_, ErrorKind::ShapeMismatch,
            "run_pass: expected an n x n matrix");
    std::uint64_t h = rng::mix64(n_);
    for (double v : a.data()) h = rng::mix64(h ^ std::bit_cast<std::uint64_t>(v));
    begin_pass(h);
    const Step step = current_step();
    for (std::size_t rho = 0; rho < r_; ++rho) {
      if (step.left_factor >= 0) {
        const DenseMatrix gl = generator(rho, step.left_factor).dense_matrix();
        const DenseMatrix gn = generator(rho, (step.left_factor + 1) % p_).dense_matrix();
        DenseMatrix lhs = step.first ? gl : multiply(left_[rho], gl);
        new_left_[rho] = multiply_transposed(multiply(lhs, a), gn);
      }
      if (step.right_factor >= 0) {
        const DenseMatrix gl = generator(rho, step.right_factor).dense_matrix();
        const DenseMatrix gn = generator(rho, (step.right_factor + 1) % p_).dense_matrix();
        DenseMatrix ga = multiply(gl, a);
        new_right_[rho] = step.first ? multiply_transposed(ga, gn)
                                     : multiply(multiply_transposed(ga, gn), right_[rho]);
      }
    }
    for (double v : a.data()) updates_ += v != 0.0;
    touched_ += r_ * (new_left_.empty() ? 0 : t_ * t_prime_) +
                r_ * (new_right_.empty() ? 0 : t_ * t_prime_);
    end_pass();
  }

  /// Per repetition Y_rho = Tr(X_L X_R).
  double estimator_value(std::size_t rho) const {
    require(finalized(), ErrorKind::NotFinalized,
            "only " + std::to_string(passes_completed()) + " of " +
                std::to_string(total_passes()) + " passes completed");
    require(rho < r_, ErrorKind::InvalidParameter, "repetition index out of range");
    return trace_of_product(left_[rho], right_[rho]);
  }

  std::vector<double> estimator_values() const {
    std::vector<double> out(r_);
    for (std::size_t rho = 0; rho < r_; ++rho) out[rho] = estimator_value(rho);
    return out;
  }

  SchattenEstimate estimate(Aggregate mode = Aggregate::Mean) const {
    require(finalized(), ErrorKind::NotFinalized,
            "only " + std::to_string(passes_completed()) + " of " +
                std::to_string(total_passes()) + " passes completed");
    if (p_ % 2 == 1 && !psd_asserted_)
      fail(ErrorKind::RequiresPSD,
           "odd p = " + std::to_string(p_) + " requires a PSD assertion");
    const auto values = estimator_values();
    SchattenEstimate e;
    e.value = aggregate(values, mode);
    e.p = p_;
    e.algorithm = "multipass";
    e.repetitions = r_;
    e.seed = seed_;
    e.t = t_;
    e.sketch_cells = sketch_cells();
    e.updates = updates_;
    e.cells_touched = touched_;
    e.aggregate = mode;
    e.passes = total_passes();
    return e;
  }

 private:
  // Which 0-based factors this pass multiplies in; -1 means the side rests.
  struct Step {
    bool first;
    int left_factor;
    int right_factor;
  };

  Step current_step() const {
    const int i = pass_index_;
    const int half = p_ / 2;
    if (i == 1) return {true, 0, p_ - 1};
    if (i <= half) return {false, i - 1, p_ - i};
    return {false, half, -1};  // odd p: middle factor floor(p/2) + 1 (1-based)
  }

  void begin_pass(std::uint64_t hash) {
    if (pass_index_ > total_passes())
      fail(ErrorKind::PassOverflow, "all " + std::to_string(total_passes()) +
                                        " passes already completed");
    if (pass_index_ == 1)
      stream_hash_ = hash;
    else if (hash != stream_hash_)
      fail(ErrorKind::StreamDrift, "stream content changed between passes");
    const Step step = current_step();
    new_left_.assign(step.left_factor >= 0 ? r_ : 0, DenseMatrix(t_prime_, t_));
    new_right_.assign(step.right_factor >= 0 ? r_ : 0, DenseMatrix(t_, t_prime_));
    const std::size_t block = t_ * t_prime_;
    peak_per_rep_ = std::max(peak_per_rep_, 2 * block + (new_left_.empty() ? 0 : block) +
                                                (new_right_.empty() ? 0 : block));
  }

  void end_pass() {
    if (!new_left_.empty()) left_.swap(new_left_);
    if (!new_right_.empty()) right_.swap(new_right_);
    new_left_.clear();
    new_right_.clear();
    ++pass_index_;
  }

  void accumulate(std::size_t a, std::size_t b, double delta) {
    ++updates_;
    if (delta == 0.0) return;
    const Step step = current_step();
    for (std::size_t rho = 0; rho < r_; ++rho) {
      if (step.left_factor >= 0)
        accumulate_left(rho, step, a, b, delta);
      if (step.right_factor >= 0)
        accumulate_right(rho, step, a, b, delta);
    }
  }

  // new_L += delta * (X_L g_a) g_b^T, with X_L g_a := g_a on the first pass.
  void accumulate_left(std::size_t rho, const Step& step, std::size_t a, std::size_t b,
                       double delta) {
    const auto& gl = generator(rho, step.left_factor);
    const auto& gn = generator(rho, (step.left_factor + 1) % p_);
    DenseMatrix& out = new_left_[rho];
    // tmp_ = X_L g_a (length t'); on the first pass it is g_a^{(1)} itself.
    if (step.first) {
      std::vector<double> g1(t_prime_);
      gl.fill_column(a, g1);
      tmp_ = std::move(g1);
    } else {
      project_left(left_[rho], gl, a);
    }
    if (gn.sparse()) {
      const auto e = gn.sparse_entry(b);
      for (std::size_t k = 0; k < t_prime_; ++k) out(k, e.row) += delta * tmp_[k] * e.value;
      touched_ += t_prime_;
    } else {
      gn.fill_column(b, col_b_);
      for (std::size_t k = 0; k < t_prime_; ++k) {
        const double s = delta * tmp_[k];
        auto row = out.row(k);
        for (std::size_t c = 0; c < t_; ++c) row[c] += s * col_b_[c];
      }
      touched_ += t_prime_ * t_;
    }
  }

  // new_R += delta * g_a (g_b^T X_R), with g_b^T X_R := g_b^{(1)T} on pass 1.
  void accumulate_right(std::size_t rho, const Step& step, std::size_t a, std::size_t b,
                        double delta) {
    const auto& gl = generator(rho, step.right_factor);
    const auto& gn = generator(rho, (step.right_factor + 1) % p_);
    DenseMatrix& out = new_right_[rho];
    if (step.first) {
      std::vector<double> g1(t_prime_);
      gn.fill_column(b, g1);
      tmp_ = std::move(g1);
    } else {
      project_right(right_[rho], gn, b);
    }
    if (gl.sparse()) {
      const auto e = gl.sparse_entry(a);
      auto row = out.row(e.row);
      for (std::size_t k = 0; k < t_prime_; ++k) row[k] += delta * e.value * tmp_[k];
      touched_ += t_prime_;
    } else {
      gl.fill_column(a, col_a_);
      for (std::size_t c = 0; c < t_; ++c) {
        const double s = delta * col_a_[c];
        auto row = out.row(c);
        for (std::size_t k = 0; k < t_prime_; ++k) row[k] += s * tmp_[k];
      }
      touched_ += t_prime_ * t_;
    }
  }

  // tmp_ = X_L g (X_L is t' x t, g a column of a t-row generator).
  void project_left(const DenseMatrix& xl, const rng::SketchGenerator& g, std::size_t j) {
    tmp_.assign(t_prime_, 0.0);
    if (g.sparse()) {
      const auto e = g.sparse_entry(j);
      for (std::size_t k = 0; k < t_prime_; ++k) tmp_[k] = xl(k, e.row) * e.value;
      return;
    }
    g.fill_column(j, col_a_);
    for (std::size_t k = 0; k < t_prime_; ++k) {
      auto row = xl.row(k);
      double acc = 0.0;
      for (std::size_t c = 0; c < t_; ++c) acc += row[c] * col_a_[c];
      tmp_[k] = acc;
    }
  }

  // tmp_ = g^T X_R (X_R is t x t').
  void project_right(const DenseMatrix& xr, const rng::SketchGenerator& g, std::size_t j) {
    tmp_.assign(t_prime_, 0.0);
    if (g.sparse()) {
      const auto e = g.sparse_entry(j);
      auto row = xr.row(e.row);
      for (std::size_t k = 0; k < t_prime_; ++k) tmp_[k] = e.value * row[k];
      return;
    }
    g.fill_column(j, col_b_);
    for (std::size_t c = 0; c < t_; ++c) {
      auto row = xr.row(c);
      for (std::size_t k = 0; k < t_prime_; ++k) tmp_[k] += col_b_[c] * row[k];
    }
  }

  int p_;
  std::size_t n_;
  std::size_t t_ = 1;
  std::size_t t_prime_ = 1;
  std::size_t r_ = 1;
  rng::GeneratorKind kind_;
  std::uint64_t seed_;
  bool psd_asserted_;
  int pass_index_ = 1;
  std::uint64_t stream_hash_ = 0;
  std::size_t updates_ = 0;
  std::size_t touched_ = 0;
  std::size_t peak_per_rep_ = 0;
  std::vector<rng::SketchGenerator> gens_;
  std::vector<DenseMatrix> left_, right_;
  std::vector<DenseMatrix> new_left_, new_right_;
  std::vector<double> col_a_, col_b_, tmp_;
};

/// Runs all ceil(p/2) passes over a replayable square stream.
inline SchattenEstimate estimate_multipass(const MatrixStream& stream, MultipassConfig cfg,
                                           Aggregate mode = Aggregate::Mean) {
  require(stream.n == stream.m, ErrorKind::ShapeMismatch,
          "multipass estimator needs a square matrix");
  cfg.n = stream.n;
  MultipassSketch sketch(cfg);
  while (!sketch.finalized()) sketch.run_pass(stream);
  return sketch.estimate(mode);
}

}  // namespace schatten
