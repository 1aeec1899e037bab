// Copyright 2026 The schatten-stream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "schatten/core/matrix.hpp"
#include "schatten/core/stream.hpp"
#include "schatten/error.hpp"
#include "schatten/estimate.hpp"
#include "schatten/rng/sketch_generator.hpp"

namespace schatten {

/// ceil(x) that ignores floating noise just above an integer
/// (pow(64, 2.0 / 3) is 15.999... or 16.000...1 depending on rounding).
inline std::size_t ceil_count(double x) {
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) return static_cast<std::size_t>(r);
  return static_cast<std::size_t>(std::ceil(x));
}

/// Repetition count ceil(c_r / eps^2).
inline std::size_t default_repetitions(double epsilon, double c_r) {
  return std::max<std::size_t>(1, ceil_count(c_r / (epsilon * epsilon)));
}

struct OnepassConfig {
  std::size_t n = 0;
  int p = 2;
  double epsilon = 0.15;
  rng::GeneratorKind kind = rng::GeneratorKind::ZdSparse;
  std::uint64_t seed = 0;
  std::optional<std::size_t> t;            // sketch rows override
  std::optional<std::size_t> repetitions;  // r override
  double c_t = 2.0;
  double c_r = 6.0;
  bool psd_asserted = false;
};

/// One-pass bilinear sketch. For each repetition rho it keeps p sketches
/// S_l = G_l A G_{l+1}^T (G_{p+1} := G_1) of size t x t; the estimator is
/// X_rho = Tr(S_1 S_2 ... S_p), whose expectation is Tr(A^p).
///
/// All state is linear in A. A zd or identity update touches one cell per
/// (rho, l), a gaussian update is a dense t x t rank-one update.
class BilinearSketch {
 public:
  explicit BilinearSketch(const OnepassConfig& cfg)
      : p_(cfg.p), n_(cfg.n), kind_(cfg.kind), seed_(cfg.seed),
        psd_asserted_(cfg.psd_asserted) {
    require(cfg.p >= 2, ErrorKind::InvalidParameter, "p must be an integer >= 2");
    require(cfg.epsilon > 0.0 && cfg.epsilon < 0.5, ErrorKind::InvalidParameter,
            "epsilon must lie in (0, 1/2)");
    require(cfg.n >= 1, ErrorKind::InvalidParameter, "n must be >= 1");
    if (cfg.t) {
      t_ = *cfg.t;
    } else if (cfg.kind == rng::GeneratorKind::DebugIdentity) {
      t_ = cfg.n;
    } else {
      t_ = std::max<std::size_t>(
          1, ceil_count(cfg.c_t * std::pow(static_cast<double>(cfg.n),
                                           1.0 - 2.0 / cfg.p)));
    }
    require(t_ >= 1, ErrorKind::InvalidParameter, "t must be >= 1");
    r_ = cfg.repetitions ? *cfg.repetitions : default_repetitions(cfg.epsilon, cfg.c_r);
    require(r_ >= 1, ErrorKind::InvalidParameter, "repetitions must be >= 1");

    gens_.reserve(r_ * p_);
    for (std::size_t rho = 0; rho < r_; ++rho)
      for (int l = 0; l < p_; ++l) gens_.emplace_back(kind_, t_, n_, seed_, l, rho);
    sketches_.assign(r_ * p_, DenseMatrix(t_, t_));
    if (kind_ == rng::GeneratorKind::Gaussian) {
      left_.resize(p_ * t_);
      right_.resize(p_ * t_);
    }
  }

  int p() const noexcept { return p_; }
  std::size_t n() const noexcept { return n_; }
  std::size_t t() const noexcept { return t_; }
  std::size_t repetitions() const noexcept { return r_; }
  rng::GeneratorKind kind() const noexcept { return kind_; }
  std::uint64_t seed() const noexcept { return seed_; }
  bool psd_asserted() const noexcept { return psd_asserted_; }
  void assert_psd(bool value = true) noexcept { psd_asserted_ = value; }
  std::size_t updates_applied() const noexcept { return updates_; }
  std::size_t cells_touched() const noexcept { return touched_; }
  std::size_t sketch_cells() const noexcept { return r_ * p_ * t_ * t_; }

  /// Generator of G_l (0-based l) in repetition rho.
  const rng::SketchGenerator& generator(std::size_t rho, int l) const {
    return gens_[rho * p_ + static_cast<std::size_t>(l)];
  }

  /// S_l for repetition rho (0-based l).
  const DenseMatrix& sketch(std::size_t rho, int l) const {
    return sketches_[rho * p_ + static_cast<std::size_t>(l)];
  }

  void apply_update(std::size_t i, std::size_t j, double delta) {
    if (i >= n_ || j >= n_)
      fail(ErrorKind::IndexOutOfRange, "update (" + std::to_string(i) + "," +
                                           std::to_string(j) + ") outside n=" +
                                           std::to_string(n_));
    ++updates_;
    if (delta == 0.0) return;
    if (kind_ != rng::GeneratorKind::Gaussian) {
      for (std::size_t rho = 0; rho < r_; ++rho) {
        for (int l = 0; l < p_; ++l) {
          const auto& gl = generator(rho, l);
          const auto& gn = generator(rho, (l + 1) % p_);
          const auto a = gl.sparse_entry(i);
          const auto b = gn.sparse_entry(j);
          sketches_[rho * p_ + l](a.row, b.row) += delta * a.value * b.value;
        }
      }
      touched_ += r_ * p_;
      return;
    }
    for (std::size_t rho = 0; rho < r_; ++rho) {
      for (int l = 0; l < p_; ++l) {
        const auto& g = generator(rho, l);
        g.fill_gaussian_column(i, std::span<double>(left_).subspan(l * t_, t_));
        if (j == i)
          std::copy_n(left_.begin() + l * t_, t_, right_.begin() + l * t_);
        else
          g.fill_gaussian_column(j, std::span<double>(right_).subspan(l * t_, t_));
      }
      for (int l = 0; l < p_; ++l) {
        const double* u = left_.data() + l * t_;
        const double* v = right_.data() + ((l + 1) % p_) * t_;
        DenseMatrix& s = sketches_[rho * p_ + l];
        for (std::size_t a = 0; a < t_; ++a) {
          const double ua = delta * u[a];
          auto row = s.row(a);
          for (std::size_t b = 0; b < t_; ++b) row[b] += ua * v[b];
        }
      }
    }
    touched_ += r_ * p_ * t_ * t_;
  }

  void apply(const MatrixUpdate& u) { apply_update(u.row, u.col, u.value); }

  /// Adds G_l A G_{l+1}^T for a whole n x n block at once. Equal, by
  /// linearity, to applying every nonzero of `a` as an update.
  void apply_matrix(const DenseMatrix& a) {
    require(a.rows() == n_ && a.cols() == n_, ErrorKind::ShapeMismatch,
            "apply_matrix: expected an n x n block");
    if (kind_ != rng::GeneratorKind::Gaussian) {
      for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j)
          if (a(i, j) != 0.0) apply_update(i, j, a(i, j));
      return;
    }
    std::vector<DenseMatrix> g(p_);
    for (std::size_t rho = 0; rho < r_; ++rho) {
      for (int l = 0; l < p_; ++l) g[l] = generator(rho, l).dense_matrix();
      for (int l = 0; l < p_; ++l) {
        const DenseMatrix ga = multiply(g[l], a);
        DenseMatrix& s = sketches_[rho * p_ + l];
        s = add(s, multiply_transposed(ga, g[(l + 1) % p_]));
      }
    }
    std::size_t nnz = 0;
    for (double v : a.data()) nnz += v != 0.0;
    updates_ += nnz;
    touched_ += r_ * p_ * t_ * t_;
  }

  /// X_rho = Tr(S_1 ... S_p) by left-to-right chain multiplication.
  double estimator_value(std::size_t rho) const {
    require(rho < r_, ErrorKind::InvalidParameter, "repetition index out of range");
    DenseMatrix chain = sketch(rho, 0);
    for (int l = 1; l + 1 < p_; ++l) chain = multiply(chain, sketch(rho, l));
    return trace_of_product(chain, sketch(rho, p_ - 1));
  }

  std::vector<double> estimator_values() const {
    std::vector<double> out(r_);
    for (std::size_t rho = 0; rho < r_; ++rho) out[rho] = estimator_value(rho);
    return out;
  }

  /// Aggregated estimate of ||A||_{S_p}^p. Odd p needs the PSD assertion.
  SchattenEstimate estimate(Aggregate mode = Aggregate::Mean) const {
    if (p_ % 2 == 1 && !psd_asserted_)
      fail(ErrorKind::RequiresPSD,
           "odd p = " + std::to_string(p_) +
               " estimates ||A||_{S_p}^p only for PSD input; assert PSD to proceed");
    const auto values = estimator_values();
    SchattenEstimate e;
    e.value = aggregate(values, mode);
    e.p = p_;
    e.algorithm = "onepass";
    e.repetitions = r_;
    e.seed = seed_;
    e.t = t_;
    e.sketch_cells = sketch_cells();
    e.updates = updates_;
    e.cells_touched = touched_;
    e.aggregate = mode;
    return e;
  }

 private:
  int p_;
  std::size_t n_;
  std::size_t t_ = 1;
  std::size_t r_ = 1;
  rng::GeneratorKind kind_;
  std::uint64_t seed_;
  bool psd_asserted_;
  std::size_t updates_ = 0;
  std::size_t touched_ = 0;
  std::vector<rng::SketchGenerator> gens_;
  std::vector<DenseMatrix> sketches_;
  std::vector<double> left_;
  std::vector<double> right_;
};

/// Feeds every update of a square stream. Entry-wise and row-order values
/// are final values that occur once, so adding them is the same as assigning.
inline void ingest(BilinearSketch& sketch, const MatrixStream& stream) {
  require(stream.n == sketch.n() && stream.m == sketch.n(), ErrorKind::ShapeMismatch,
          "sketch dimension does not match the stream");
  for (const auto& u : stream.updates) sketch.apply(u);
}

inline SchattenEstimate estimate_onepass(const MatrixStream& stream, OnepassConfig cfg,
                                         Aggregate mode = Aggregate::Mean) {
  require(stream.n == stream.m, ErrorKind::ShapeMismatch,
          "onepass PSD path needs a square matrix; use estimate_general");
  cfg.n = stream.n;
  BilinearSketch sketch(cfg);
  ingest(sketch, stream);
  return sketch.estimate(mode);
}

/// Even-p estimator for an arbitrary n x m matrix: sketches the symmetric
/// embedding B = [[0, A], [A^T, 0]] with each update mirrored on the fly,
/// and halves the result since ||B||_{S_p}^p = 2 ||A||_{S_p}^p.
inline SchattenEstimate estimate_general(const MatrixStream& stream, OnepassConfig cfg,
                                         Aggregate mode = Aggregate::Mean) {
  if (cfg.p % 2 != 0)
    fail(ErrorKind::RequiresPSD, "general matrices need even p (got p = " +
                                     std::to_string(cfg.p) + ")");
  cfg.n = stream.n + stream.m;
  BilinearSketch sketch(cfg);
  for (const auto& u : stream.updates) {
    if (u.row >= stream.n || u.col >= stream.m)
      fail(ErrorKind::IndexOutOfRange, "update outside the declared dimensions");
    sketch.apply_update(u.row, stream.n + u.col, u.value);
    sketch.apply_update(stream.n + u.col, u.row, u.value);
  }
  SchattenEstimate e = sketch.estimate(mode);
  e.value /= 2.0;
  e.algorithm = "onepass_general";
  return e;
}

}  // namespace schatten
