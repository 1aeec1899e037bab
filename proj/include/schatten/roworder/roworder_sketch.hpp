// Copyright 2026 The schatten-stream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "schatten/core/matrix.hpp"
#include "schatten/core/stream.hpp"
#include "schatten/error.hpp"
#include "schatten/estimate.hpp"
#include "schatten/onepass.hpp"
#include "schatten/roworder/count_sketch.hpp"
#include "schatten/roworder/weighted_reservoir.hpp"
#include "schatten/rng/mix.hpp"

namespace schatten {

/// Sparse vector with strictly increasing column indices.
using SparseRow = std::vector<SparseEntry>;

inline double dot(const SparseRow& a, const SparseRow& b) {
  double acc = 0.0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (ia->col < ib->col) {
      ++ia;
    } else if (ib->col < ia->col) {
      ++ib;
    } else {
      acc += ia->value * ib->value;
      ++ia;
      ++ib;
    }
  }
  return acc;
}

inline double squared_norm(const SparseRow& a) {
  double acc = 0.0;
  for (const auto& e : a) acc += e.value * e.value;
  return acc;
}

struct RowOrderConfig {
  std::size_t n = 0;
  int p = 6;
  double epsilon = 0.3;
  std::uint64_t seed = 0;
  std::optional<std::size_t> sample_budget;  // T
  std::optional<std::size_t> cs_width;
  std::optional<std::size_t> cs_depth;
  std::size_t row_sparsity = 4;  // s_A: max nonzeros per row (and column)
  double c_T = 1.0;
  double c_w = 8.0;
  double c_d = 5.0;
  std::size_t frobenius_repetitions = 7;
  std::size_t row_norm_hashings = 3;
  double row_norm_bucket_factor = 20.0;  // buckets = factor * T
  std::size_t row_norm_width = 16;
};

/// Rows of B chosen for one precision-sampling group, with their recovered
/// approximations and importance weights tau.
struct PrecisionSample {
  std::vector<std::size_t> indices;
  std::vector<SparseRow> rows;
  std::vector<double> tau;
  std::vector<bool> heavy;  // in K
};

/// Rows of A chosen for the last index: V plus the reservoir sample.
struct RowSample {
  std::vector<std::size_t> indices;
  std::vector<SparseRow> rows;
  std::vector<double> tau;
  std::vector<bool> heavy;  // in V
};

/// One-pass row-order estimator of ||A||_{S_p}^p for p = 4k + 2 and sparse A.
///
/// With B = A^T A, Tr(B^{2k+1}) expands over index tuples (i_1, ..., i_{k+1})
/// as a chain of inner products of rows of B closed by a row of A:
///   <B_{i_1}, B_{i_2}> ... <B_{i_{k-1}}, B_{i_k}> <B_{i_k}, A_{i_{k+1}}>
///   <A_{i_{k+1}}, B_{i_1}>.
/// The sketch samples rows of B proportionally to ||B_i||^2 (precision
/// sampling, one independent group per chain position), samples rows of A
/// proportionally to ||A_i||^2, keeps heavy rows deterministically (K for B,
/// V for A), and reweights every light sample by tau / T.
///
/// Structures fed by the gram updates of each incoming row:
///  - FrobeniusSketch for L' ~ ||B||_F^2
///  - RowNormSketch for ||B_i||^2 (heavy rows K and sampling scores)
///  - per group s, a CountSketch of B with row i scaled by 1 / sqrt(u_i^(s))
/// and, from the rows themselves, the exact Z = ||A||_F^2, a weighted
/// reservoir of rows and the 10T largest-norm rows V.
class RowOrderSketch {
 public:
  explicit RowOrderSketch(const RowOrderConfig& cfg)
      : cfg_(cfg),
        frob_(FrobeniusSketch::for_accuracy(cfg.epsilon / 3.0,
                                            rng::derive_seed(cfg.seed, 1, 0),
                                            cfg.frobenius_repetitions)),
        row_norms_(cfg.row_norm_hashings, 1, 1, 0),
        reservoir_(1, 0),
        top_(0) {
    if (cfg.p < 6 || cfg.p % 4 != 2)
      fail(ErrorKind::UnsupportedP,
           "row-order algorithm needs p = 4k + 2 with k >= 1 (got p = " +
               std::to_string(cfg.p) + "); use the reduction path for p in 4Z");
    require(cfg.n >= 1, ErrorKind::InvalidParameter, "n must be >= 1");
    require(cfg.epsilon > 0.0 && cfg.epsilon < 1.0, ErrorKind::InvalidParameter,
            "epsilon must lie in (0, 1)");
    require(cfg.row_sparsity >= 1, ErrorKind::InvalidParameter, "row sparsity must be >= 1");
    k_ = (cfg.p - 2) / 4;
    const double n = static_cast<double>(cfg.n);
    T_ = cfg.sample_budget
             ? *cfg.sample_budget
             : std::max<std::size_t>(1, ceil_count(cfg.c_T * std::pow(n, 1.0 - 1.0 / (k_ + 1)) /
                                                  (cfg.epsilon * cfg.epsilon)));
    require(T_ >= 1, ErrorKind::InvalidParameter, "T must be >= 1");
    const double log_n = std::max(1.0, std::log2(n));
    cs_width_ = cfg.cs_width ? *cfg.cs_width
                             : ceil_count(cfg.c_w * static_cast<double>(T_) * log_n);
    cs_depth_ = cfg.cs_depth ? *cfg.cs_depth : ceil_count(cfg.c_d * log_n);
    heavy_cap_ = 10 * T_;

    row_norms_ = RowNormSketch(
        cfg.row_norm_hashings,
        std::max<std::size_t>(1, ceil_count(cfg.row_norm_bucket_factor * T_)),
        cfg.row_norm_width, rng::derive_seed(cfg.seed, 2, 0));
    reservoir_ = WeightedReservoir<SparseRow>(T_ + heavy_cap_, rng::derive_seed(cfg.seed, 3, 0));
    top_ = TopWeighted<SparseRow>(heavy_cap_);
    for (int s = 0; s < k_; ++s) {
      group_seed_.push_back(rng::derive_seed(cfg.seed, 100 + s, 0));
      entries_.emplace_back(cs_depth_, cs_width_, rng::derive_seed(cfg.seed, 200 + s, 0));
    }
  }

  int p() const noexcept { return cfg_.p; }
  int k() const noexcept { return k_; }
  std::size_t n() const noexcept { return cfg_.n; }
  std::size_t sample_budget() const noexcept { return T_; }
  std::size_t cs_width() const noexcept { return cs_width_; }
  std::size_t cs_depth() const noexcept { return cs_depth_; }
  std::size_t rows_ingested() const noexcept { return rows_seen_; }
  std::size_t gram_updates() const noexcept { return gram_updates_; }
  bool finished() const noexcept { return finished_; }

  /// Exact ||A||_F^2 so far.
  double frobenius_a() const noexcept { return z_; }
  /// L', the sketched ||A^T A||_F^2. Valid after finish().
  double frobenius_b_estimate() const { return frob_.estimate(); }

  /// u_i^(s) in (0, 1] for group s (1-based).
  double precision_scale(int s, std::size_t i) const {
    require(s >= 1 && s <= k_, ErrorKind::InvalidParameter, "sample group out of range");
    return rng::to_unit_open_closed(rng::mix64(rng::child_seed(group_seed_[s - 1], i)));
  }

  /// Rows must arrive in strictly increasing index order; entries sorted by
  /// column. Rows that are absent from the stream are zero.
  void ingest_row(std::size_t row, std::span<const SparseEntry> entries) {
    require(!finished_, ErrorKind::ModeMismatch, "ingest after finish()");
    if (row >= cfg_.n)
      fail(ErrorKind::IndexOutOfRange, "row " + std::to_string(row) + " >= n");
    if (any_row_ && row <= last_row_)
      fail(ErrorKind::ModeMismatch, "row " + std::to_string(row) +
                                        " arrived after row " + std::to_string(last_row_));
    std::size_t nnz = 0;
    for (std::size_t e = 0; e < entries.size(); ++e) {
      if (entries[e].col >= cfg_.n)
        fail(ErrorKind::IndexOutOfRange, "column " + std::to_string(entries[e].col) + " >= n");
      if (e > 0 && entries[e].col <= entries[e - 1].col)
        fail(ErrorKind::ModeMismatch, "row entries not sorted by column");
      nnz += entries[e].value != 0.0;
    }
    if (nnz > cfg_.row_sparsity)
      fail(ErrorKind::SparsityExceeded, "row " + std::to_string(row) + " has " +
                                            std::to_string(nnz) + " nonzeros, bound is " +
                                            std::to_string(cfg_.row_sparsity));
    any_row_ = true;
    last_row_ = row;
    ++rows_seen_;

    SparseRow a_row;
    for (const auto& e : entries)
      if (e.value != 0.0) a_row.push_back(e);
    if (a_row.empty()) return;
    const double w = squared_norm(a_row);
    z_ += w;
    reservoir_.offer(row, w, a_row);
    top_.offer(row, w, a_row);

    for_each_outer_product(std::span<const SparseEntry>(a_row), [&](const MatrixUpdate& u) {
      const std::uint64_t key = entry_key(u.row, u.col);
      frob_.update(key, u.value);
      row_norms_.update(u.row, key, u.value);
      for (int s = 1; s <= k_; ++s)
        entries_[s - 1].update(key, u.value / std::sqrt(precision_scale(s, u.row)));
      ++gram_updates_;
    });
  }

  void ingest(const MatrixStream& stream) {
    require(stream.mode == StreamMode::RowOrder, ErrorKind::ModeMismatch,
            "row-order estimator needs a row-order stream");
    require(stream.n == cfg_.n && stream.m == cfg_.n, ErrorKind::ShapeMismatch,
            "stream dimension does not match the sketch");
    for_each_row(stream, [&](std::size_t row, std::span<const SparseEntry> entries) {
      ingest_row(row, entries);
    });
  }

  /// Ends the ingest phase; queries are valid afterwards.
  void finish() {
    finished_ = true;
    l_prime_ = frob_.estimate();
  }

  /// Per-update cell writes: Frobenius rows, row-norm hashings, k count-sketches.
  std::size_t cells_per_gram_update() const noexcept {
    return frob_.repetitions() + row_norms_.hashings() + static_cast<std::size_t>(k_) * cs_depth_;
  }

  /// Cells currently held by all structures, stored rows included.
  std::size_t live_cells() const {
    std::size_t cells = 1 + frob_.cells() + row_norms_.cells();
    for (const auto& cs : entries_) cells += cs.cells();
    for (const auto& e : reservoir_.entries()) cells += 1 + e.item.size();
    for (const auto& e : top_.entries()) cells += 1 + e.item.size();
    return cells;
  }

  /// Estimated ||B_i||^2 for every row i (median over hashings).
  const std::vector<double>& row_norm_estimates() {
    require_finished();
    if (row_estimates_.empty()) {
      row_estimates_.resize(cfg_.n);
      for (std::size_t i = 0; i < cfg_.n; ++i) row_estimates_[i] = row_norms_.estimate(i);
    }
    return row_estimates_;
  }

  /// K: rows of B with estimated norm >= sqrt(L' / (10T)), at most 10T of
  /// them (largest first, ties to the lower index). Sorted by index.
  const std::vector<std::size_t>& heavy_rows() {
    require_finished();
    if (heavy_ready_) return heavy_;
    const auto& est = row_norm_estimates();
    const double threshold = l_prime_ / (10.0 * static_cast<double>(T_));
    std::vector<std::size_t> cand;
    for (std::size_t i = 0; i < cfg_.n; ++i)
      if (est[i] > 0.0 && est[i] >= threshold) cand.push_back(i);
    if (cand.size() > heavy_cap_) {
      std::stable_sort(cand.begin(), cand.end(),
                       [&](std::size_t a, std::size_t b) { return est[a] > est[b]; });
      cand.resize(heavy_cap_);
      std::sort(cand.begin(), cand.end());
    }
    heavy_ = std::move(cand);
    heavy_set_.insert(heavy_.begin(), heavy_.end());
    heavy_ready_ = true;
    return heavy_;
  }

  /// I_s for group s (1-based): every row outside K is recovered from the
  /// group's count-sketch, and it is kept when ||B~_i||^2 / u_i >= L' / T
  /// (at most T, best scores first); K is added with tau = 1. Light rows get
  /// tau = L' / ||B~_i||^2, the inverse of their inclusion rate times T.
  PrecisionSample precision_sample(int s) {
    require(s >= 1 && s <= k_, ErrorKind::InvalidParameter,
            "sample group " + std::to_string(s) + " outside 1.." + std::to_string(k_));
    require_finished();
    const auto& heavy = heavy_rows();
    const double threshold = l_prime_ / static_cast<double>(T_);

    struct Candidate {
      double score;
      std::size_t index;
      SparseRow row;
    };
    std::vector<Candidate> light;
    for (std::size_t i = 0; i < cfg_.n; ++i) {
      if (heavy_set_.count(i)) continue;
      SparseRow row = recover_row(s, i);
      const double norm2 = squared_norm(row);
      if (!(norm2 > 0.0)) continue;
      const double score = norm2 / precision_scale(s, i);
      if (score >= threshold) light.push_back({score, i, std::move(row)});
    }
    std::sort(light.begin(), light.end(), [](const Candidate& a, const Candidate& b) {
      return a.score != b.score ? a.score > b.score : a.index < b.index;
    });
    if (light.size() > T_) light.resize(T_);

    PrecisionSample out;
    for (std::size_t i : heavy) {
      out.indices.push_back(i);
      out.rows.push_back(recover_row(s, i));
      out.tau.push_back(1.0);
      out.heavy.push_back(true);
    }
    for (auto& c : light) {
      const double norm2 = squared_norm(c.row);
      out.indices.push_back(c.index);
      out.rows.push_back(std::move(c.row));
      out.tau.push_back(l_prime_ / norm2);
      out.heavy.push_back(false);
    }
    return out;
  }

  /// I_{k+1}: V (the 10T largest rows of A, tau = 1) plus the reservoir rows
  /// outside V that pass the Poisson test u_i >= 1 - min(1, T ||A_i||^2 / Z)
  /// (at most T, best keys first), with tau = Z / ||A_i||^2.
  RowSample row_sample() const {
    require_finished();
    RowSample out;
    std::unordered_set<std::size_t> in_v;
    for (const auto& e : top_.entries()) {
      in_v.insert(e.index);
      out.indices.push_back(e.index);
      out.rows.push_back(e.item);
      out.tau.push_back(1.0);
      out.heavy.push_back(true);
    }
    std::size_t taken = 0;
    for (const auto& e : reservoir_.entries()) {
      if (taken == T_) break;
      if (in_v.count(e.index)) continue;
      const double q = std::min(1.0, static_cast<double>(T_) * e.weight / z_);
      if (e.uniform < 1.0 - q) continue;
      out.indices.push_back(e.index);
      out.rows.push_back(e.item);
      out.tau.push_back(z_ / e.weight);
      out.heavy.push_back(false);
      ++taken;
    }
    return out;
  }

  const WeightedReservoir<SparseRow>& reservoir() const noexcept { return reservoir_; }

  /// Y = sum over I_1 x ... x I_{k+1} of T^{-sigma} X~(i_1, ..., i_{k+1}),
  /// sigma = number of positions whose index is outside K (or V for the last
  /// position). Evaluated exactly as the trace of a chain of weighted
  /// inner-product matrices.
  SchattenEstimate finalize() {
    require_finished();
    std::vector<PrecisionSample> groups;
    for (int s = 1; s <= k_; ++s) groups.push_back(precision_sample(s));
    const RowSample last = row_sample();
    const double inv_t = 1.0 / static_cast<double>(T_);

    auto weights = [&](const std::vector<double>& tau, const std::vector<bool>& heavy) {
      std::vector<double> w(tau.size());
      for (std::size_t i = 0; i < tau.size(); ++i) w[i] = heavy[i] ? 1.0 : tau[i] * inv_t;
      return w;
    };

    // chain = W_1 C_1 W_2 C_2 ... W_k C_k, then Y = sum_{a,b} chain(a,b) w_{k+1}(b) <A_b, B~_a>.
    DenseMatrix chain;
    {
      const auto w1 = weights(groups[0].tau, groups[0].heavy);
      chain = DenseMatrix(w1.size(), w1.size());
      for (std::size_t a = 0; a < w1.size(); ++a) chain(a, a) = w1[a];
    }
    for (int s = 1; s < k_; ++s) {
      const auto& prev = groups[s - 1];
      const auto& next = groups[s];
      const auto wn = weights(next.tau, next.heavy);
      DenseMatrix c(prev.rows.size(), next.rows.size());
      for (std::size_t a = 0; a < prev.rows.size(); ++a)
        for (std::size_t b = 0; b < next.rows.size(); ++b)
          c(a, b) = dot(prev.rows[a], next.rows[b]) * wn[b];
      chain = multiply(chain, c);
    }
    const auto& lastb = groups[k_ - 1];
    const auto& firstb = groups[0];
    const auto wl = weights(last.tau, last.heavy);
    DenseMatrix to_a(lastb.rows.size(), last.rows.size());
    for (std::size_t a = 0; a < lastb.rows.size(); ++a)
      for (std::size_t b = 0; b < last.rows.size(); ++b)
        to_a(a, b) = dot(lastb.rows[a], last.rows[b]) * wl[b];
    DenseMatrix from_a(last.rows.size(), firstb.rows.size());
    for (std::size_t b = 0; b < last.rows.size(); ++b)
      for (std::size_t a = 0; a < firstb.rows.size(); ++a)
        from_a(b, a) = dot(last.rows[b], firstb.rows[a]);
    const double y = trace_of_product(multiply(chain, to_a), from_a);

    SchattenEstimate e;
    e.value = y;
    e.p = cfg_.p;
    e.algorithm = "roworder";
    e.repetitions = 1;
    e.seed = cfg_.seed;
    e.t = 0;
    e.live_cells = live_cells();
    e.sketch_cells = *e.live_cells;
    e.updates = gram_updates_;
    e.cells_touched = gram_updates_ * cells_per_gram_update();
    e.sample_budget = T_;
    e.heavy_b_rows = heavy_.size();
    e.heavy_a_rows = top_.size();
    return e;
  }

 private:
  std::uint64_t entry_key(std::size_t row, std::size_t col) const noexcept {
    return static_cast<std::uint64_t>(row) * cfg_.n + col;
  }

  void require_finished() const {
    require(finished_, ErrorKind::NotFinalized, "ingest has not been completed");
  }

  // B~_i from group s: query every column, keep the s_A^2 largest magnitudes.
  SparseRow recover_row(int s, std::size_t i) const {
    const double unscale = std::sqrt(precision_scale(s, i));
    const auto& cs = entries_[s - 1];
    std::vector<SparseEntry> found;
    for (std::size_t c = 0; c < cfg_.n; ++c) {
      const double v = cs.query(entry_key(i, c)) * unscale;
      if (v != 0.0) found.push_back({c, v});
    }
    const std::size_t keep = cfg_.row_sparsity * cfg_.row_sparsity;
    if (found.size() > keep) {
      std::nth_element(found.begin(), found.begin() + keep, found.end(),
                       [](const SparseEntry& a, const SparseEntry& b) {
                         return std::abs(a.value) > std::abs(b.value);
                       });
      found.resize(keep);
    }
    std::sort(found.begin(), found.end(),
              [](const SparseEntry& a, const SparseEntry& b) { return a.col < b.col; });
    return found;
  }

  RowOrderConfig cfg_;
  int k_ = 1;
  std::size_t T_ = 1;
  std::size_t cs_width_ = 1;
  std::size_t cs_depth_ = 1;
  std::size_t heavy_cap_ = 10;
  FrobeniusSketch frob_;
  RowNormSketch row_norms_;
  WeightedReservoir<SparseRow> reservoir_;
  TopWeighted<SparseRow> top_;
  std::vector<std::uint64_t> group_seed_;
  std::vector<CountSketch> entries_;

  double z_ = 0.0;
  double l_prime_ = 0.0;
  bool finished_ = false;
  bool any_row_ = false;
  std::size_t last_row_ = 0;
  std::size_t rows_seen_ = 0;
  std::size_t gram_updates_ = 0;

  std::vector<double> row_estimates_;
  std::vector<std::size_t> heavy_;
  std::unordered_set<std::size_t> heavy_set_;
  bool heavy_ready_ = false;
};

inline SchattenEstimate estimate_roworder(const MatrixStream& stream, RowOrderConfig cfg) {
  require(stream.n == stream.m, ErrorKind::ShapeMismatch,
          "row-order estimator expects a square matrix");
  cfg.n = stream.n;
  RowOrderSketch sketch(cfg);
  sketch.ingest(stream);
  sketch.finish();
  return sketch.finalize();
}

/// p in 4Z: runs the one-pass estimator with exponent p/2 on B = A^T A,
/// whose updates are generated row by row from the row-order stream.
/// ||B||_{S_{p/2}}^{p/2} = ||A||_{S_p}^p and B is PSD by construction.
inline SchattenEstimate estimate_4z(const MatrixStream& row_stream, OnepassConfig cfg,
                                    Aggregate mode = Aggregate::Mean) {
  if (cfg.p < 4 || cfg.p % 4 != 0)
    fail(ErrorKind::UnsupportedP, "reduction path needs p in 4Z (got p = " +
                                      std::to_string(cfg.p) + ")");
  require(row_stream.mode == StreamMode::RowOrder, ErrorKind::ModeMismatch,
          "reduction path needs a row-order stream");
  const int p = cfg.p;
  cfg.p = p / 2;
  cfg.n = row_stream.m;
  cfg.psd_asserted = true;
  BilinearSketch sketch(cfg);
  for_each_gram_update(row_stream, [&](const MatrixUpdate& u) { sketch.apply(u); });
  SchattenEstimate e = sketch.estimate(mode);
  e.p = p;
  e.algorithm = "roworder4z";
  return e;
}

}  // namespace schatten
