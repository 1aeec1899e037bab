// Copyright 2026 The schatten-stream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "schatten/error.hpp"
#include "schatten/estimate.hpp"
#include "schatten/rng/four_wise_hash.hpp"
#include "schatten/rng/mix.hpp"

namespace schatten {

/// Count-sketch over 64-bit keys: depth rows of width signed buckets, each
/// row with its own 4-wise bucket hash and 4-wise sign hash. Linear in the
/// updates; a key's estimate is the median over rows of sign * bucket.
class CountSketch {
 public:
  CountSketch(std::size_t depth, std::size_t width, std::uint64_t seed)
      : depth_(depth), width_(width), cells_(depth * width, 0.0) {
    require(depth >= 1 && width >= 1, ErrorKind::InvalidParameter,
            "count-sketch needs depth >= 1 and width >= 1");
    bucket_.reserve(depth);
    sign_.reserve(depth);
    for (std::size_t r = 0; r < depth; ++r) {
      bucket_.emplace_back(rng::child_seed(seed, 2 * r));
      sign_.emplace_back(rng::child_seed(seed, 2 * r + 1));
    }
    scratch_.resize(depth);
  }

  std::size_t depth() const noexcept { return depth_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t cells() const noexcept { return cells_.size(); }

  void update(std::uint64_t key, double delta) {
    for (std::size_t r = 0; r < depth_; ++r)
      cells_[r * width_ + bucket_[r].bucket(key, width_)] += sign_[r].sign(key) * delta;
  }

  double query(std::uint64_t key) const {
    for (std::size_t r = 0; r < depth_; ++r)
      scratch_[r] = sign_[r].sign(key) * cells_[r * width_ + bucket_[r].bucket(key, width_)];
    return median(scratch_);
  }

  /// Sum of squared buckets in row r: an unbiased estimate of F2.
  double row_f2(std::size_t r) const {
    double acc = 0.0;
    for (std::size_t c = 0; c < width_; ++c) acc += cells_[r * width_ + c] * cells_[r * width_ + c];
    return acc;
  }

 private:
  std::size_t depth_;
  std::size_t width_;
  std::vector<double> cells_;
  std::vector<rng::FourWiseHash> bucket_;
  std::vector<rng::FourWiseHash> sign_;
  mutable std::vector<double> scratch_;
};

/// AMS-style estimator of ||B||_F^2 over the entry stream of B: independent
/// signed-bucket rows, each giving sum-of-squares, combined by median.
class FrobeniusSketch {
 public:
  FrobeniusSketch(std::size_t repetitions, std::size_t width, std::uint64_t seed)
      : sketch_(repetitions, width, seed) {}

  /// Width ceil(18 / eps^2) (per-row relative std <= eps / 3), median of 7.
  static FrobeniusSketch for_accuracy(double epsilon, std::uint64_t seed,
                                      std::size_t repetitions = 7) {
    require(epsilon > 0.0, ErrorKind::InvalidParameter, "epsilon must be > 0");
    const auto width = static_cast<std::size_t>(std::ceil(18.0 / (epsilon * epsilon)));
    return FrobeniusSketch(repetitions, width, seed);
  }

  void update(std::uint64_t key, double delta) { sketch_.update(key, delta); }

  double estimate() const {
    std::vector<double> per_row(sketch_.depth());
    for (std::size_t r = 0; r < sketch_.depth(); ++r) per_row[r] = sketch_.row_f2(r);
    return median(std::move(per_row));
  }

  std::size_t cells() const noexcept { return sketch_.cells(); }
  std::size_t repetitions() const noexcept { return sketch_.depth(); }

 private:
  CountSketch sketch_;
};

/// Cascaded sketch for the squared norms of the rows of B: each of `hashings`
/// independent maps sends a row index to one of `buckets` buckets, and every
/// bucket holds a small signed-bucket F2 sketch of the entries landing in it.
/// A row's estimate is the median over hashings of its bucket's F2 estimate.
class RowNormSketch {
 public:
  RowNormSketch(std::size_t hashings, std::size_t buckets, std::size_t width,
                std::uint64_t seed)
      : hashings_(hashings), buckets_(buckets), width_(width),
        cells_(hashings * buckets * width, 0.0) {
    require(hashings >= 1 && buckets >= 1 && width >= 1, ErrorKind::InvalidParameter,
            "row-norm sketch dimensions must be positive");
    for (std::size_t h = 0; h < hashings; ++h) {
      row_hash_.emplace_back(rng::child_seed(seed, 3 * h));
      cell_hash_.emplace_back(rng::child_seed(seed, 3 * h + 1));
      sign_hash_.emplace_back(rng::child_seed(seed, 3 * h + 2));
    }
  }

  std::size_t cells() const noexcept { return cells_.size(); }
  std::size_t hashings() const noexcept { return hashings_; }

  /// Adds delta to entry (row, col); `key` identifies the entry.
  void update(std::size_t row, std::uint64_t key, double delta) {
    for (std::size_t h = 0; h < hashings_; ++h) {
      const std::size_t b = row_hash_[h].bucket(row, buckets_);
      const std::size_t c = cell_hash_[h].bucket(key, width_);
      cells_[(h * buckets_ + b) * width_ + c] += sign_hash_[h].sign(key) * delta;
    }
  }

  double estimate(std::size_t row) const {
    std::vector<double> per_hash(hashings_);
    for (std::size_t h = 0; h < hashings_; ++h) {
      const std::size_t b = row_hash_[h].bucket(row, buckets_);
      const double* cell = cells_.data() + (h * buckets_ + b) * width_;
      double acc = 0.0;
      for (std::size_t c = 0; c < width_; ++c) acc += cell[c] * cell[c];
      per_hash[h] = acc;
    }
    return median(std::move(per_hash));
  }

 private:
  std::size_t hashings_;
  std::size_t buckets_;
  std::size_t width_;
  std::vector<double> cells_;
  std::vector<rng::FourWiseHash> row_hash_;
  std::vector<rng::FourWiseHash> cell_hash_;
  std::vector<rng::FourWiseHash> sign_hash_;
};

}  // namespace schatten
