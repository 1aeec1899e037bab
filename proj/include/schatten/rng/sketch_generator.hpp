// Copyright 2026 The schatten-stream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "schatten/core/matrix.hpp"
#include "schatten/error.hpp"
#include "schatten/rng/four_wise_hash.hpp"
#include "schatten/rng/mix.hpp"

namespace schatten::rng {

enum class GeneratorKind { Gaussian, ZdSparse, DebugIdentity };

constexpr std::string_view to_string(GeneratorKind kind) noexcept {
  switch (kind) {
    case GeneratorKind::Gaussian: return "gaussian";
    case GeneratorKind::ZdSparse: return "zd";
    case GeneratorKind::DebugIdentity: return "identity";
  }
  return "gaussian";
}

inline GeneratorKind parse_generator_kind(std::string_view text) {
  if (text == "gaussian") return GeneratorKind::Gaussian;
  if (text == "zd" || text == "zd_sparse") return GeneratorKind::ZdSparse;
  if (text == "identity" || text == "debug_identity") return GeneratorKind::DebugIdentity;
  fail(ErrorKind::InvalidParameter, "unknown sketch kind '" + std::string(text) +
                                        "' (expected gaussian|zd|identity)");
}

/// Standard normal quantile.
inline double normal_quantile(double u) {
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * u);
}

/// The single nonzero in a sparse column: row index and value.
struct ColumnEntry {
  std::size_t row = 0;
  double value = 0.0;
};

/// Seeded source of the columns of one t x n sketch matrix G_l for one
/// repetition. Every column is recomputed from
/// (root seed, matrix_slot, repetition_slot, j) on demand, so the matrix is
/// never stored.
///
///  - gaussian: entries N(0, 1/t); entry (row, j) is
///      quantile(u) / sqrt(t), u = unit(mix64(mix64(g ^ j) + row)),
///    with g = child_seed(sub_seed, 3).
///  - zd: one nonzero d_j in {-1, +1} at row h(j) (no 1/sqrt(t) scaling);
///    h and d are independent FourWiseHash families seeded by
///    child_seed(sub_seed, 1) and child_seed(sub_seed, 2).
///  - identity: t == n and column j is e_j.
///
/// sub_seed = derive_seed(root seed, matrix_slot, repetition_slot).
class SketchGenerator {
 public:
  SketchGenerator(GeneratorKind kind, std::size_t t, std::size_t n,
                  std::uint64_t seed, std::uint64_t matrix_slot,
                  std::uint64_t repetition_slot)
      : kind_(kind),
        t_(t),
        n_(n),
        seed_(seed),
        matrix_slot_(matrix_slot),
        repetition_slot_(repetition_slot),
        sub_seed_(derive_seed(seed, matrix_slot, repetition_slot)),
        bucket_hash_(child_seed(sub_seed_, 1)),
        sign_hash_(child_seed(sub_seed_, 2)),
        gauss_seed_(child_seed(sub_seed_, 3)),
        scale_(1.0 / std::sqrt(static_cast<double>(t))) {
    require(t >= 1 && n >= 1, ErrorKind::InvalidParameter,
            "sketch generator needs t >= 1 and n >= 1");
    if (kind == GeneratorKind::DebugIdentity)
      require(t == n, ErrorKind::InvalidParameter,
              "identity sketch requires t == n (got t=" + std::to_string(t) +
                  ", n=" + std::to_string(n) + ")");
  }

  GeneratorKind kind() const noexcept { return kind_; }
  std::size_t t() const noexcept { return t_; }
  std::size_t n() const noexcept { return n_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t matrix_slot() const noexcept { return matrix_slot_; }
  std::uint64_t repetition_slot() const noexcept { return repetition_slot_; }
  bool sparse() const noexcept { return kind_ != GeneratorKind::Gaussian; }

  struct ZdColumn {
    std::size_t bucket;
    int sign;
  };

  ZdColumn zd_column(std::size_t j) const {
    require(kind_ == GeneratorKind::ZdSparse, ErrorKind::KindMismatch,
            "zd_column on a non-zd generator");
    check_column(j);
    return {static_cast<std::size_t>(bucket_hash_.bucket(j, t_)), sign_hash_.sign(j)};
  }

  /// The nonzero of a sparse (zd or identity) column.
  ColumnEntry sparse_entry(std::size_t j) const {
    check_column(j);
    switch (kind_) {
      case GeneratorKind::ZdSparse: {
        auto c = zd_column(j);
        return {c.bucket, static_cast<double>(c.sign)};
      }
      case GeneratorKind::DebugIdentity:
        return {j, 1.0};
      case GeneratorKind::Gaussian:
        break;
    }
    fail(ErrorKind::KindMismatch, "sparse_entry on a gaussian generator");
  }

  double gaussian_entry(std::size_t row, std::size_t j) const noexcept {
    const std::uint64_t word = mix64(mix64(gauss_seed_ ^ j) + row);
    return normal_quantile(to_unit_open(word)) * scale_;
  }

  void fill_gaussian_column(std::size_t j, std::span<double> out) const {
    require(kind_ == GeneratorKind::Gaussian, ErrorKind::KindMismatch,
            "gaussian_column on a non-gaussian generator");
    check_column(j);
    require(out.size() == t_, ErrorKind::ShapeMismatch, "column buffer size != t");
    for (std::size_t r = 0; r < t_; ++r) out[r] = gaussian_entry(r, j);
  }

  std::vector<double> gaussian_column(std::size_t j) const {
    std::vector<double> out(t_);
    fill_gaussian_column(j, out);
    return out;
  }

  /// Column j as a dense length-t vector, any kind.
  void fill_column(std::size_t j, std::span<double> out) const {
    if (kind_ == GeneratorKind::Gaussian) {
      fill_gaussian_column(j, out);
      return;
    }
    require(out.size() == t_, ErrorKind::ShapeMismatch, "column buffer size != t");
    std::fill(out.begin(), out.end(), 0.0);
    auto e = sparse_entry(j);
    out[e.row] = e.value;
  }

  std::vector<double> column(std::size_t j) const {
    std::vector<double> out(t_);
    fill_column(j, out);
    return out;
  }

  /// The full t x n matrix. Bulk paths and tests only.
  DenseMatrix dense_matrix() const {
    DenseMatrix g(t_, n_);
    std::vector<double> col(t_);
    for (std::size_t j = 0; j < n_; ++j) {
      fill_column(j, col);
      for (std::size_t r = 0; r < t_; ++r) g(r, j) = col[r];
    }
    return g;
  }

 private:
  void check_column(std::size_t j) const {
    if (j >= n_)
      fail(ErrorKind::IndexOutOfRange,
           "column " + std::to_string(j) + " >= n=" + std::to_string(n_));
  }

  GeneratorKind kind_;
  std::size_t t_;
  std::size_t n_;
  std::uint64_t seed_;
  std::uint64_t matrix_slot_;
  std::uint64_t repetition_slot_;
  std::uint64_t sub_seed_;
  FourWiseHash bucket_hash_;
  FourWiseHash sign_hash_;
  std::uint64_t gauss_seed_;
  double scale_;
};

}  // namespace schatten::rng
