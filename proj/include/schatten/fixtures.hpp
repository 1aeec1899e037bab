// Copyright 2026 The schatten-stream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "schatten/core/matrix.hpp"
#include "schatten/core/spectral.hpp"
#include "schatten/core/stream.hpp"
#include "schatten/error.hpp"

namespace schatten::fixtures {

/// Matrix with a spectrum known in closed form, sorted descending.
struct KnownSpectrum {
  DenseMatrix matrix;
  std::vector<double> spectrum;
};

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// Block-diagonal matrix of c copies of the m-cycle Laplacian, whose
/// eigenvalues are 4 sin^2(j pi / m), j = 0..m-1, each with multiplicity c.
inline KnownSpectrum cycle_laplacian(std::size_t m, std::size_t copies = 1) {
  require(m >= 3, ErrorKind::InvalidParameter, "cycle length must be >= 3");
  require(copies >= 1, ErrorKind::InvalidParameter, "need at least one copy");
  KnownSpectrum out{DenseMatrix(m * copies, m * copies), {}};
  for (std::size_t b = 0; b < copies; ++b) {
    const std::size_t base = b * m;
    for (std::size_t v = 0; v < m; ++v) {
      const std::size_t next = base + (v + 1) % m;
      out.matrix(base + v, base + v) = 2.0;
      out.matrix(base + v, next) -= 1.0;
      out.matrix(next, base + v) -= 1.0;
    }
    for (std::size_t j = 0; j < m; ++j) {
      const double s = std::sin(static_cast<double>(j) * std::numbers::pi / m);
      out.spectrum.push_back(4.0 * s * s);
    }
  }
  std::sort(out.spectrum.begin(), out.spectrum.end(), std::greater<>());
  return out;
}

/// Edge-by-vertex incidence matrix of `copies` disjoint m-cycles, one row per
/// edge (v, v+1) in edge order. Unsigned rows hold two +1 entries and give
/// M^T M = D + Adj (the signless Laplacian, equal in spectrum to the
/// Laplacian only for even m); signed rows hold +1 at v and -1 at v+1 and
/// give M^T M = L exactly.
inline MatrixStream cycle_union_incidence(std::size_t m, std::size_t copies = 1,
                                          bool signed_rows = false) {
  require(m >= 3, ErrorKind::InvalidParameter, "cycle length must be >= 3");
  require(copies >= 1, ErrorKind::InvalidParameter, "need at least one copy");
  const std::size_t n = m * copies;
  MatrixStream s{n, n, StreamMode::RowOrder, {}, true};
  for (std::size_t b = 0; b < copies; ++b) {
    for (std::size_t e = 0; e < m; ++e) {
      const std::size_t row = b * m + e;
      const std::size_t tail = b * m + e;
      const std::size_t head = b * m + (e + 1) % m;
      const double head_value = signed_rows ? -1.0 : 1.0;
      if (head < tail) {
        s.updates.push_back({row, head, head_value});
        s.updates.push_back({row, tail, 1.0});
      } else {
        s.updates.push_back({row, tail, 1.0});
        s.updates.push_back({row, head, head_value});
      }
    }
  }
  return s;
}

struct GapResult {
  std::size_t n = 0;
  double value_a = 0.0;  // n/(2t+1) copies of L_{2t+1}
  double value_b = 0.0;  // n/(4t+2) copies of L_{4t+2}
  double ratio = 0.0;    // value_a / value_b
};

/// Schatten p-th powers of the two cycle-union Laplacians on n nodes, for a
/// non-integer p. n defaults to lcm(2t+1, 4t+2) and must be a multiple of it.
inline GapResult schatten_gap(std::size_t t, double p, std::size_t n = 0) {
  require(t >= 2, ErrorKind::InvalidParameter, "t must be >= 2");
  require(p > 0.0, ErrorKind::InvalidParameter, "p must be > 0");
  require(p != std::floor(p), ErrorKind::InvalidParameter,
          "p must be non-integer (integer p gives no gap)");
  const std::size_t short_cycle = 2 * t + 1;
  const std::size_t long_cycle = 4 * t + 2;
  const std::size_t unit = std::lcm(short_cycle, long_cycle);
  if (n == 0) n = unit;
  require(n % unit == 0, ErrorKind::InvalidParameter,
          "n must be a multiple of " + std::to_string(unit));
  GapResult g;
  g.n = n;
  // The matrices are block diagonal, so each power is copies times one block.
  g.value_a = static_cast<double>(n / short_cycle) *
              schatten_norm_exact(cycle_laplacian(short_cycle).matrix, p);
  g.value_b = static_cast<double>(n / long_cycle) *
              schatten_norm_exact(cycle_laplacian(long_cycle).matrix, p);
  g.ratio = g.value_a / g.value_b;
  return g;
}

/// One row e_j per element j of each set, in order; rows past the last set
/// are zero. The matrix is n x n.
inline MatrixStream indicator_rows(std::size_t n,
                                   const std::vector<std::vector<std::size_t>>& sets) {
  require(n >= 1, ErrorKind::InvalidParameter, "n must be >= 1");
  MatrixStream s{n, n, StreamMode::RowOrder, {}, true};
  std::size_t row = 0;
  for (const auto& set : sets) {
    for (std::size_t j : set) {
      if (row >= n)
        fail(ErrorKind::InvalidParameter,
             "indicator rows exceed n = " + std::to_string(n));
      require(j < n, ErrorKind::InvalidParameter,
              "set element " + std::to_string(j) + " outside [0, n)");
      s.updates.push_back({row++, j, 1.0});
    }
  }
  return s;
}

inline DenseMatrix diagonal(const std::vector<double>& values) {
  return DenseMatrix::diagonal(values);
}

struct UniformProfile {};  // eigenvalues i.i.d. uniform on [0.5, 1.5)
struct PowerLawProfile {   // eigenvalue j (1-based) is j^-alpha
  double alpha = 1.0;
};
using SpectrumProfile = std::variant<UniformProfile, PowerLawProfile, std::vector<double>>;

/// Eigenvalues the profile prescribes for an n x n matrix, sorted descending.
inline std::vector<double> profile_spectrum(std::size_t n, const SpectrumProfile& profile,
                                            std::uint64_t seed) {
  std::vector<double> lambda;
  if (std::holds_alternative<UniformProfile>(profile)) {
    std::mt19937_64 gen(seed ^ 0xA5A5A5A5ULL);
    for (std::size_t i = 0; i < n; ++i) lambda.push_back(0.5 + uniform01(gen));
  } else if (const auto* pl = std::get_if<PowerLawProfile>(&profile)) {
    for (std::size_t i = 0; i < n; ++i)
      lambda.push_back(std::pow(static_cast<double>(i + 1), -pl->alpha));
  } else {
    lambda = std::get<std::vector<double>>(profile);
    require(lambda.size() == n, ErrorKind::InvalidParameter,
            "prescribed spectrum needs exactly n values");
  }
  for (double l : lambda)
    require(l >= 0.0 && std::isfinite(l), ErrorKind::InvalidParameter,
            "PSD spectrum values must be finite and >= 0");
  std::sort(lambda.begin(), lambda.end(), std::greater<>());
  return lambda;
}

/// Orthogonal n x n matrix: the product of one Givens rotation per pair
/// (i, j), i < j, each with a uniform random angle.
inline DenseMatrix random_orthogonal(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  DenseMatrix u = DenseMatrix::identity(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double theta = 2.0 * std::numbers::pi * uniform01(gen);
      const double c = std::cos(theta);
      const double s = std::sin(theta);
      for (std::size_t r = 0; r < n; ++r) {
        const double a = u(r, i);
        const double b = u(r, j);
        u(r, i) = c * a - s * b;
        u(r, j) = s * a + c * b;
      }
    }
  }
  return u;
}

/// U diag(lambda) U^T with U = random_orthogonal, symmetrized exactly.
inline KnownSpectrum random_psd(std::size_t n, const SpectrumProfile& profile,
                                std::uint64_t seed) {
  require(n >= 1, ErrorKind::InvalidParameter, "n must be >= 1");
  KnownSpectrum out{DenseMatrix(n, n), profile_spectrum(n, profile, seed)};
  const DenseMatrix u = random_orthogonal(n, seed);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += u(i, k) * out.spectrum[k] * u(j, k);
      out.matrix(i, j) = acc;
      out.matrix(j, i) = acc;
    }
  return out;
}

/// n x n row-order stream with exactly s_A nonzeros in every row and every
/// column: the union of s_A permutation matrices with pairwise disjoint
/// supports. Each permutation is drawn uniformly and redrawn on collision;
/// after 200 failed draws the remaining layers fall back to shifted copies
/// of a random permutation pair. Values are +-U[0.5, 1.5).
inline MatrixStream random_sparse(std::size_t n, std::size_t s_a, std::uint64_t seed) {
  require(n >= 1, ErrorKind::InvalidParameter, "n must be >= 1");
  require(s_a >= 1 && s_a <= n, ErrorKind::InvalidParameter,
          "infeasible sparsity: need 1 <= s_A <= n");
  std::mt19937_64 gen(seed);
  std::vector<std::vector<std::size_t>> cols(n);  // cols[i]: nonzero columns of row i
  auto taken = [&](std::size_t i, std::size_t c) {
    return std::find(cols[i].begin(), cols[i].end(), c) != cols[i].end();
  };
  std::vector<std::size_t> perm(n);
  std::size_t layer = 0;
  for (; layer < s_a; ++layer) {
    bool placed = false;
    for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), gen);
      placed = true;
      for (std::size_t i = 0; i < n && placed; ++i) placed = !taken(i, perm[i]);
    }
    if (!placed) break;
    for (std::size_t i = 0; i < n; ++i) cols[i].push_back(perm[i]);
  }
  if (layer < s_a) {
    // Shifted layers: row rp[i] gets columns cp[(i + k) mod n], k = 0..s_A-1.
    for (auto& c : cols) c.clear();
    std::vector<std::size_t> rp(n), cp(n);
    std::iota(rp.begin(), rp.end(), 0);
    std::iota(cp.begin(), cp.end(), 0);
    std::shuffle(rp.begin(), rp.end(), gen);
    std::shuffle(cp.begin(), cp.end(), gen);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < s_a; ++k) cols[rp[i]].push_back(cp[(i + k) % n]);
  }
  MatrixStream s{n, n, StreamMode::RowOrder, {}, true};
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(cols[i].begin(), cols[i].end());
    for (std::size_t c : cols[i]) {
      const double magnitude = 0.5 + uniform01(gen);
      const double value = (gen() & 1) ? -magnitude : magnitude;
      s.updates.push_back({i, c, value});
    }
  }
  return s;
}

}  // namespace schatten::fixtures
