// Copyright 2026 The schatten-stream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "schatten/core/matrix.hpp"
#include "schatten/estimate.hpp"
#include "schatten/fixtures.hpp"

namespace schatten::testing {

/// Symmetric matrix with entries uniform on [-1, 1).
inline DenseMatrix random_symmetric(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  DenseMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const double v = 2.0 * fixtures::uniform01(gen) - 1.0;
      a(i, j) = v;
      a(j, i) = v;
    }
  return a;
}

/// Dense matrix with entries uniform on [-1, 1).
inline DenseMatrix random_dense(std::size_t n, std::size_t m, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  DenseMatrix a(n, m);
  for (double& v : a.data()) v = 2.0 * fixtures::uniform01(gen) - 1.0;
  return a;
}

inline double relative_error(double value, double truth) {
  return truth == 0.0 ? std::abs(value) : std::abs(value - truth) / std::abs(truth);
}

struct Moments {
  double mean = 0.0;
  double variance = 0.0;  // unbiased sample variance
  double standard_error = 0.0;
};

inline Moments moments(const std::vector<double>& xs) {
  Moments m;
  const double n = static_cast<double>(xs.size());
  for (double x : xs) m.mean += x;
  m.mean /= n;
  for (double x : xs) m.variance += (x - m.mean) * (x - m.mean);
  m.variance /= n - 1.0;
  m.standard_error = std::sqrt(m.variance / n);
  return m;
}

}  // namespace schatten::testing
