// Copyright 2026 The schatten-stream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "schatten/core/matrix.hpp"
#include "schatten/error.hpp"

namespace schatten {

struct EigenResult {
  std::vector<double> eigenvalues;  // descending
  int sweeps = 0;
  double off_diagonal_residual = 0.0;
};

struct SpectralResult {
  std::vector<double> singular_values;  // non-negative, descending
  int iterations = 0;
  double off_diagonal_residual = 0.0;
};

inline constexpr int kMaxJacobiSweeps = 100;

namespace detail {

inline double off_diagonal_norm(const DenseMatrix& a) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) acc += a(i, j) * a(i, j);
  return std::sqrt(acc);
}

}  // namespace detail

/// Cyclic Jacobi eigenvalue iteration for a symmetric matrix. Stops once the
/// off-diagonal Frobenius mass is <= tol (default 1e-12 * ||A||_F).
inline EigenResult symmetric_eigenvalues(DenseMatrix a,
                                         std::optional<double> tol = {}) {
  require(a.square(), ErrorKind::ShapeMismatch,
          "eigenvalues of a non-square matrix");
  require(all_finite(a), ErrorKind::InvalidParameter, "matrix has non-finite entries");
  const std::size_t n = a.rows();
  const double limit = tol.value_or(1e-12 * std::sqrt(frobenius_norm_squared(a)));
  require(limit >= 0.0, ErrorKind::InvalidParameter, "tolerance must be >= 0");

  EigenResult out;
  double residual = detail::off_diagonal_norm(a);
  while (residual > limit) {
    if (out.sweeps == kMaxJacobiSweeps)
      fail(ErrorKind::NoConvergence,
           "Jacobi did not converge in " + std::to_string(kMaxJacobiSweeps) +
               " sweeps (residual " + std::to_string(residual) + ")");
    ++out.sweeps;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
      }
    }
    residual = detail::off_diagonal_norm(a);
  }
  out.off_diagonal_residual = residual;
  out.eigenvalues.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.eigenvalues[i] = a(i, i);
  std::sort(out.eigenvalues.begin(), out.eigenvalues.end(), std::greater<>());
  return out;
}

/// Singular values via Jacobi on A itself when A is symmetric, otherwise on
/// the smaller of A^T A and A A^T with clamped square roots. The Gram route
/// loses accuracy for tiny singular values (~sqrt(eps) * sigma_1).
inline SpectralResult singular_values(const DenseMatrix& a,
                                      std::optional<double> tol = {}) {
  require(a.rows() > 0 && a.cols() > 0, ErrorKind::ShapeMismatch, "empty matrix");
  SpectralResult out;
  EigenResult eig;
  if (is_symmetric(a)) {
    eig = symmetric_eigenvalues(a, tol);
    for (double& v : eig.eigenvalues) v = std::abs(v);
  } else {
    const DenseMatrix at = transpose(a);
    DenseMatrix gram = a.rows() >= a.cols() ? multiply(at, a) : multiply(a, at);
    // Exact symmetry keeps the rotations two-sided consistent.
    for (std::size_t i = 0; i < gram.rows(); ++i)
      for (std::size_t j = i + 1; j < gram.cols(); ++j)
        gram(j, i) = gram(i, j);
    eig = symmetric_eigenvalues(std::move(gram), tol);
    for (double& v : eig.eigenvalues) v = std::sqrt(std::max(v, 0.0));
  }
  std::sort(eig.eigenvalues.begin(), eig.eigenvalues.end(), std::greater<>());
  out.singular_values = std::move(eig.eigenvalues);
  out.iterations = eig.sweeps;
  out.off_diagonal_residual = eig.off_diagonal_residual;
  return out;
}

/// Sum of sigma_j^p over a given spectrum; zero singular values add nothing.
inline double schatten_power_from_spectrum(const std::vector<double>& sigma,
                                           double p) {
  require(p > 0.0, ErrorKind::InvalidParameter, "Schatten exponent must be > 0");
  double acc = 0.0;
  for (double s : sigma)
    if (s > 0.0) acc += std::pow(s, p);
  return acc;
}

/// ||A||_{S_p}^p, the p-th power of the Schatten p-norm.
inline double schatten_norm_exact(const DenseMatrix& a, double p) {
  require(p > 0.0, ErrorKind::InvalidParameter, "Schatten exponent must be > 0");
  return schatten_power_from_spectrum(singular_values(a).singular_values, p);
}

/// Tr(A^p) by repeated dense multiplication.
inline double trace_power(const DenseMatrix& a, int p) {
  require(a.square(), ErrorKind::ShapeMismatch, "trace_power needs a square matrix");
  require(p >= 1, ErrorKind::InvalidParameter, "trace_power exponent must be >= 1");
  if (p == 1) return trace(a);
  DenseMatrix acc = a;
  for (int k = 2; k < p; ++k) acc = multiply(acc, a);
  return trace_of_product(acc, a);
}

/// B = [[0, A], [A^T, 0]], of size (n+m) x (n+m).
inline DenseMatrix symmetric_embed(const DenseMatrix& a) {
  const std::size_t n = a.rows();
  const std::size_t m = a.cols();
  DenseMatrix b(n + m, n + m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      b(i, n + j) = a(i, j);
      b(n + j, i) = a(i, j);
    }
  return b;
}

inline double min_eigenvalue(const DenseMatrix& a) {
  auto eig = symmetric_eigenvalues(a);
  return eig.eigenvalues.empty() ? 0.0 : eig.eigenvalues.back();
}

/// Symmetric with smallest eigenvalue >= -tol_rel * ||A||_F.
inline bool is_psd(const DenseMatrix& a, double tol_rel = 1e-9) {
  if (!is_symmetric(a, 1e-12 * std::sqrt(frobenius_norm_squared(a)))) return false;
  DenseMatrix sym = a;
  for (std::size_t i = 0; i < sym.rows(); ++i)
    for (std::size_t j = i + 1; j < sym.cols(); ++j) sym(j, i) = sym(i, j);
  return min_eigenvalue(sym) >= -tol_rel * std::sqrt(frobenius_norm_squared(a));
}

}  // namespace schatten
