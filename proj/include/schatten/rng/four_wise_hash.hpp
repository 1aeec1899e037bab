// Copyright 2026 The schatten-stream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>

#include "schatten/rng/mix.hpp"

namespace schatten::rng {

__extension__ using uint128 = unsigned __int128;

/// Arithmetic in the Mersenne field GF(2^61 - 1).
struct Mersenne61 {
  static constexpr std::uint64_t kPrime = (std::uint64_t{1} << 61) - 1;

  static constexpr std::uint64_t reduce(uint128 x) noexcept {
    std::uint64_t lo = static_cast<std::uint64_t>(x & kPrime);
    std::uint64_t hi = static_cast<std::uint64_t>(x >> 61);
    std::uint64_t r = lo + hi;
    if (r >= kPrime) r -= kPrime;
    return r;
  }

  static constexpr std::uint64_t mul(std::uint64_t a, std::uint64_t b) noexcept {
    return reduce(static_cast<uint128>(a) * b);
  }

  static constexpr std::uint64_t add(std::uint64_t a, std::uint64_t b) noexcept {
    std::uint64_t r = a + b;
    if (r >= kPrime) r -= kPrime;
    return r;
  }
};

/// 4-wise independent hash family: a random degree-3 polynomial over
/// GF(2^61 - 1). Keys must be < 2^61 - 1.
class FourWiseHash {
 public:
  using Field = Mersenne61;

  FourWiseHash() : FourWiseHash(0) {}

  explicit FourWiseHash(std::uint64_t seed) : seed_(seed) {
    std::uint64_t state = seed;
    for (auto& c : coeff_) {
      // Rejection keeps the coefficients exactly uniform on the field.
      do {
        state = mix64(state);
      } while ((state >> 3) >= Field::kPrime);
      c = state >> 3;
    }
  }

  std::uint64_t seed() const noexcept { return seed_; }
  const std::array<std::uint64_t, 4>& coefficients() const noexcept { return coeff_; }

  /// Field element c0 + c1 k + c2 k^2 + c3 k^3 (Horner).
  std::uint64_t operator()(std::uint64_t key) const noexcept {
    const std::uint64_t k = key >= Field::kPrime ? key - Field::kPrime : key;
    std::uint64_t acc = coeff_[3];
    acc = Field::add(Field::mul(acc, k), coeff_[2]);
    acc = Field::add(Field::mul(acc, k), coeff_[1]);
    acc = Field::add(Field::mul(acc, k), coeff_[0]);
    return acc;
  }

  /// Multiply-shift of the field element onto [0, buckets).
  std::uint64_t bucket(std::uint64_t key, std::uint64_t buckets) const noexcept {
    return static_cast<std::uint64_t>(
        (static_cast<uint128>((*this)(key)) * buckets) >> 61);
  }

  /// +1 or -1 from the parity of bit 0 of the field element.
  int sign(std::uint64_t key) const noexcept {
    return ((*this)(key) & 1U) ? -1 : 1;
  }

 private:
  std::uint64_t seed_ = 0;
  std::array<std::uint64_t, 4> coeff_{};
};

}  // namespace schatten::rng
