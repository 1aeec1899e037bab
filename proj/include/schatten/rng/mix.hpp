// Copyright 2026 The schatten-stream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

namespace schatten::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

/// splitmix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Sub-seed for one (matrix slot, repetition slot) pair under a root seed:
///   mix64(mix64(mix64(root) ^ matrix_slot) ^ repetition_slot)
constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t matrix_slot,
                                    std::uint64_t repetition_slot) noexcept {
  return mix64(mix64(mix64(root) ^ matrix_slot) ^ repetition_slot);
}

/// Tagged child seed, used to split one sub-seed into independent families.
constexpr std::uint64_t child_seed(std::uint64_t seed, std::uint64_t tag) noexcept {
  return mix64(seed ^ mix64(tag));
}

/// Uniform double in (0, 1] from a 64-bit word (top 53 bits).
constexpr double to_unit_open_closed(std::uint64_t word) noexcept {
  return (static_cast<double>(word >> 11) + 1.0) * 0x1.0p-53;
}

/// Uniform double in (0, 1) from a 64-bit word (top 52 bits, so the largest
/// value 1 - 2^-53 stays below 1).
constexpr double to_unit_open(std::uint64_t word) noexcept {
  return (static_cast<double>(word >> 12) + 0.5) * 0x1.0p-52;
}

}  // namespace schatten::rng
