// Copyright 2026 The schatten-stream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "schatten/error.hpp"

namespace schatten {

enum class Aggregate { Mean, MedianOfMeans };

constexpr std::string_view to_string(Aggregate a) noexcept {
  return a == Aggregate::Mean ? "mean" : "median_of_means";
}

inline Aggregate parse_aggregate(std::string_view text) {
  if (text == "mean") return Aggregate::Mean;
  if (text == "mom" || text == "median_of_means") return Aggregate::MedianOfMeans;
  fail(ErrorKind::InvalidParameter, "unknown aggregate '" + std::string(text) +
                                        "' (expected mean|mom)");
}

inline double mean(std::span<const double> values) {
  require(!values.empty(), ErrorKind::InvalidParameter, "mean of no values");
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc / static_cast<double>(values.size());
}

inline double median(std::vector<double> values) {
  require(!values.empty(), ErrorKind::InvalidParameter, "median of no values");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  if (values.size() % 2 == 1) return values[mid];
  const double hi = values[mid];
  const double lo = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lo + hi);
}

/// Median of the means of consecutive groups of ceil(r / 9) values.
inline double median_of_means(std::span<const double> values) {
  require(!values.empty(), ErrorKind::InvalidParameter, "median_of_means of no values");
  const std::size_t group = (values.size() + 8) / 9;
  std::vector<double> means;
  for (std::size_t start = 0; start < values.size(); start += group) {
    const std::size_t len = std::min(group, values.size() - start);
    means.push_back(mean(values.subspan(start, len)));
  }
  return median(std::move(means));
}

inline double aggregate(std::span<const double> values, Aggregate mode) {
  return mode == Aggregate::Mean ? mean(values) : median_of_means(values);
}

/// Estimate of ||A||_{S_p}^p with the accounting every algorithm reports.
struct SchattenEstimate {
  double value = 0.0;
  int p = 0;
  std::string algorithm;
  std::size_t repetitions = 0;
  std::uint64_t seed = 0;
  std::size_t t = 0;
  std::size_t sketch_cells = 0;
  std::size_t updates = 0;
  std::size_t cells_touched = 0;
  Aggregate aggregate = Aggregate::Mean;

  // Set only by the algorithms they belong to.
  std::optional<int> passes;
  std::optional<std::size_t> sample_budget;  // T
  std::optional<std::size_t> heavy_b_rows;   // |K|
  std::optional<std::size_t> heavy_a_rows;   // |V|
  std::optional<std::size_t> live_cells;

  /// 64-bit words per sketch cell; the bit budget is reported, not enforced.
  std::size_t estimated_bits() const noexcept { return sketch_cells * 64; }
};

}  // namespace schatten
