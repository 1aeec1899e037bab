// Copyright 2026 The schatten-stream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "schatten/core/matrix.hpp"
#include "schatten/error.hpp"
#include "schatten/rng/mix.hpp"

namespace schatten {

enum class StreamMode { Turnstile, Entrywise, RowOrder };

constexpr std::string_view to_string(StreamMode mode) noexcept {
  switch (mode) {
    case StreamMode::Turnstile: return "turnstile";
    case StreamMode::Entrywise: return "entrywise";
    case StreamMode::RowOrder: return "roworder";
  }
  return "turnstile";
}

inline StreamMode parse_stream_mode(std::string_view text) {
  if (text == "turnstile") return StreamMode::Turnstile;
  if (text == "entrywise") return StreamMode::Entrywise;
  if (text == "roworder") return StreamMode::RowOrder;
  fail(ErrorKind::ParseError, "unknown stream mode '" + std::string(text) + "'");
}

/// One stream item (i, j, value). In turnstile mode `value` is an additive
/// delta; in entry-wise and row-order modes it is the final entry value.
struct MatrixUpdate {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;

  bool operator==(const MatrixUpdate&) const = default;
};

/// An in-memory, replayable update sequence with declared dimensions.
/// Replaying is iterating `updates`; it never mutates, so concurrent replays
/// are safe.
struct MatrixStream {
  std::size_t n = 0;
  std::size_t m = 0;
  StreamMode mode = StreamMode::Turnstile;
  std::vector<MatrixUpdate> updates;
  bool replayable = true;

  bool operator==(const MatrixStream&) const = default;
};

namespace detail {

inline void check_index(const MatrixStream& s, const MatrixUpdate& u) {
  if (u.row >= s.n || u.col >= s.m)
    fail(ErrorKind::IndexOutOfRange,
         "update (" + std::to_string(u.row) + "," + std::to_string(u.col) +
             ") outside " + std::to_string(s.n) + "x" + std::to_string(s.m));
}

inline std::uint64_t pair_key(std::size_t row, std::size_t col, std::size_t m) {
  return static_cast<std::uint64_t>(row) * m + col;
}

}  // namespace detail

/// Checks indices, the at-most-once rule for entry-wise and row-order
/// streams, and the (row, col) sort order for row-order streams.
inline void validate(const MatrixStream& s) {
  require(s.n > 0 && s.m > 0, ErrorKind::InvalidParameter,
          "stream dimensions must be positive");
  if (s.mode == StreamMode::Turnstile) {
    for (const auto& u : s.updates) detail::check_index(s, u);
    return;
  }
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(s.updates.size());
  const MatrixUpdate* prev = nullptr;
  for (const auto& u : s.updates) {
    detail::check_index(s, u);
    if (!seen.insert(detail::pair_key(u.row, u.col, s.m)).second)
      fail(ErrorKind::DuplicateEntry, "entry (" + std::to_string(u.row) + "," +
                                          std::to_string(u.col) +
                                          ") appears more than once");
    if (s.mode == StreamMode::RowOrder && prev != nullptr &&
        std::pair(prev->row, prev->col) > std::pair(u.row, u.col))
      fail(ErrorKind::ModeMismatch,
           "row-order stream not sorted at (" + std::to_string(u.row) + "," +
               std::to_string(u.col) + ")");
    prev = &u;
  }
}

inline DenseMatrix materialize(const MatrixStream& s) {
  validate(s);
  DenseMatrix a(s.n, s.m);
  for (const auto& u : s.updates) {
    if (s.mode == StreamMode::Turnstile)
      a(u.row, u.col) += u.value;
    else
      a(u.row, u.col) = u.value;
  }
  return a;
}

/// Stream of the nonzero entries of `a`, row-major, in the requested mode.
inline MatrixStream to_stream(const DenseMatrix& a,
                              StreamMode mode = StreamMode::RowOrder) {
  MatrixStream s{a.rows(), a.cols(), mode, {}, true};
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (a(i, j) != 0.0) s.updates.push_back({i, j, a(i, j)});
  return s;
}

/// 64-bit content hash over dimensions, mode and the exact update bits.
inline std::uint64_t content_hash(const MatrixStream& s) {
  using rng::mix64;
  std::uint64_t h = mix64(s.n) ^ mix64(s.m + 1) ^ mix64(
      static_cast<std::uint64_t>(s.mode) + 2);
  for (const auto& u : s.updates) {
    h = mix64(h ^ u.row);
    h = mix64(h ^ u.col);
    h = mix64(h ^ std::bit_cast<std::uint64_t>(u.value));
  }
  return h;
}

/// One sparse row of a row-order stream.
struct SparseEntry {
  std::size_t col = 0;
  double value = 0.0;
};

/// Calls fn(row_index, span<const SparseEntry>) once per row that has at
/// least one entry, in order. Holds one row in memory at a time.
template <typename Fn>
void for_each_row(const MatrixStream& s, Fn&& fn) {
  require(s.mode == StreamMode::RowOrder, ErrorKind::ModeMismatch,
          "row iteration requires a row-order stream");
  std::vector<SparseEntry> row;
  std::size_t current = 0;
  bool open = false;
  const MatrixUpdate* prev = nullptr;
  for (const auto& u : s.updates) {
    detail::check_index(s, u);
    if (prev != nullptr &&
        std::pair(prev->row, prev->col) >= std::pair(u.row, u.col))
      fail(ErrorKind::ModeMismatch, "row-order stream not strictly sorted at (" +
                                        std::to_string(u.row) + "," +
                                        std::to_string(u.col) + ")");
    prev = &u;
    if (open && u.row != current) {
      fn(current, std::span<const SparseEntry>(row));
      row.clear();
    }
    current = u.row;
    open = true;
    row.push_back({u.col, u.value});
  }
  if (open) fn(current, std::span<const SparseEntry>(row));
}

/// Emits the turnstile updates of row^T row: one update per ordered pair of
/// nonzero entries.
template <typename Fn>
void for_each_outer_product(std::span<const SparseEntry> row, Fn&& fn) {
  for (const auto& a : row) {
    if (a.value == 0.0) continue;
    for (const auto& b : row) {
      if (b.value == 0.0) continue;
      fn(MatrixUpdate{a.col, b.col, a.value * b.value});
    }
  }
}

/// Lazily expands a row-order stream of A into the turnstile updates of
/// B = A^T A, calling fn(MatrixUpdate) for each.
template <typename Fn>
void for_each_gram_update(const MatrixStream& row_stream, Fn&& fn) {
  for_each_row(row_stream, [&](std::size_t, std::span<const SparseEntry> row) {
    for_each_outer_product(row, fn);
  });
}

/// The m x m turnstile stream whose materialization is A^T A.
inline MatrixStream gram_stream(const MatrixStream& row_stream) {
  require(row_stream.mode == StreamMode::RowOrder, ErrorKind::ModeMismatch,
          "gram_stream requires a row-order stream");
  MatrixStream out{row_stream.m, row_stream.m, StreamMode::Turnstile, {},
                   row_stream.replayable};
  for_each_gram_update(row_stream,
                       [&](const MatrixUpdate& u) { out.updates.push_back(u); });
  return out;
}

}  // namespace schatten
