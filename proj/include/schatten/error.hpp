// Copyright 2026 The schatten-stream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace schatten {

enum class ErrorKind {
  InvalidParameter,
  DuplicateEntry,
  IndexOutOfRange,
  NoConvergence,
  ShapeMismatch,
  ModeMismatch,
  KindMismatch,
  RequiresPSD,
  StreamDrift,
  PassOverflow,
  NotFinalized,
  UnsupportedP,
  SparsityExceeded,
  ParseError,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::DuplicateEntry: return "DuplicateEntry";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::ModeMismatch: return "ModeMismatch";
    case ErrorKind::KindMismatch: return "KindMismatch";
    case ErrorKind::RequiresPSD: return "RequiresPSD";
    case ErrorKind::StreamDrift: return "StreamDrift";
    case ErrorKind::PassOverflow: return "PassOverflow";
    case ErrorKind::NotFinalized: return "NotFinalized";
    case ErrorKind::UnsupportedP: return "UnsupportedP";
    case ErrorKind::SparsityExceeded: return "SparsityExceeded";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Single exception type for the library; `kind()` carries the category.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace schatten
