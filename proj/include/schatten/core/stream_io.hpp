// Copyright 2026 The schatten-stream Authors
// SPDX-License-Identifier: Apache-2.0

// Text stream format, version 1:
//
//   schatten-stream v1 n=<int> m=<int> mode=<turnstile|entrywise|roworder>
//   <row> <col> <value>
//   ...
//
// Values are written in shortest round-trip decimal. Lines starting with '#'
// are comments. Row-order files must be sorted by (row, col).

#pragma once

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "schatten/core/stream.hpp"
#include "schatten/error.hpp"

namespace schatten {

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline void write_stream(std::ostream& out, const MatrixStream& s) {
  out << "schatten-stream v1 n=" << s.n << " m=" << s.m
      << " mode=" << to_string(s.mode) << '\n';
  for (const auto& u : s.updates)
    out << u.row << ' ' << u.col << ' ' << format_double(u.value) << '\n';
}

inline std::string write_stream_string(const MatrixStream& s) {
  std::ostringstream out;
  write_stream(out, s);
  return out.str();
}

namespace detail {

[[noreturn]] inline void parse_fail(std::size_t line_no, const std::string& why) {
  fail(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": " + why);
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

inline std::size_t parse_dim(std::string_view tok, std::string_view key,
                             std::size_t line_no) {
  if (tok.substr(0, key.size()) != key)
    parse_fail(line_no, "expected '" + std::string(key) + "<int>' in header");
  std::size_t v = 0;
  if (!parse_number(tok.substr(key.size()), v) || v == 0)
    parse_fail(line_no, "bad dimension '" + std::string(tok) + "'");
  return v;
}

}  // namespace detail

/// Parses a v1 stream. Throws Error(ParseError) naming the offending line,
/// and runs validate() so index, duplicate and ordering violations surface
/// here as well.
inline MatrixStream read_stream(std::istream& in) {
  using detail::parse_fail;
  std::string line;
  std::size_t line_no = 0;
  MatrixStream s;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!have_header) {
      auto tok = detail::split_ws(line);
      if (tok.size() != 5 || tok[0] != "schatten-stream" || tok[1] != "v1")
        parse_fail(line_no, "malformed header, expected 'schatten-stream v1 "
                            "n=<int> m=<int> mode=<mode>'");
      s.n = detail::parse_dim(tok[2], "n=", line_no);
      s.m = detail::parse_dim(tok[3], "m=", line_no);
      if (tok[4].substr(0, 5) != "mode=")
        parse_fail(line_no, "expected 'mode=<mode>' in header");
      try {
        s.mode = parse_stream_mode(tok[4].substr(5));
      } catch (const Error&) {
        parse_fail(line_no, "unknown mode '" + std::string(tok[4].substr(5)) + "'");
      }
      have_header = true;
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    auto tok = detail::split_ws(line);
    if (tok.empty()) continue;
    if (tok.size() != 3) parse_fail(line_no, "expected '<row> <col> <value>'");
    MatrixUpdate u;
    if (!detail::parse_number(tok[0], u.row) ||
        !detail::parse_number(tok[1], u.col) ||
        !detail::parse_number(tok[2], u.value))
      parse_fail(line_no, "cannot parse '" + line + "'");
    if (u.row >= s.n || u.col >= s.m)
      parse_fail(line_no, "index out of range");
    s.updates.push_back(u);
  }
  if (!have_header) parse_fail(line_no + 1, "missing header");
  s.replayable = true;
  validate(s);
  return s;
}

inline MatrixStream read_stream_string(const std::string& text) {
  std::istringstream in(text);
  return read_stream(in);
}

inline MatrixStream read_stream_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ParseError, "cannot open '" + path + "'");
  return read_stream(in);
}

inline void write_stream_file(const std::string& path, const MatrixStream& s) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::InvalidParameter, "cannot write '" + path + "'");
  write_stream(out, s);
}

}  // namespace schatten
