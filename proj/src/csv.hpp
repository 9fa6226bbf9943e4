// Copyright 2026 The GameStock Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Minimal comma-separated reader shared by the loaders. No quoting support:
// none of the formats we read contain embedded commas.

#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "gamestock/common.hpp"

namespace gamestock::csv {

class Reader {
 public:
  explicit Reader(const std::string& path) : path_(path), in_(path) {
    if (!in_) throw Error("cannot open '" + path + "'");
  }

  // Reads the header and checks it against the expected column list.
  void expect_header(const std::vector<std::string_view>& columns) {
    std::vector<std::string_view> got;
    if (!next(got)) throw ParseError(path_, 1, "empty file");
    if (got.size() != columns.size()) {
      throw ParseError(path_, line_, "expected " + std::to_string(columns.size()) +
                                         " columns in header, got " +
                                         std::to_string(got.size()));
    }
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (got[i] != columns[i]) {
        throw ParseError(path_, line_, "header column " + std::to_string(i + 1) +
                                           " is '" + std::string(got[i]) +
                                           "', expected '" + std::string(columns[i]) + "'");
      }
    }
  }

  // Splits the next non-empty line into fields. Views stay valid until the
  // following call.
  bool next(std::vector<std::string_view>& fields) {
    while (std::getline(in_, buffer_)) {
      ++line_;
      if (!buffer_.empty() && buffer_.back() == '\r') buffer_.pop_back();
      if (buffer_.empty()) continue;
      fields.clear();
      std::string_view rest(buffer_);
      for (;;) {
        auto comma = rest.find(',');
        fields.push_back(rest.substr(0, comma));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
      }
      return true;
    }
    return false;
  }

  std::size_t line() const { return line_; }
  const std::string& path() const { return path_; }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(path_, line_, what);
  }

  double to_double(std::string_view s) const {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
      fail("bad number '" + std::string(s) + "'");
    }
    return v;
  }

  int to_int(std::string_view s) const {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
      fail("bad integer '" + std::string(s) + "'");
    }
    return v;
  }

  Date to_date(std::string_view s) const {
    try {
      return Date::parse(s);
    } catch (const Error& e) {
      fail(e.what());
    }
  }

 private:
  std::string path_;
  std::ifstream in_;
  std::string buffer_;
  std::size_t line_ = 0;
};

// Shortest representation that parses back to the same double.
inline std::string format(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace gamestock::csv
