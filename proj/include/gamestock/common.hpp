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

#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace gamestock {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Base class for every recoverable failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file. Carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Calendar date without time zone. Only ordering and formatting are needed;
// trading calendars are derived from the data itself.
struct Date {
  int year = 1970;
  int month = 1;
  int day = 1;

  static Date parse(std::string_view text);  // YYYY-MM-DD, throws Error
  std::string str() const;

  // Days since 1970-01-01 (proleptic Gregorian).
  std::int64_t serial() const;
  static Date from_serial(std::int64_t days);

  auto operator<=>(const Date&) const = default;
};

struct DateRange {
  Date start;
  Date end;  // inclusive
  bool contains(const Date& d) const { return start <= d && d <= end; }
};

// Warnings accumulate alongside results instead of going to a global logger.
using Warnings = std::vector<std::string>;

}  // namespace gamestock
