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

// Cross-sectional information coefficients.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gamestock/common.hpp"

namespace gamestock {

// Fewer valid stocks than this leaves a day undefined.
inline constexpr int kMinStocksPerDay = 3;

// Pearson correlation over pairs where both values are finite. nullopt when
// fewer than kMinStocksPerDay pairs remain or either side has zero variance.
// The result does not depend on the order of the pairs.
std::optional<double> daily_ic(std::span<const double> pred, std::span<const double> actual);

// Pearson correlation of midranks (ties share their average rank).
std::optional<double> daily_rank_ic(std::span<const double> pred, std::span<const double> actual);

// 1-based average ranks.
std::vector<double> midranks(std::span<const double> values);

// mean / sample standard deviation. nullopt with fewer than two values or a
// zero standard deviation.
std::optional<double> icir(std::span<const double> series);

// Scores (or labels) for a block of days: values(d, i) for dates[d] and
// stocks[i]; NaN where absent.
struct PredictionTable {
  std::vector<std::string> stocks;
  std::vector<Date> dates;
  Matrix values;

  void write_csv(const std::string& path) const;  // date,stock_id,score
  static PredictionTable read_csv(const std::string& path);
};

struct DailyICSeries {
  std::vector<Date> dates;
  std::vector<double> ic;
  std::vector<double> rank_ic;
  std::vector<int> counts;
  std::vector<Date> excluded;
};

struct EvaluationReport {
  double ic = 0.0;
  double rank_ic = 0.0;
  std::optional<double> icir;
  std::optional<double> rank_icir;
  DailyICSeries daily;

  std::string to_text() const;                    // key=value lines
  void write_daily_csv(const std::string& path) const;  // date,ic,rank_ic,n
};

// Labels must share the prediction table's dates and stocks. Throws Error on
// an empty range or fewer than two valid days.
EvaluationReport evaluate(const PredictionTable& predictions, const PredictionTable& labels);

}  // namespace gamestock
