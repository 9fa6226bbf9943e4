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

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gamestock/common.hpp"

namespace gamestock {

enum Channel : int {
  kOpen = 0,
  kHigh,
  kLow,
  kClose,
  kVolume,
  kMa5,
  kMa10,
  kMa20,
  kMa30,
};
inline constexpr int kNumChannels = 9;
inline constexpr std::array<std::string_view, kNumChannels> kChannelNames = {
    "open", "high", "low", "close", "volume", "ma5", "ma10", "ma20", "ma30"};

// Retained stocks must be observed on at least this fraction of the calendar.
inline constexpr double kMinPresence = 0.95;

// Per-stock, per-day indicator panel. values[c](i, t) is channel c of stock i
// on dates[t]. Entries that were absent from the source are forward-filled
// (back-filled before a stock's first observation) and marked in `observed`.
struct StockPanel {
  std::vector<std::string> stocks;
  std::vector<Date> dates;
  std::array<Matrix, kNumChannels> values;
  Mask observed;
  // Unstandardized closes, carried through standardization so labels are
  // always computed on raw prices.
  Matrix raw_close;
  bool standardized = false;
  Warnings warnings;

  Eigen::Index num_stocks() const { return static_cast<Eigen::Index>(stocks.size()); }
  Eigen::Index num_days() const { return static_cast<Eigen::Index>(dates.size()); }
  double at(Eigen::Index stock, Eigen::Index day, Channel c) const {
    return values[c](stock, day);
  }

  std::optional<Eigen::Index> day_index(const Date& d) const;
  std::optional<Eigen::Index> stock_index(std::string_view id) const;

  // Throws Error when an invariant is broken.
  void validate() const;
};

struct SplitSpec {
  DateRange train;
  DateRange valid;
  DateRange test;

  void validate() const;  // disjoint and train < valid < test
};

// Per-stock per-channel train-range statistics, N x D each.
struct StandardizationStats {
  Matrix mean;
  Matrix stddev;
};

inline constexpr double kStdFloor = 1e-8;

// Trailing window of L trading days ending at `anchor` for every stock.
struct WindowBatch {
  Eigen::Index anchor = 0;         // index into the panel calendar
  std::vector<Matrix> windows;     // N entries of L x D, oldest row first
  std::vector<bool> label_available;
};

struct LabelVector {
  Vector y;                        // NaN where unavailable
  std::vector<bool> available;
};

StockPanel load_panel(const std::string& path);
void write_panel(const StockPanel& panel, const std::string& path);

// Builds a panel from in-memory rows, applying the same presence filter and
// gap filling as load_panel. Used by the loader and the generator.
struct PanelRow {
  Date date;
  std::string stock;
  std::array<double, kNumChannels> values;
};
StockPanel assemble_panel(const std::vector<PanelRow>& rows);

StandardizationStats fit_standardization(const StockPanel& panel, const SplitSpec& split,
                                         Warnings* warnings = nullptr);
StockPanel apply_standardization(const StockPanel& panel, const StandardizationStats& stats);
StockPanel standardize(const StockPanel& panel, const SplitSpec& split);

WindowBatch make_window(const StockPanel& panel, Eigen::Index lookback, Eigen::Index anchor);
std::vector<WindowBatch> make_windows(const StockPanel& panel, Eigen::Index lookback);

// Shifts every price channel (all but volume) of each window so its anchor
// row is zero; standardized levels drift between splits, moves within a
// window do not.
void anchor_windows(WindowBatch& batch);

// Uses raw_close, so the result is the same for raw and standardized panels.
LabelVector compute_labels(const StockPanel& panel, Eigen::Index anchor);
LabelVector compute_labels(const StockPanel& panel, const Date& anchor);

// Calendar indices of the anchors whose dates fall in `range`, restricted to
// anchors with a full lookback window and a next-day label.
std::vector<Eigen::Index> anchors_in(const StockPanel& panel, const DateRange& range,
                                     Eigen::Index lookback);

}  // namespace gamestock
