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

#include "gamestock/market_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <utility>

#include "csv.hpp"

namespace gamestock {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string_view> panel_columns() {
  std::vector<std::string_view> cols = {"date", "stock_id"};
  cols.insert(cols.end(), kChannelNames.begin(), kChannelNames.end());
  return cols;
}

}  // namespace

std::optional<Eigen::Index> StockPanel::day_index(const Date& d) const {
  auto it = std::lower_bound(dates.begin(), dates.end(), d);
  if (it == dates.end() || *it != d) return std::nullopt;
  return static_cast<Eigen::Index>(it - dates.begin());
}

std::optional<Eigen::Index> StockPanel::stock_index(std::string_view id) const {
  for (std::size_t i = 0; i < stocks.size(); ++i) {
    if (stocks[i] == id) return static_cast<Eigen::Index>(i);
  }
  return std::nullopt;
}

void StockPanel::validate() const {
  for (std::size_t t = 1; t < dates.size(); ++t) {
    if (!(dates[t - 1] < dates[t])) throw Error("panel dates not strictly increasing");
  }
  std::set<std::string> seen(stocks.begin(), stocks.end());
  if (seen.size() != stocks.size()) throw Error("duplicate stock identifier in panel");
  const auto n = num_stocks();
  const auto t = num_days();
  for (const auto& m : values) {
    if (m.rows() != n || m.cols() != t) throw Error("panel channel has wrong shape");
  }
  if (observed.rows() != n || observed.cols() != t) throw Error("panel mask has wrong shape");
  if (raw_close.rows() != n || raw_close.cols() != t) throw Error("panel raw_close has wrong shape");
}

void SplitSpec::validate() const {
  for (const auto* r : {&train, &valid, &test}) {
    if (r->end < r->start) throw Error("split range ends before it starts");
  }
  if (!(train.end < valid.start) || !(valid.end < test.start)) {
    throw Error("split ranges must be disjoint and ordered train < valid < test");
  }
}

StockPanel assemble_panel(const std::vector<PanelRow>& rows) {
  if (rows.empty()) throw Error("panel has no rows");

  std::set<Date> date_set;
  std::map<std::string, std::size_t> per_stock;
  for (const auto& r : rows) {
    date_set.insert(r.date);
    ++per_stock[r.stock];
  }

  StockPanel panel;
  panel.dates.assign(date_set.begin(), date_set.end());
  const auto num_days = panel.dates.size();
  for (const auto& [id, count] : per_stock) {
    const double presence = static_cast<double>(count) / static_cast<double>(num_days);
    if (presence + 1e-12 < kMinPresence) {
      panel.warnings.push_back("dropped stock " + id + ": present on " + std::to_string(count) +
                               " of " + std::to_string(num_days) + " trading days");
      continue;
    }
    panel.stocks.push_back(id);
  }
  if (panel.stocks.empty()) throw Error("no stock passes the presence filter");

  std::map<std::string, Eigen::Index> stock_row;
  for (std::size_t i = 0; i < panel.stocks.size(); ++i) {
    stock_row[panel.stocks[i]] = static_cast<Eigen::Index>(i);
  }

  const auto n = panel.num_stocks();
  const auto t_total = panel.num_days();
  for (auto& m : panel.values) m = Matrix::Constant(n, t_total, kNaN);
  panel.observed = Mask::Constant(n, t_total, false);

  for (const auto& r : rows) {
    auto it = stock_row.find(r.stock);
    if (it == stock_row.end()) continue;
    const auto t = *panel.day_index(r.date);
    if (panel.observed(it->second, t)) {
      throw Error("duplicate row for stock " + r.stock + " on " + r.date.str());
    }
    panel.observed(it->second, t) = true;
    for (int c = 0; c < kNumChannels; ++c) panel.values[c](it->second, t) = r.values[c];
  }

  // Forward-fill gaps; leading gaps take the first observed value.
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index first = 0;
    while (!panel.observed(i, first)) ++first;
    for (int c = 0; c < kNumChannels; ++c) {
      auto& m = panel.values[c];
      for (Eigen::Index t = 0; t < first; ++t) m(i, t) = m(i, first);
      for (Eigen::Index t = first + 1; t < t_total; ++t) {
        if (!panel.observed(i, t)) m(i, t) = m(i, t - 1);
      }
    }
  }
  panel.raw_close = panel.values[kClose];
  return panel;
}

StockPanel load_panel(const std::string& path) {
  csv::Reader reader(path);
  reader.expect_header(panel_columns());

  std::vector<PanelRow> rows;
  std::map<std::pair<std::string, Date>, std::size_t> seen;
  std::vector<std::string_view> f;
  while (reader.next(f)) {
    if (f.size() != 2 + kNumChannels) {
      reader.fail("expected " + std::to_string(2 + kNumChannels) + " fields, got " +
                  std::to_string(f.size()));
    }
    PanelRow row;
    row.date = reader.to_date(f[0]);
    row.stock = std::string(f[1]);
    if (row.stock.empty()) reader.fail("empty stock_id");
    for (int c = 0; c < kNumChannels; ++c) {
      row.values[c] = reader.to_double(f[2 + c]);
      if (!std::isfinite(row.values[c])) reader.fail("non-finite value");
    }
    auto [it, inserted] = seen.emplace(std::make_pair(row.stock, row.date), reader.line());
    if (!inserted) {
      reader.fail("duplicate row for (" + row.date.str() + ", " + row.stock +
                  "), first seen on line " + std::to_string(it->second));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(path, reader.line(), "panel file has no data rows");
  return assemble_panel(rows);
}

void write_panel(const StockPanel& panel, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << "date,stock_id";
  for (auto name : kChannelNames) out << ',' << name;
  out << '\n';
  for (Eigen::Index t = 0; t < panel.num_days(); ++t) {
    const auto date = panel.dates[t].str();
    for (Eigen::Index i = 0; i < panel.num_stocks(); ++i) {
      if (!panel.observed(i, t)) continue;
      out << date << ',' << panel.stocks[i];
      for (int c = 0; c < kNumChannels; ++c) out << ',' << csv::format(panel.values[c](i, t));
      out << '\n';
    }
  }
}

StandardizationStats fit_standardization(const StockPanel& panel, const SplitSpec& split,
                                         Warnings* warnings) {
  const auto n = panel.num_stocks();
  std::vector<Eigen::Index> train_days;
  for (Eigen::Index t = 0; t < panel.num_days(); ++t) {
    if (split.train.contains(panel.dates[t])) train_days.push_back(t);
  }
  if (train_days.empty()) throw Error("train range contains no trading days");

  StandardizationStats stats{Matrix::Zero(n, kNumChannels), Matrix::Ones(n, kNumChannels)};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int c = 0; c < kNumChannels; ++c) {
      double sum = 0.0;
      double count = 0.0;
      for (auto t : train_days) {
        if (!panel.observed(i, t)) continue;
        sum += panel.values[c](i, t);
        count += 1.0;
      }
      if (count == 0.0) {
        if (warnings) warnings->push_back("stock " + panel.stocks[i] + " unobserved in train range");
        continue;
      }
      const double mean = sum / count;
      double ss = 0.0;
      for (auto t : train_days) {
        if (!panel.observed(i, t)) continue;
        const double d = panel.values[c](i, t) - mean;
        ss += d * d;
      }
      double sd = std::sqrt(ss / count);
      if (sd < kStdFloor) {
        if (warnings) {
          warnings->push_back("zero-variance channel " + std::string(kChannelNames[c]) +
                              " for stock " + panel.stocks[i]);
        }
        sd = kStdFloor;
      }
      stats.mean(i, c) = mean;
      stats.stddev(i, c) = sd;
    }
  }
  return stats;
}

StockPanel apply_standardization(const StockPanel& panel, const StandardizationStats& stats) {
  if (stats.mean.rows() != panel.num_stocks() || stats.mean.cols() != kNumChannels) {
    throw Error("standardization statistics do not match the panel");
  }
  StockPanel out = panel;
  for (int c = 0; c < kNumChannels; ++c) {
    out.values[c] = ((panel.values[c].colwise() - stats.mean.col(c)).array().colwise() /
                     stats.stddev.col(c).array())
                        .matrix();
  }
  out.standardized = true;
  return out;
}

StockPanel standardize(const StockPanel& panel, const SplitSpec& split) {
  Warnings w;
  auto stats = fit_standardization(panel, split, &w);
  auto out = apply_standardization(panel, stats);
  out.warnings.insert(out.warnings.end(), w.begin(), w.end());
  return out;
}

WindowBatch make_window(const StockPanel& panel, Eigen::Index lookback, Eigen::Index anchor) {
  if (lookback < 1) throw Error("lookback must be positive");
  if (anchor < lookback - 1 || anchor + 1 >= panel.num_days()) {
    throw Error("anchor " + std::to_string(anchor) + " has no full window and next-day label");
  }
  WindowBatch batch;
  batch.anchor = anchor;
  const auto n = panel.num_stocks();
  batch.windows.reserve(static_cast<std::size_t>(n));
  batch.label_available.resize(static_cast<std::size_t>(n));
  const auto first = anchor - lookback + 1;
  for (Eigen::Index i = 0; i < n; ++i) {
    Matrix w(lookback, kNumChannels);
    for (int c = 0; c < kNumChannels; ++c) {
      w.col(c) = panel.values[c].row(i).segment(first, lookback).transpose();
    }
    batch.windows.push_back(std::move(w));
    batch.label_available[static_cast<std::size_t>(i)] =
        panel.observed(i, anchor) && panel.observed(i, anchor + 1);
  }
  return batch;
}

void anchor_windows(WindowBatch& batch) {
  for (auto& w : batch.windows) {
    if (w.cols() != kNumChannels) throw Error("anchor_windows expects panel windows");
    for (int c = 0; c < kNumChannels; ++c) {
      if (c == kVolume) continue;
      w.col(c).array() -= w(w.rows() - 1, c);
    }
  }
}

std::vector<WindowBatch> make_windows(const StockPanel& panel, Eigen::Index lookback) {
  if (lookback < 1 || lookback > panel.num_days() - 1) {
    throw Error("lookback " + std::to_string(lookback) + " needs at least " +
                std::to_string(lookback + 1) + " trading days, panel has " +
                std::to_string(panel.num_days()));
  }
  std::vector<WindowBatch> out;
  for (Eigen::Index t = lookback - 1; t <= panel.num_days() - 2; ++t) {
    out.push_back(make_window(panel, lookback, t));
  }
  return out;
}

LabelVector compute_labels(const StockPanel& panel, Eigen::Index anchor) {
  if (anchor < 0 || anchor + 1 >= panel.num_days()) {
    throw Error("anchor " + std::to_string(anchor) + " has no following trading day");
  }
  const auto n = panel.num_stocks();
  LabelVector out{Vector::Constant(n, kNaN), std::vector<bool>(static_cast<std::size_t>(n))};
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!panel.observed(i, anchor) || !panel.observed(i, anchor + 1)) continue;
    const double y = panel.raw_close(i, anchor + 1) / panel.raw_close(i, anchor) - 1.0;
    if (!std::isfinite(y)) continue;
    out.y(i) = y;
    out.available[static_cast<std::size_t>(i)] = true;
  }
  return out;
}

LabelVector compute_labels(const StockPanel& panel, const Date& anchor) {
  auto t = panel.day_index(anchor);
  if (!t) throw Error("anchor " + anchor.str() + " is not a trading day");
  return compute_labels(panel, *t);
}

std::vector<Eigen::Index> anchors_in(const StockPanel& panel, const DateRange& range,
                                     Eigen::Index lookback) {
  std::vector<Eigen::Index> out;
  for (Eigen::Index t = lookback - 1; t + 1 < panel.num_days(); ++t) {
    if (range.contains(panel.dates[t])) out.push_back(t);
  }
  return out;
}

}  // namespace gamestock
