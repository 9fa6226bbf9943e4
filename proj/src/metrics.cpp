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

#include "gamestock/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <utility>

#include "csv.hpp"

namespace gamestock {

namespace {

using Pairs = std::vector<std::pair<double, double>>;

Pairs finite_pairs(std::span<const double> pred, std::span<const double> actual) {
  if (pred.size() != actual.size()) throw Error("prediction and label vectors differ in length");
  Pairs out;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (std::isfinite(pred[i]) && std::isfinite(actual[i])) out.emplace_back(pred[i], actual[i]);
  }
  // Canonical order makes every sum below independent of the input order.
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<double> pearson(const Pairs& pairs) {
  const auto n = static_cast<double>(pairs.size());
  if (pairs.size() < static_cast<std::size_t>(kMinStocksPerDay)) return std::nullopt;
  double mx = 0.0;
  double my = 0.0;
  for (const auto& [x, y] : pairs) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (const auto& [x, y] : pairs) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
    syy += (y - my) * (y - my);
  }
  const auto [lox, hix] = std::minmax_element(pairs.begin(), pairs.end());
  const auto [loy, hiy] = std::minmax_element(
      pairs.begin(), pairs.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
  // Rounding in the mean leaves a tiny positive sum for constant inputs.
  if (lox->first == hix->first || loy->second == hiy->second) return std::nullopt;
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace

std::vector<double> midranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> daily_ic(std::span<const double> pred, std::span<const double> actual) {
  return pearson(finite_pairs(pred, actual));
}

std::optional<double> daily_rank_ic(std::span<const double> pred, std::span<const double> actual) {
  const auto pairs = finite_pairs(pred, actual);
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& [a, b] : pairs) {
    x.push_back(a);
    y.push_back(b);
  }
  const auto rx = midranks(x);
  const auto ry = midranks(y);
  Pairs ranked;
  for (std::size_t i = 0; i < rx.size(); ++i) ranked.emplace_back(rx[i], ry[i]);
  std::sort(ranked.begin(), ranked.end());
  return pearson(ranked);
}

std::optional<double> icir(std::span<const double> series) {
  if (series.size() < 2) return std::nullopt;
  const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
  if (*lo == *hi) return std::nullopt;
  const double n = static_cast<double>(series.size());
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : series) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  if (!(sd > 0.0)) return std::nullopt;
  return mean / sd;
}

void PredictionTable::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << "date,stock_id,score\n";
  for (std::size_t d = 0; d < dates.size(); ++d) {
    const auto date = dates[d].str();
    for (std::size_t i = 0; i < stocks.size(); ++i) {
      const double v = values(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(i));
      if (!std::isfinite(v)) continue;
      out << date << ',' << stocks[i] << ',' << csv::format(v) << '\n';
    }
  }
}

PredictionTable PredictionTable::read_csv(const std::string& path) {
  csv::Reader reader(path);
  reader.expect_header({"date", "stock_id", "score"});
  std::map<Date, std::map<std::string, double>> rows;
  std::map<std::string, int> stock_set;
  std::vector<std::string_view> f;
  while (reader.next(f)) {
    if (f.size() != 3) reader.fail("expected 3 fields");
    const auto date = reader.to_date(f[0]);
    std::string stock(f[1]);
    if (!rows[date].emplace(stock, reader.to_double(f[2])).second) reader.fail("duplicate row");
    stock_set[stock] = 0;
  }
  PredictionTable t;
  for (const auto& [s, unused] : stock_set) t.stocks.push_back(s);
  for (const auto& [d, unused] : rows) t.dates.push_back(d);
  t.values = Matrix::Constant(static_cast<Eigen::Index>(t.dates.size()),
                              static_cast<Eigen::Index>(t.stocks.size()),
                              std::numeric_limits<double>::quiet_NaN());
  Eigen::Index d = 0;
  for (const auto& [date, per_stock] : rows) {
    for (const auto& [s, v] : per_stock) {
      auto it = std::lower_bound(t.stocks.begin(), t.stocks.end(), s);
      t.values(d, it - t.stocks.begin()) = v;
    }
    ++d;
  }
  return t;
}

EvaluationReport evaluate(const PredictionTable& predictions, const PredictionTable& labels) {
  if (predictions.dates.empty()) throw Error("evaluation range is empty");
  if (predictions.dates != labels.dates || predictions.stocks != labels.stocks ||
      predictions.values.rows() != labels.values.rows() ||
      predictions.values.cols() != labels.values.cols()) {
    throw Error("predictions and labels are not aligned");
  }
  EvaluationReport report;
  const auto n = predictions.values.cols();
  std::vector<double> p(static_cast<std::size_t>(n));
  std::vector<double> y(static_cast<std::size_t>(n));
  for (std::size_t d = 0; d < predictions.dates.size(); ++d) {
    int count = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      p[static_cast<std::size_t>(i)] = predictions.values(static_cast<Eigen::Index>(d), i);
      y[static_cast<std::size_t>(i)] = labels.values(static_cast<Eigen::Index>(d), i);
      if (std::isfinite(p[static_cast<std::size_t>(i)]) && std::isfinite(y[static_cast<std::size_t>(i)])) {
        ++count;
      }
    }
    auto ic = daily_ic(p, y);
    auto ric = daily_rank_ic(p, y);
    if (!ic || !ric) {
      report.daily.excluded.push_back(predictions.dates[d]);
      continue;
    }
    report.daily.dates.push_back(predictions.dates[d]);
    report.daily.ic.push_back(*ic);
    report.daily.rank_ic.push_back(*ric);
    report.daily.counts.push_back(count);
  }
  if (report.daily.ic.size() < 2) {
    throw Error("evaluation needs at least two valid days, got " +
                std::to_string(report.daily.ic.size()));
  }
  const double days = static_cast<double>(report.daily.ic.size());
  report.ic = std::accumulate(report.daily.ic.begin(), report.daily.ic.end(), 0.0) / days;
  report.rank_ic =
      std::accumulate(report.daily.rank_ic.begin(), report.daily.rank_ic.end(), 0.0) / days;
  report.icir = icir(report.daily.ic);
  report.rank_icir = icir(report.daily.rank_ic);
  return report;
}

std::string EvaluationReport::to_text() const {
  std::ostringstream out;
  auto opt = [](const std::optional<double>& v) { return v ? csv::format(*v) : std::string("undefined"); };
  out << "IC=" << csv::format(ic) << '\n'
      << "RankIC=" << csv::format(rank_ic) << '\n'
      << "ICIR=" << opt(icir) << '\n'
      << "RankICIR=" << opt(rank_icir) << '\n'
      << "days=" << daily.ic.size() << '\n'
      << "excluded_days=" << daily.excluded.size() << '\n';
  if (!daily.excluded.empty()) {
    out << "excluded=";
    for (std::size_t i = 0; i < daily.excluded.size(); ++i) {
      out << (i ? ";" : "") << daily.excluded[i].str();
    }
    out << '\n';
  }
  return out.str();
}

void EvaluationReport::write_daily_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << "date,ic,rank_ic,n\n";
  for (std::size_t d = 0; d < daily.dates.size(); ++d) {
    out << daily.dates[d].str() << ',' << csv::format(daily.ic[d]) << ','
        << csv::format(daily.rank_ic[d]) << ',' << daily.counts[d] << '\n';
  }
}

}  // namespace gamestock
