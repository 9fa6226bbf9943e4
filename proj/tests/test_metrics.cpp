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
#include <limits>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace gamestock {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Two-pass Pearson on the finite pairs.
double reference_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> a, b;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::isfinite(x[i]) && std::isfinite(y[i])) {
      a.push_back(x[i]);
      b.push_back(y[i]);
    }
  }
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

// Quadratic midrank: 1 + #less + (#equal - 1) / 2.
std::vector<double> reference_ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (double w : v) {
      less += w < v[i];
      equal += w == v[i];
    }
    r[i] = 1.0 + less + (equal - 1.0) / 2.0;
  }
  return r;
}

PredictionTable table(std::vector<std::string> stocks, int days, const Matrix& values) {
  PredictionTable t;
  t.stocks = std::move(stocks);
  for (int d = 0; d < days; ++d) t.dates.push_back(Date::from_serial(Date{2021, 3, 1}.serial() + d));
  t.values = values;
  return t;
}

TEST(DailyIC, HandExamples) {
  const std::vector<double> p = {1, 2, 3};
  EXPECT_NEAR(*daily_ic(p, std::vector<double>{2, 4, 6}), 1.0, 1e-15);
  EXPECT_NEAR(*daily_ic(p, std::vector<double>{3, 2, 1}), -1.0, 1e-15);
  EXPECT_NEAR(*daily_ic(p, std::vector<double>{1, 3, 2}), 0.5, 1e-15);
}

TEST(DailyIC, UndefinedCases) {
  EXPECT_FALSE(daily_ic(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}));
  EXPECT_FALSE(daily_ic(std::vector<double>{1, 2, 3}, std::vector<double>{4, 4, 4}));
  EXPECT_FALSE(daily_ic(std::vector<double>{1, 2}, std::vector<double>{1, 2}));
  EXPECT_FALSE(daily_ic(std::vector<double>{0.1, 0.1, 0.1}, std::vector<double>{1, 2, 3}));
  EXPECT_FALSE(daily_ic(std::vector<double>{1, 2, kNaN, 4}, std::vector<double>{1, 2, 3, kNaN}));
  EXPECT_TRUE(daily_ic(std::vector<double>{1, 2, 5, kNaN}, std::vector<double>{1, 2, 3, 9}));
  EXPECT_THROW(daily_ic(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2}), Error);
}

TEST(DailyIC, MatchesReferenceAndBounds) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u;
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 3 + trial % 40;
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
      x[i] = g(rng);
      y[i] = 0.3 * x[i] + g(rng);
      if (u(rng) < 0.1) x[i] = kNaN;
    }
    const auto ic = daily_ic(x, y);
    if (!ic) continue;
    EXPECT_NEAR(*ic, reference_pearson(x, y), 1e-12);
    EXPECT_LE(std::abs(*ic), 1.0);
    EXPECT_LE(std::abs(*daily_rank_ic(x, y)), 1.0);
  }
}

TEST(DailyIC, AffineAndPermutationInvariance) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x(25), y(25);
    for (int i = 0; i < 25; ++i) {
      x[i] = g(rng);
      y[i] = x[i] + g(rng);
    }
    const double base = *daily_ic(x, y);
    std::vector<double> affine(x);
    for (auto& v : affine) v = 3.7 * v - 12.0;
    EXPECT_NEAR(*daily_ic(affine, y), base, 1e-12);
    std::vector<int> perm(25);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> px(25), py(25);
    for (int i = 0; i < 25; ++i) {
      px[i] = x[perm[i]];
      py[i] = y[perm[i]];
    }
    EXPECT_NEAR(*daily_ic(px, py), base, 1e-12);
    EXPECT_NEAR(*daily_rank_ic(px, py), *daily_rank_ic(x, y), 1e-12);
  }
}

TEST(Midranks, TiesShareAverageRank) {
  EXPECT_EQ(midranks(std::vector<double>{10, 20, 20, 5}), (std::vector<double>{2, 3.5, 3.5, 1}));
  EXPECT_EQ(midranks(std::vector<double>{7, 7, 7}), (std::vector<double>{2, 2, 2}));
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> small(0, 5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(1 + trial % 30);
    for (auto& x : v) x = small(rng);
    EXPECT_EQ(midranks(v), reference_ranks(v));
  }
}

TEST(DailyRankIC, Examples) {
  const std::vector<double> p = {1, 2, 3};
  EXPECT_NEAR(*daily_rank_ic(p, std::vector<double>{1, 3, 2}), 0.5, 1e-15);
  EXPECT_FALSE(daily_rank_ic(p, std::vector<double>{4, 4, 4}));
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  std::vector<double> y(30), mono(30);
  for (int i = 0; i < 30; ++i) {
    y[i] = g(rng);
    mono[i] = std::exp(3.0 * y[i]) + std::pow(y[i], 3);
  }
  EXPECT_EQ(*daily_rank_ic(mono, y), 1.0);
}

TEST(DailyRankIC, MatchesPearsonOfReferenceRanks) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> small(0, 8);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> x(4 + trial % 20), y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = small(rng);
      y[i] = small(rng) + 0.5 * x[i];
    }
    const auto r = daily_rank_ic(x, y);
    if (!r) continue;
    EXPECT_NEAR(*r, reference_pearson(reference_ranks(x), reference_ranks(y)), 1e-12);
    std::vector<double> warped(x);
    for (auto& v : warped) v = std::atan(v) * 5.0 + 1.0;
    EXPECT_EQ(*daily_rank_ic(warped, y), *r);
  }
}

TEST(Icir, Examples) {
  EXPECT_NEAR(*icir(std::vector<double>{0.1, 0.2, 0.3}), 2.0, 1e-12);
  EXPECT_FALSE(icir(std::vector<double>{0.4, 0.4, 0.4}));
  EXPECT_FALSE(icir(std::vector<double>{0.4}));
  EXPECT_EQ(*icir(std::vector<double>{0.25, -0.25}), 0.0);
}

TEST(Evaluate, ReportFromKnownDailyValues) {
  // Three days whose daily ICs are 1, -1 and 0.5.
  Matrix p(3, 3), y(3, 3);
  p << 1, 2, 3, 1, 2, 3, 1, 2, 3;
  y << 2, 4, 6, 3, 2, 1, 1, 3, 2;
  const auto report = evaluate(table({"A", "B", "C"}, 3, p), table({"A", "B", "C"}, 3, y));
  EXPECT_NEAR(report.ic, 0.5 / 3.0, 1e-15);
  const double mean = 0.5 / 3.0;
  const double sd = std::sqrt((std::pow(1 - mean, 2) + std::pow(-1 - mean, 2) + std::pow(0.5 - mean, 2)) / 2.0);
  EXPECT_NEAR(*report.icir, mean / sd, 1e-12);
  EXPECT_NEAR(report.rank_ic, report.ic, 1e-15);
  EXPECT_EQ(report.daily.counts, (std::vector<int>{3, 3, 3}));
}

TEST(Evaluate, PerfectPredictionsAndExclusions) {
  Matrix y(4, 4);
  y << 0.1, -0.2, 0.3, 0.05, 0.0, 0.01, -0.03, 0.2, 0.1, kNaN, kNaN, 0.2, 0.4, 0.3, -0.1, 0.0;
  const auto report = evaluate(table({"A", "B", "C", "D"}, 4, y), table({"A", "B", "C", "D"}, 4, y));
  EXPECT_NEAR(report.ic, 1.0, 1e-15);
  EXPECT_NEAR(report.rank_ic, 1.0, 1e-15);
  EXPECT_FALSE(report.icir);
  ASSERT_EQ(report.daily.excluded.size(), 1u);
  EXPECT_EQ(report.daily.excluded[0], (Date{2021, 3, 3}));
  const std::string text = report.to_text();
  EXPECT_NE(text.find("ICIR=undefined"), std::string::npos);
  EXPECT_NE(text.find("excluded=2021-03-03"), std::string::npos);
}

TEST(Evaluate, StockOrderDoesNotMatter) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  Matrix p(20, 12), y(20, 12);
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    p(i) = g(rng);
    y(i) = p(i) + g(rng);
  }
  std::vector<std::string> names;
  for (int i = 0; i < 12; ++i) names.push_back("S" + std::to_string(i));
  const auto base = evaluate(table(names, 20, p), table(names, 20, y));
  std::vector<int> perm(12);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Matrix pp(20, 12), yy(20, 12);
  std::vector<std::string> pn(12);
  for (int i = 0; i < 12; ++i) {
    pp.col(i) = p.col(perm[i]);
    yy.col(i) = y.col(perm[i]);
    pn[i] = names[perm[i]];
  }
  const auto shuffled = evaluate(table(pn, 20, pp), table(pn, 20, yy));
  EXPECT_NEAR(shuffled.ic, base.ic, 1e-14);
  EXPECT_NEAR(shuffled.rank_ic, base.rank_ic, 1e-14);
  EXPECT_NEAR(*shuffled.icir, *base.icir, 1e-12);
}

TEST(Evaluate, Errors) {
  EXPECT_THROW(evaluate(table({"A"}, 0, Matrix(0, 1)), table({"A"}, 0, Matrix(0, 1))), Error);
  Matrix p = Matrix::Random(3, 3);
  EXPECT_THROW(evaluate(table({"A", "B", "C"}, 3, p), table({"A", "B", "D"}, 3, p)), Error);
  Matrix flat(3, 3);
  flat << 1, 2, 3, 1, 1, 1, 1, 1, 1;
  EXPECT_THROW(evaluate(table({"A", "B", "C"}, 3, flat), table({"A", "B", "C"}, 3, flat)), Error);
}

TEST(PredictionTable, CsvRoundTrip) {
  testing::TempDir dir;
  Matrix v(2, 3);
  v << 0.125, kNaN, -1.5, 2.0, 0.1, 1e-9;
  const auto t = table({"A", "B", "C"}, 2, v);
  t.write_csv(dir.file("p.csv"));
  const auto back = PredictionTable::read_csv(dir.file("p.csv"));
  EXPECT_EQ(back.stocks, t.stocks);
  EXPECT_EQ(back.dates, t.dates);
  EXPECT_TRUE(std::isnan(back.values(0, 1)));
  EXPECT_EQ(back.values(0, 0), 0.125);
  EXPECT_EQ(back.values(1, 2), 1e-9);
}

}  // namespace
}  // namespace gamestock
