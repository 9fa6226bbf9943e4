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

#include "gamestock/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include "json.hpp"

namespace gamestock {

namespace {

constexpr std::array<int, 4> kMaWindows = {5, 10, 20, 30};

// E[s] for a uniform triple: 10 profiles sum > 0, 7 sum to 0 (mapped to +1),
// 10 sum < 0.
constexpr double kMeanEventSign = 7.0 / 27.0;

int event_sign(const ActionProfile& a) { return a[0] + a[1] + a[2] < 0 ? -1 : 1; }

std::vector<Date> business_days(const Date& start, Eigen::Index count) {
  std::vector<Date> out;
  auto serial = start.serial();
  while (static_cast<Eigen::Index>(out.size()) < count) {
    // 1970-01-01 was a Thursday; 0 = Monday.
    const auto weekday = ((serial % 7) + 7 + 3) % 7;
    if (weekday < 5) out.push_back(Date::from_serial(serial));
    ++serial;
  }
  return out;
}

std::string stock_id(Eigen::Index i) {
  auto digits = std::to_string(i);
  if (digits.size() < 3) digits.insert(0, 3 - digits.size(), '0');
  return "S" + digits;
}

}  // namespace

void SyntheticSpec::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(num_industries >= 1, "synthetic.industries must be at least 1");
  require(num_stocks >= num_industries, "synthetic.stocks must be at least synthetic.industries");
  require(num_days >= 2, "synthetic.days must be at least 2");
  require(noise >= 0.0 && std::isfinite(noise), "synthetic.noise must be >= 0");
  require(event_rate >= 0.0 && event_rate <= 1.0, "synthetic.event_rate must be in [0, 1]");
  require(event_rate * kBlockEventRate.back() <= 1.0,
          "synthetic.event_rate times the high-event block multiplier exceeds 1");
  require(event_impact >= 0.0 && std::isfinite(event_impact), "synthetic.event_impact must be >= 0");
  require(event_decay >= 0.0 && std::isfinite(event_decay), "synthetic.event_decay must be >= 0");
  require(industry_scale >= 0.0 && std::isfinite(industry_scale),
          "synthetic.industry_scale must be >= 0");
  require(industry_persistence >= 0.0 && industry_persistence < 1.0,
          "synthetic.industry_persistence must be in [0, 1)");
}

int industry_block(Eigen::Index industry, Eigen::Index num_industries) {
  return static_cast<int>(industry * kNumBlocks / num_industries);
}

SyntheticMarket generate(const SyntheticSpec& spec) {
  spec.validate();
  const auto n = spec.num_stocks;
  const auto k = spec.num_industries;
  const auto t_len = spec.num_days;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> action(-1, 1);

  SyntheticMarket m;
  const auto dates = business_days(spec.start, t_len);
  std::vector<std::string> stocks;
  std::vector<Eigen::Index> industry_of(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    stocks.push_back(stock_id(i));
    industry_of[static_cast<std::size_t>(i)] = i % k;
    m.industries.push_back({stocks.back(), "I" + std::to_string(i % k)});
  }

  const double phi = spec.industry_persistence;
  m.factor.resize(k, t_len);
  const double stationary = spec.industry_scale / std::sqrt(1.0 - phi * phi);
  for (Eigen::Index j = 0; j < k; ++j) m.factor(j, 0) = stationary * normal(rng);
  for (Eigen::Index t = 1; t < t_len; ++t) {
    for (Eigen::Index j = 0; j < k; ++j) {
      m.factor(j, t) = phi * m.factor(j, t - 1) + spec.industry_scale * normal(rng);
    }
  }

  const double decay = std::exp(-spec.event_decay);
  m.drift = Matrix::Zero(n, t_len);
  Matrix returns = Matrix::Zero(n, t_len);
  Matrix close(n, t_len);
  std::vector<std::vector<bool>> has_event(static_cast<std::size_t>(n),
                                           std::vector<bool>(static_cast<std::size_t>(t_len)));
  for (Eigen::Index i = 0; i < n; ++i) close(i, 0) = 10.0 + 40.0 * unit(rng);
  for (Eigen::Index t = 1; t < t_len; ++t) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto ind = industry_of[static_cast<std::size_t>(i)];
      const int block = industry_block(ind, k);
      double drift = m.drift(i, t - 1) * decay;
      if (unit(rng) < spec.event_rate * kBlockEventRate[static_cast<std::size_t>(block)]) {
        ActionProfile a{action(rng), action(rng), action(rng)};
        drift += spec.event_impact * event_sign(a);
        has_event[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)] = true;
        m.events.push_back({dates[static_cast<std::size_t>(t)], stocks[static_cast<std::size_t>(i)], a, 0.0});
      }
      m.drift(i, t) = drift;
      const double sigma = spec.noise * kBlockNoise[static_cast<std::size_t>(block)];
      returns(i, t) = m.factor(ind, t) + drift + sigma * normal(rng);
      close(i, t) = close(i, t - 1) * (1.0 + returns(i, t));
    }
  }
  // Realized event-day returns, from the generated closes.
  {
    std::size_t idx = 0;
    for (Eigen::Index t = 1; t < t_len; ++t) {
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!has_event[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)]) continue;
        m.events[idx++].return_1d = close(i, t) / close(i, t - 1) - 1.0;
      }
    }
  }

  // Panel channels.
  auto& panel = m.panel;
  panel.stocks = stocks;
  panel.dates = dates;
  for (auto& v : panel.values) v.resize(n, t_len);
  panel.observed = Mask::Constant(n, t_len, true);
  panel.raw_close = close;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int block = industry_block(industry_of[static_cast<std::size_t>(i)], k);
    const double sigma = spec.noise * kBlockNoise[static_cast<std::size_t>(block)];
    for (Eigen::Index t = 0; t < t_len; ++t) {
      const double c = close(i, t);
      const double open = t == 0 ? c : close(i, t - 1) * (1.0 + 0.2 * sigma * normal(rng));
      const double hi = std::max(open, c) * (1.0 + 0.5 * sigma * std::abs(normal(rng)));
      const double lo = std::min(open, c) * (1.0 - 0.5 * sigma * std::abs(normal(rng)));
      const bool ev = has_event[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)];
      const double volume = 1e6 * std::exp(0.3 * normal(rng)) * (ev ? 1.5 : 1.0);
      panel.values[kOpen](i, t) = open;
      panel.values[kHigh](i, t) = hi;
      panel.values[kLow](i, t) = lo;
      panel.values[kClose](i, t) = c;
      panel.values[kVolume](i, t) = volume;
      for (std::size_t w = 0; w < kMaWindows.size(); ++w) {
        const auto first = std::max<Eigen::Index>(0, t - kMaWindows[w] + 1);
        double sum = 0.0;
        for (Eigen::Index s = first; s <= t; ++s) sum += close(i, s);
        panel.values[static_cast<std::size_t>(kMa5) + w](i, t) = sum / static_cast<double>(t - first + 1);
      }
    }
  }

  // Holdings by industry block.
  for (Eigen::Index i = 0; i < n; ++i) {
    const int block = industry_block(industry_of[static_cast<std::size_t>(i)], k);
    const auto& s = stocks[static_cast<std::size_t>(i)];
    if (block == 0) m.holdings.push_back({InvestorType::kInstitution, s, 0.8});
    if (block == 2) m.holdings.push_back({InvestorType::kHotMoney, s, 0.9});
    if (block == 2) m.holdings.push_back({InvestorType::kRetail, s, 0.6});
    if (block == 1) m.holdings.push_back({InvestorType::kRetail, s, 0.3});
  }

  // Oracle: E[r_{t+1} | info at t].
  auto& o = m.oracle;
  o.spec = spec;
  o.stocks = stocks;
  o.dates = dates;
  o.mu.resize(n, t_len);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto ind = industry_of[static_cast<std::size_t>(i)];
    const int block = industry_block(ind, k);
    const double expected_event =
        spec.event_rate * kBlockEventRate[static_cast<std::size_t>(block)] * spec.event_impact * kMeanEventSign;
    for (Eigen::Index t = 0; t < t_len; ++t) {
      o.mu(i, t) = phi * m.factor(ind, t) + m.drift(i, t) * decay + expected_event;
    }
  }
  std::vector<double> ics;
  std::vector<double> pred(static_cast<std::size_t>(n));
  std::vector<double> label(static_cast<std::size_t>(n));
  for (Eigen::Index t = 0; t + 1 < t_len; ++t) {
    for (Eigen::Index i = 0; i < n; ++i) {
      pred[static_cast<std::size_t>(i)] = o.mu(i, t);
      label[static_cast<std::size_t>(i)] = close(i, t + 1) / close(i, t) - 1.0;
    }
    if (auto ic = daily_ic(pred, label)) {
      ics.push_back(*ic);
    } else {
      ++o.ic_excluded;
    }
  }
  o.ic_days = static_cast<int>(ics.size());
  if (!ics.empty()) o.mean_ic = std::accumulate(ics.begin(), ics.end(), 0.0) / static_cast<double>(ics.size());
  return m;
}

Vector oracle_predict(const OracleBundle& bundle, Eigen::Index day) {
  if (day < 0 || day >= bundle.mu.cols()) {
    throw Error("oracle day " + std::to_string(day) + " outside [0, " +
                std::to_string(bundle.mu.cols() - 1) + "]");
  }
  return bundle.mu.col(day);
}

PredictionTable oracle_table(const OracleBundle& bundle, const DateRange& range,
                             Eigen::Index lookback) {
  PredictionTable table;
  table.stocks = bundle.stocks;
  std::vector<Eigen::Index> days;
  const auto t_len = static_cast<Eigen::Index>(bundle.dates.size());
  for (Eigen::Index t = lookback - 1; t + 1 < t_len; ++t) {
    if (range.contains(bundle.dates[static_cast<std::size_t>(t)])) days.push_back(t);
  }
  table.values.resize(static_cast<Eigen::Index>(days.size()), bundle.mu.rows());
  for (std::size_t d = 0; d < days.size(); ++d) {
    table.dates.push_back(bundle.dates[static_cast<std::size_t>(days[d])]);
    table.values.row(static_cast<Eigen::Index>(d)) = oracle_predict(bundle, days[d]).transpose();
  }
  return table;
}

void write_market(const SyntheticMarket& market, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path root(dir);
  write_panel(market.panel, (root / "panel.csv").string());
  write_industry_map(market.industries, (root / "industry.csv").string());
  write_holdings(market.holdings, (root / "holdings.csv").string());
  write_events(market.events, (root / "events.csv").string());
  write_oracle(market.oracle, (root / "oracle.json").string());
}

namespace {

using nlohmann::json;

json spec_json(const SyntheticSpec& s) {
  return {{"stocks", s.num_stocks},
          {"industries", s.num_industries},
          {"days", s.num_days},
          {"noise", s.noise},
          {"event_rate", s.event_rate},
          {"event_impact", s.event_impact},
          {"event_decay", s.event_decay},
          {"industry_scale", s.industry_scale},
          {"industry_persistence", s.industry_persistence},
          {"seed", s.seed},
          {"start", s.start.str()}};
}

SyntheticSpec json_spec(const json& j) {
  SyntheticSpec s;
  s.num_stocks = j.at("stocks").get<Eigen::Index>();
  s.num_industries = j.at("industries").get<Eigen::Index>();
  s.num_days = j.at("days").get<Eigen::Index>();
  s.noise = j.at("noise").get<double>();
  s.event_rate = j.at("event_rate").get<double>();
  s.event_impact = j.at("event_impact").get<double>();
  s.event_decay = j.at("event_decay").get<double>();
  s.industry_scale = j.at("industry_scale").get<double>();
  s.industry_persistence = j.at("industry_persistence").get<double>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.start = Date::parse(j.at("start").get<std::string>());
  return s;
}

}  // namespace

void write_oracle(const OracleBundle& b, const std::string& path) {
  json mu = json::array();
  for (Eigen::Index i = 0; i < b.mu.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index t = 0; t < b.mu.cols(); ++t) row.push_back(b.mu(i, t));
    mu.push_back(std::move(row));
  }
  std::vector<std::string> dates;
  for (const auto& d : b.dates) dates.push_back(d.str());
  const json doc = {{"spec", spec_json(b.spec)},
                    {"mean_ic", b.mean_ic ? json(*b.mean_ic) : json(nullptr)},
                    {"ic_days", b.ic_days},
                    {"ic_excluded", b.ic_excluded},
                    {"stocks", b.stocks},
                    {"dates", dates},
                    {"mu", std::move(mu)}};
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << doc.dump() << '\n';
}

OracleBundle load_oracle(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open oracle bundle '" + path + "'");
  try {
    const auto doc = json::parse(in);
    OracleBundle b;
    b.spec = json_spec(doc.at("spec"));
    if (!doc.at("mean_ic").is_null()) b.mean_ic = doc.at("mean_ic").get<double>();
    b.ic_days = doc.at("ic_days").get<int>();
    b.ic_excluded = doc.at("ic_excluded").get<int>();
    b.stocks = doc.at("stocks").get<std::vector<std::string>>();
    for (const auto& d : doc.at("dates")) b.dates.push_back(Date::parse(d.get<std::string>()));
    const auto& mu = doc.at("mu");
    b.mu.resize(static_cast<Eigen::Index>(mu.size()), static_cast<Eigen::Index>(b.dates.size()));
    for (std::size_t i = 0; i < mu.size(); ++i) {
      if (mu[i].size() != b.dates.size()) throw Error("oracle row length mismatch");
      for (std::size_t t = 0; t < b.dates.size(); ++t) {
        b.mu(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = mu[i][t].get<double>();
      }
    }
    return b;
  } catch (const json::exception& e) {
    throw Error("malformed oracle bundle '" + path + "': " + e.what());
  }
}

}  // namespace gamestock
