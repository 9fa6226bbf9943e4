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

// Synthetic market with a planted, exactly known signal.
//
// Daily return of stock i in industry k on day t >= 1:
//
//   r_{i,t} = f_{k,t} + drift_{i,t} + sigma_i * eps,
//   f_{k,t} = phi * f_{k,t-1} + industry_scale * eta,
//   drift_{i,t} = sum_{events d <= t} A * s_d * exp(-alpha * (t - d)),
//
// where s_d = sign(a_ins + a_hot + a_ret) with 0 mapped to +1 and the
// triple is uniform over {-1, 0, 1}^3. Industries fall into three blocks:
// low volatility (noise 0.6 sigma, event rate 0.5 rho), normal, and high
// event rate (1.5 rho). The oracle mu_{i,t} is the exact conditional mean of
// r_{i,t+1} given everything up to day t.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gamestock/common.hpp"
#include "gamestock/game.hpp"
#include "gamestock/hetero_graph.hpp"
#include "gamestock/market_data.hpp"
#include "gamestock/metrics.hpp"

namespace gamestock {

struct SyntheticSpec {
  Eigen::Index num_stocks = 60;
  Eigen::Index num_industries = 6;
  Eigen::Index num_days = 600;
  double noise = 0.01;                // sigma_noise
  double event_rate = 0.02;           // rho, per stock-day
  double event_impact = 0.01;         // A
  double event_decay = 0.1;           // alpha_true, per day
  double industry_scale = 0.002;      // innovation scale of f
  double industry_persistence = 0.9;  // phi
  std::uint64_t seed = 0;
  Date start{2017, 1, 2};

  void validate() const;  // throws ConfigError
};

// Per-block multipliers; block of industry k is 3k / K.
inline constexpr int kNumBlocks = 3;
inline constexpr std::array<double, kNumBlocks> kBlockNoise = {0.6, 1.0, 1.0};
inline constexpr std::array<double, kNumBlocks> kBlockEventRate = {0.5, 1.0, 1.5};
int industry_block(Eigen::Index industry, Eigen::Index num_industries);

struct OracleBundle {
  SyntheticSpec spec;
  std::vector<std::string> stocks;
  std::vector<Date> dates;
  Matrix mu;                     // N x T
  std::optional<double> mean_ic; // over every day with a next-day label
  int ic_days = 0;
  int ic_excluded = 0;
};

struct SyntheticMarket {
  StockPanel panel;  // raw, fully observed
  std::vector<IndustryAssignment> industries;
  std::vector<Holding> holdings;
  std::vector<GameEvent> events;
  OracleBundle oracle;
  Matrix factor;  // K x T
  Matrix drift;   // N x T
};

SyntheticMarket generate(const SyntheticSpec& spec);

// mu for every stock on day index `day`.
Vector oracle_predict(const OracleBundle& bundle, Eigen::Index day);

// Oracle scores on the same anchors as label_table.
PredictionTable oracle_table(const OracleBundle& bundle, const DateRange& range,
                             Eigen::Index lookback);

// Writes panel.csv, industry.csv, holdings.csv, events.csv and oracle.json.
void write_market(const SyntheticMarket& market, const std::string& dir);

void write_oracle(const OracleBundle& bundle, const std::string& path);
OracleBundle load_oracle(const std::string& path);

}  // namespace gamestock
