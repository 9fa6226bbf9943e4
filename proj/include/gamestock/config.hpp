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

// Run configuration: one JSON file whose nested objects flatten to dotted
// keys (`{"wavelet": {"level": 2}}` is `wavelet.level`), plus `key=value`
// overrides. Unknown keys and ill-typed values are ConfigErrors.

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gamestock/forecaster.hpp"
#include "gamestock/synthetic.hpp"

namespace gamestock {

struct DataPaths {
  std::string dir = "data";
  // Empty entries default to <dir>/panel.csv, industry.csv, holdings.csv,
  // events.csv and oracle.json.
  std::string panel;
  std::string industry;
  std::string holdings;
  std::string events;
  std::string oracle;

  std::string panel_path() const;
  std::string industry_path() const;
  std::string holdings_path() const;
  std::string events_path() const;
  std::string oracle_path() const;
};

// Empty dates fall back to a 60/20/20 split of the panel calendar.
struct SplitDates {
  std::string train_start, train_end;
  std::string valid_start, valid_end;
  std::string test_start, test_end;
};

struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  SyntheticSpec synthetic;
  DataPaths data;
  SplitDates split;
  std::string output_root = "runs";
  std::string output_run_dir;   // fixed run directory instead of a timestamped one
  std::string checkpoint;       // evaluate / predict
  std::string predictions;      // evaluate: score a prediction file instead of a checkpoint
  std::string predict_start;    // predict: empty means the test split
  std::string predict_end;

  void validate() const;  // throws ConfigError
};

// Every key with its current value, in a fixed order.
std::vector<std::pair<std::string, std::string>> flatten(const RunConfig& config);

// Sets one dotted key from a JSON-encoded value; bare words are strings.
void set_key(RunConfig& config, const std::string& key, const std::string& value);

// Defaults, then the file (if not empty), then overrides (`key=value`).
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides);

SplitSpec resolve_split(const SplitDates& dates, const StockPanel& panel);

// Builds the graph, locates events and resolves the split; warnings from
// every stage are collected.
MarketData assemble_market(StockPanel panel, const std::vector<IndustryAssignment>& industry,
                           const std::vector<Holding>& holdings, const std::vector<GameEvent>& events,
                           const SplitDates& split, Warnings* warnings);

// assemble_market over the files named in the config.
MarketData load_market(const RunConfig& config, Warnings* warnings);

}  // namespace gamestock
