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

#include "gamestock/config.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <utility>

#include "json.hpp"

namespace gamestock {

namespace {

using nlohmann::json;

struct Key {
  std::string name;
  std::function<json(const RunConfig&)> get;
  std::function<void(RunConfig&, const json&)> set;
};

template <typename T>
T as(const json& v, const std::string& key) {
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError("");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError("");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0) {
          throw ConfigError("");
        }
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError("");
    } else {
      if (!v.is_string()) throw ConfigError("");
    }
    return v.get<T>();
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' has an invalid value " + v.dump());
  }
}

template <typename T, typename Field>
Key field(std::string name, Field accessor) {
  Key k;
  k.name = name;
  k.get = [accessor](const RunConfig& c) { return json(accessor(const_cast<RunConfig&>(c))); };
  k.set = [accessor, name](RunConfig& c, const json& v) { accessor(c) = as<T>(v, name); };
  return k;
}

json beta_json(const GameSpec& g) {
  json out = json::array();
  for (const auto& row : g.beta) {
    for (double b : row) out.push_back(b);
  }
  return out;
}

void set_beta(GameSpec& g, const json& v, const std::string& key) {
  std::vector<double> flat;
  auto fail = [&] {
    throw ConfigError("config key '" + key + "' must be a 3x3 list (flat or nested), got " + v.dump());
  };
  if (!v.is_array()) fail();
  for (const auto& e : v) {
    if (e.is_array()) {
      if (e.size() != kNumPlayers) fail();
      for (const auto& x : e) {
        if (!x.is_number()) fail();
        flat.push_back(x.get<double>());
      }
    } else if (e.is_number()) {
      flat.push_back(e.get<double>());
    } else {
      fail();
    }
  }
  if (flat.size() != kNumPlayers * kNumPlayers) fail();
  for (int p = 0; p < kNumPlayers; ++p) {
    for (int q = 0; q < kNumPlayers; ++q) {
      g.beta[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)] =
          flat[static_cast<std::size_t>(p * kNumPlayers + q)];
    }
  }
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    using C = RunConfig;
    k.push_back(field<std::string>("wavelet.name", [](C& c) -> auto& { return c.model.wavelet.name; }));
    k.push_back(field<int>("wavelet.level", [](C& c) -> auto& { return c.model.wavelet.level; }));
    k.push_back({"wavelet.boundary",
                 [](const C& c) { return json(std::string(wavelet::boundary_name(c.model.wavelet.boundary))); },
                 [](C& c, const json& v) {
                   try {
                     c.model.wavelet.boundary = wavelet::parse_boundary(as<std::string>(v, "wavelet.boundary"));
                   } catch (const ConfigError&) {
                     throw;
                   } catch (const Error& e) {
                     throw ConfigError(std::string("wavelet.boundary: ") + e.what());
                   }
                 }});
    k.push_back(field<Eigen::Index>("model.lookback", [](C& c) -> auto& { return c.model.lookback; }));
    k.push_back(field<Eigen::Index>("model.embed_dim", [](C& c) -> auto& { return c.model.embed_dim; }));
    k.push_back(field<Eigen::Index>("model.graph_hidden", [](C& c) -> auto& { return c.model.graph_hidden; }));
    k.push_back(field<int>("model.graph_layers", [](C& c) -> auto& { return c.model.graph_layers; }));
    k.push_back(field<Eigen::Index>("model.attention_hidden", [](C& c) -> auto& { return c.model.attention_hidden; }));
    k.push_back(field<Eigen::Index>("model.action_hidden", [](C& c) -> auto& { return c.model.action_hidden; }));
    k.push_back(field<double>("model.lambda_eq", [](C& c) -> auto& { return c.model.lambda_eq; }));
    k.push_back(field<double>("model.label_scale", [](C& c) -> auto& { return c.model.label_scale; }));
    k.push_back(field<bool>("model.window_anchor", [](C& c) -> auto& { return c.model.window_anchor; }));
    k.push_back(field<bool>("model.use_mdwt", [](C& c) -> auto& { return c.model.use_mdwt; }));
    k.push_back(field<bool>("model.use_hgcn", [](C& c) -> auto& { return c.model.use_hgcn; }));
    k.push_back(field<bool>("model.use_gre", [](C& c) -> auto& { return c.model.use_gre; }));
    k.push_back({"model.normalization",
                 [](const C& c) { return json(std::string(normalization_name(c.model.normalization))); },
                 [](C& c, const json& v) {
                   try {
                     c.model.normalization = parse_normalization(as<std::string>(v, "model.normalization"));
                   } catch (const ConfigError&) {
                     throw;
                   } catch (const Error& e) {
                     throw ConfigError(std::string("model.normalization: ") + e.what());
                   }
                 }});
    k.push_back({"model.node_features",
                 [](const C& c) { return json(std::string(node_features_name(c.model.node_features))); },
                 [](C& c, const json& v) {
                   c.model.node_features = parse_node_features(as<std::string>(v, "model.node_features"));
                 }});
    k.push_back(field<double>("game.alpha_decay", [](C& c) -> auto& { return c.model.alpha_decay; }));
    k.push_back(field<double>("game.lambda_follow", [](C& c) -> auto& { return c.model.game.lambda_follow; }));
    k.push_back({"game.beta", [](const C& c) { return beta_json(c.model.game); },
                 [](C& c, const json& v) { set_beta(c.model.game, v, "game.beta"); }});
    k.push_back(field<int>("game.pos_dim", [](C& c) -> auto& { return c.model.pos_dim; }));
    k.push_back(field<double>("train.learning_rate", [](C& c) -> auto& { return c.train.learning_rate; }));
    k.push_back(field<double>("train.weight_decay", [](C& c) -> auto& { return c.train.weight_decay; }));
    k.push_back(field<int>("train.max_epochs", [](C& c) -> auto& { return c.train.max_epochs; }));
    k.push_back(field<int>("train.patience", [](C& c) -> auto& { return c.train.patience; }));
    k.push_back(field<int>("train.plateau_patience", [](C& c) -> auto& { return c.train.plateau_patience; }));
    k.push_back(field<double>("train.plateau_factor", [](C& c) -> auto& { return c.train.plateau_factor; }));
    k.push_back(field<double>("train.min_learning_rate", [](C& c) -> auto& { return c.train.min_learning_rate; }));
    k.push_back(field<std::uint64_t>("train.seed", [](C& c) -> auto& { return c.train.seed; }));
    k.push_back(field<Eigen::Index>("synthetic.stocks", [](C& c) -> auto& { return c.synthetic.num_stocks; }));
    k.push_back(field<Eigen::Index>("synthetic.industries", [](C& c) -> auto& { return c.synthetic.num_industries; }));
    k.push_back(field<Eigen::Index>("synthetic.days", [](C& c) -> auto& { return c.synthetic.num_days; }));
    k.push_back(field<double>("synthetic.noise", [](C& c) -> auto& { return c.synthetic.noise; }));
    k.push_back(field<double>("synthetic.event_rate", [](C& c) -> auto& { return c.synthetic.event_rate; }));
    k.push_back(field<double>("synthetic.event_impact", [](C& c) -> auto& { return c.synthetic.event_impact; }));
    k.push_back(field<double>("synthetic.event_decay", [](C& c) -> auto& { return c.synthetic.event_decay; }));
    k.push_back(field<double>("synthetic.industry_scale", [](C& c) -> auto& { return c.synthetic.industry_scale; }));
    k.push_back(field<double>("synthetic.industry_persistence",
                              [](C& c) -> auto& { return c.synthetic.industry_persistence; }));
    k.push_back(field<std::uint64_t>("synthetic.seed", [](C& c) -> auto& { return c.synthetic.seed; }));
    k.push_back({"synthetic.start", [](const C& c) { return json(c.synthetic.start.str()); },
                 [](C& c, const json& v) {
                   try {
                     c.synthetic.start = Date::parse(as<std::string>(v, "synthetic.start"));
                   } catch (const ConfigError&) {
                     throw;
                   } catch (const Error& e) {
                     throw ConfigError(std::string("synthetic.start: ") + e.what());
                   }
                 }});
    k.push_back(field<std::string>("data.dir", [](C& c) -> auto& { return c.data.dir; }));
    k.push_back(field<std::string>("data.panel", [](C& c) -> auto& { return c.data.panel; }));
    k.push_back(field<std::string>("data.industry", [](C& c) -> auto& { return c.data.industry; }));
    k.push_back(field<std::string>("data.holdings", [](C& c) -> auto& { return c.data.holdings; }));
    k.push_back(field<std::string>("data.events", [](C& c) -> auto& { return c.data.events; }));
    k.push_back(field<std::string>("data.oracle", [](C& c) -> auto& { return c.data.oracle; }));
    k.push_back(field<std::string>("split.train_start", [](C& c) -> auto& { return c.split.train_start; }));
    k.push_back(field<std::string>("split.train_end", [](C& c) -> auto& { return c.split.train_end; }));
    k.push_back(field<std::string>("split.valid_start", [](C& c) -> auto& { return c.split.valid_start; }));
    k.push_back(field<std::string>("split.valid_end", [](C& c) -> auto& { return c.split.valid_end; }));
    k.push_back(field<std::string>("split.test_start", [](C& c) -> auto& { return c.split.test_start; }));
    k.push_back(field<std::string>("split.test_end", [](C& c) -> auto& { return c.split.test_end; }));
    k.push_back(field<std::string>("output.root", [](C& c) -> auto& { return c.output_root; }));
    k.push_back(field<std::string>("output.run_dir", [](C& c) -> auto& { return c.output_run_dir; }));
    k.push_back(field<std::string>("run.checkpoint", [](C& c) -> auto& { return c.checkpoint; }));
    k.push_back(field<std::string>("run.predictions", [](C& c) -> auto& { return c.predictions; }));
    k.push_back(field<std::string>("predict.start", [](C& c) -> auto& { return c.predict_start; }));
    k.push_back(field<std::string>("predict.end", [](C& c) -> auto& { return c.predict_end; }));
    return k;
  }();
  return table;
}

const Key& find_key(const std::string& name) {
  for (const auto& k : keys()) {
    if (k.name == name) return k;
  }
  throw ConfigError("unknown config key '" + name + "'");
}

void flatten_into(const json& node, const std::string& prefix,
                  std::vector<std::pair<std::string, json>>& out) {
  if (node.is_object()) {
    for (const auto& [name, child] : node.items()) {
      flatten_into(child, prefix.empty() ? name : prefix + "." + name, out);
    }
    return;
  }
  if (prefix.empty()) throw ConfigError("config file must hold a JSON object");
  out.emplace_back(prefix, node);
}

void check_date(const std::string& value, const std::string& key) {
  if (value.empty()) return;
  try {
    (void)Date::parse(value);
  } catch (const Error& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

Date index_date(const StockPanel& panel, double fraction) {
  auto idx = static_cast<std::size_t>(fraction * static_cast<double>(panel.dates.size()));
  idx = std::min(idx, panel.dates.size() - 1);
  return panel.dates[idx];
}

std::string in_dir(const std::string& dir, const std::string& explicit_path, const char* name) {
  if (!explicit_path.empty()) return explicit_path;
  return (std::filesystem::path(dir) / name).string();
}

}  // namespace

std::string DataPaths::panel_path() const { return in_dir(dir, panel, "panel.csv"); }
std::string DataPaths::industry_path() const { return in_dir(dir, industry, "industry.csv"); }
std::string DataPaths::holdings_path() const { return in_dir(dir, holdings, "holdings.csv"); }
std::string DataPaths::events_path() const { return in_dir(dir, events, "events.csv"); }
std::string DataPaths::oracle_path() const { return in_dir(dir, oracle, "oracle.json"); }

void RunConfig::validate() const {
  model.validate();
  train.validate();
  synthetic.validate();
  check_date(split.train_start, "split.train_start");
  check_date(split.train_end, "split.train_end");
  check_date(split.valid_start, "split.valid_start");
  check_date(split.valid_end, "split.valid_end");
  check_date(split.test_start, "split.test_start");
  check_date(split.test_end, "split.test_end");
  check_date(predict_start, "predict.start");
  check_date(predict_end, "predict.end");
  if (output_root.empty() && output_run_dir.empty()) throw ConfigError("output.root must not be empty");
}

std::vector<std::pair<std::string, std::string>> flatten(const RunConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& k : keys()) out.emplace_back(k.name, k.get(config).dump());
  return out;
}

void set_key(RunConfig& config, const std::string& key, const std::string& value) {
  const auto& k = find_key(key);
  json v;
  try {
    v = json::parse(value);
  } catch (const json::exception&) {
    v = value;
  }
  // Values that look numeric but are meant as names (for example a stock id).
  if (k.get(config).is_string() && !v.is_string()) v = value;
  k.set(config, v);
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  RunConfig config;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    std::vector<std::pair<std::string, json>> flat;
    flatten_into(doc, "", flat);
    for (const auto& [name, value] : flat) find_key(name).set(config, value);
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + o + "' is not key=value");
    set_key(config, o.substr(0, eq), o.substr(eq + 1));
  }
  config.validate();
  return config;
}

SplitSpec resolve_split(const SplitDates& d, const StockPanel& panel) {
  if (panel.dates.size() < 5) throw Error("panel calendar is too short to split");
  auto pick = [](const std::string& value, const Date& fallback) {
    return value.empty() ? fallback : Date::parse(value);
  };
  const auto& dates = panel.dates;
  auto before = [&](double fraction) {
    const auto idx = static_cast<std::size_t>(fraction * static_cast<double>(dates.size()));
    return dates[std::max<std::size_t>(idx, 1) - 1];
  };
  SplitSpec s;
  s.train = {pick(d.train_start, dates.front()), pick(d.train_end, before(0.6))};
  s.valid = {pick(d.valid_start, index_date(panel, 0.6)), pick(d.valid_end, before(0.8))};
  s.test = {pick(d.test_start, index_date(panel, 0.8)), pick(d.test_end, dates.back())};
  s.validate();
  return s;
}

MarketData assemble_market(StockPanel panel, const std::vector<IndustryAssignment>& industry,
                           const std::vector<Holding>& holdings, const std::vector<GameEvent>& events,
                           const SplitDates& split, Warnings* warnings) {
  MarketData data;
  data.panel = std::move(panel);
  data.graph = build_graph(data.panel.stocks, industry, holdings);
  Warnings local;
  data.events = locate_events(events, data.panel, &local);
  data.split = resolve_split(split, data.panel);
  if (warnings != nullptr) {
    warnings->insert(warnings->end(), data.panel.warnings.begin(), data.panel.warnings.end());
    warnings->insert(warnings->end(), data.graph.warnings.begin(), data.graph.warnings.end());
    warnings->insert(warnings->end(), local.begin(), local.end());
  }
  return data;
}

MarketData load_market(const RunConfig& config, Warnings* warnings) {
  return assemble_market(load_panel(config.data.panel_path()), load_industry_map(config.data.industry_path()),
                         load_holdings(config.data.holdings_path()), load_events(config.data.events_path()),
                         config.split, warnings);
}

}  // namespace gamestock
