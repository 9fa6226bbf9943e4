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

// gamestock <generate|train|evaluate|predict|graph-stats> --config <path> [--set k=v]...
//
// Exit status: 0 on success, 2 for configuration or missing-file errors,
// 1 for runtime failures.

#include <openssl/evp.h>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "gamestock/config.hpp"
#include "gamestock/forecaster.hpp"
#include "gamestock/hetero_graph.hpp"
#include "gamestock/metrics.hpp"
#include "gamestock/synthetic.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace gamestock;

namespace {

struct MissingFile : Error {
  using Error::Error;
};

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile("cannot read '" + path + "'");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int{digest[i]};
  return out.str();
}

void require_file(const std::string& path) {
  if (!fs::is_regular_file(path)) throw MissingFile("missing input file '" + path + "'");
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y%m%dT%H%M%SZ");
  return out.str();
}

// Runs are named <timestamp>-seed<seed>; a numeric suffix avoids collisions.
fs::path make_run_dir(const RunConfig& config, std::uint64_t seed) {
  if (!config.output_run_dir.empty()) {
    fs::create_directories(config.output_run_dir);
    return config.output_run_dir;
  }
  const auto base = timestamp() + "-seed" + std::to_string(seed);
  fs::path dir = fs::path(config.output_root) / base;
  for (int k = 1; fs::exists(dir); ++k) dir = fs::path(config.output_root) / (base + "-" + std::to_string(k));
  fs::create_directories(dir);
  return dir;
}

class Run {
 public:
  Run(std::string command, const RunConfig& config, std::uint64_t seed,
      const std::vector<std::string>& overrides, const std::string& config_path)
      : command_(std::move(command)), config_(config), seed_(seed),
        dir_(make_run_dir(config, seed)), log_(dir_ / "run.log") {
    if (!log_) throw Error("cannot write run log in '" + dir_.string() + "'");
    log("command=" + command_);
    log("config_file=" + config_path);
    for (const auto& o : overrides) log("override " + o);
    for (const auto& [k, v] : flatten(config_)) log("config " + k + "=" + v);
  }

  const fs::path& dir() const { return dir_; }
  fs::path path(const std::string& name) const { return dir_ / name; }

  void log(const std::string& line) {
    log_ << line << '\n';
    log_.flush();
  }
  void warn(const Warnings& warnings) {
    for (const auto& w : warnings) {
      log("warning " + w);
      std::cerr << "warning: " << w << '\n';
    }
  }
  void input(const std::string& path) { inputs_.push_back(path); }
  void output(const std::string& path) { outputs_.push_back(path); }

  void finish() {
    nlohmann::json doc;
    doc["command"] = command_;
    doc["seed"] = seed_;
    nlohmann::json cfg = nlohmann::json::object();
    for (const auto& [k, v] : flatten(config_)) cfg[k] = nlohmann::json::parse(v);
    doc["config"] = cfg;
    nlohmann::json in = nlohmann::json::object();
    for (const auto& p : inputs_) in[p] = sha256_file(p);
    doc["inputs"] = in;
    nlohmann::json out = nlohmann::json::object();
    for (const auto& p : outputs_) out[fs::path(p).filename().string()] = sha256_file(p);
    doc["outputs"] = out;
    std::ofstream f(dir_ / "manifest.json");
    f << doc.dump(2) << '\n';
    log("status=ok");
    std::cout << dir_.string() << '\n';
  }

 private:
  std::string command_;
  RunConfig config_;
  std::uint64_t seed_;
  fs::path dir_;
  std::ofstream log_;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
};

void require_market_inputs(const RunConfig& c) {
  require_file(c.data.panel_path());
  require_file(c.data.industry_path());
  require_file(c.data.holdings_path());
  require_file(c.data.events_path());
}

void record_market_inputs(Run& run, const RunConfig& c) {
  run.input(c.data.panel_path());
  run.input(c.data.industry_path());
  run.input(c.data.holdings_path());
  run.input(c.data.events_path());
}

void cmd_generate(const RunConfig& c, Run& run) {
  const auto market = generate(c.synthetic);
  write_market(market, run.dir().string());
  for (const char* f : {"panel.csv", "industry.csv", "holdings.csv", "events.csv", "oracle.json"}) {
    run.output(run.path(f).string());
  }
  run.log("events=" + std::to_string(market.events.size()));
  run.log("oracle_mean_ic=" + (market.oracle.mean_ic ? std::to_string(*market.oracle.mean_ic) : "undefined"));
}

void cmd_train(const RunConfig& c, Run& run) {
  require_market_inputs(c);
  record_market_inputs(run, c);
  Warnings warnings;
  const auto data = load_market(c, &warnings);
  run.warn(warnings);
  const auto result = train(c.model, c.train, data, [&](const EpochRecord& r) {
    std::ostringstream line;
    line << std::setprecision(10) << "epoch " << r.epoch << " train_loss=" << r.train_loss
         << " valid_loss=" << r.valid_loss << " lr=" << r.learning_rate
         << " valid_ic=" << (r.valid_ic ? std::to_string(*r.valid_ic) : "undefined");
    run.log(line.str());
  });
  run.warn(result.warnings);
  run.log("best_epoch=" + std::to_string(result.best_epoch));
  Checkpoint ck;
  ck.model = result.model;
  ck.train = c.train;
  ck.params = result.params;
  ck.stats = result.stats;
  ck.stocks = data.panel.stocks;
  ck.node_ids = data.graph.node_ids;
  ck.in_dim = kNumChannels;
  save_checkpoint(ck, run.path("checkpoint.json").string());
  write_training_log(result.log, run.path("training_log.csv").string());
  run.output(run.path("checkpoint.json").string());
  run.output(run.path("training_log.csv").string());
}

DateRange predict_range(const RunConfig& c, const MarketData& data) {
  DateRange r = data.split.test;
  if (!c.predict_start.empty()) r.start = Date::parse(c.predict_start);
  if (!c.predict_end.empty()) r.end = Date::parse(c.predict_end);
  return r;
}

void cmd_predict(const RunConfig& c, Run& run) {
  if (c.checkpoint.empty()) throw ConfigError("predict needs run.checkpoint");
  require_file(c.checkpoint);
  require_market_inputs(c);
  record_market_inputs(run, c);
  run.input(c.checkpoint);
  Warnings warnings;
  const auto data = load_market(c, &warnings);
  run.warn(warnings);
  const auto ck = load_checkpoint(c.checkpoint);
  const auto table = predict(ck, data, predict_range(c, data));
  table.write_csv(run.path("predictions.csv").string());
  run.output(run.path("predictions.csv").string());
  run.log("prediction_days=" + std::to_string(table.dates.size()));
}

void cmd_evaluate(const RunConfig& c, Run& run) {
  require_market_inputs(c);
  record_market_inputs(run, c);
  Warnings warnings;
  const auto data = load_market(c, &warnings);
  run.warn(warnings);
  PredictionTable table;
  if (!c.predictions.empty()) {
    require_file(c.predictions);
    run.input(c.predictions);
    table = PredictionTable::read_csv(c.predictions);
  } else {
    if (c.checkpoint.empty()) throw ConfigError("evaluate needs run.checkpoint or run.predictions");
    require_file(c.checkpoint);
    run.input(c.checkpoint);
    const auto ck = load_checkpoint(c.checkpoint);
    table = predict(ck, data, predict_range(c, data));
    table.write_csv(run.path("predictions.csv").string());
    run.output(run.path("predictions.csv").string());
  }
  // Labels on exactly the predicted days and stocks.
  const auto labels_all = label_table(data.panel, {Date{1, 1, 1}, Date{9999, 12, 31}}, 1);
  PredictionTable labels;
  labels.stocks = table.stocks;
  labels.dates = table.dates;
  labels.values = Matrix::Constant(table.values.rows(), table.values.cols(),
                                   std::numeric_limits<double>::quiet_NaN());
  for (std::size_t d = 0; d < table.dates.size(); ++d) {
    const auto day = std::lower_bound(labels_all.dates.begin(), labels_all.dates.end(), table.dates[d]);
    if (day == labels_all.dates.end() || *day != table.dates[d]) {
      throw Error("prediction date " + table.dates[d].str() + " has no next-day label in the panel");
    }
    const auto row = day - labels_all.dates.begin();
    for (std::size_t i = 0; i < table.stocks.size(); ++i) {
      const auto s = data.panel.stock_index(table.stocks[i]);
      if (!s) throw Error("prediction stock '" + table.stocks[i] + "' is not in the panel");
      labels.values(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(i)) = labels_all.values(row, *s);
    }
  }
  const auto report = evaluate(table, labels);
  {
    std::ofstream out(run.path("metrics.txt"));
    out << report.to_text();
  }
  report.write_daily_csv(run.path("daily_ic.csv").string());
  run.output(run.path("metrics.txt").string());
  run.output(run.path("daily_ic.csv").string());
  std::cout << report.to_text();
}

void cmd_graph_stats(const RunConfig& c, Run& run) {
  require_file(c.data.panel_path());
  require_file(c.data.industry_path());
  require_file(c.data.holdings_path());
  run.input(c.data.panel_path());
  run.input(c.data.industry_path());
  run.input(c.data.holdings_path());
  const auto panel = load_panel(c.data.panel_path());
  const auto graph = build_graph(panel.stocks, load_industry_map(c.data.industry_path()),
                                 load_holdings(c.data.holdings_path()));
  run.warn(graph.warnings);
  const auto text = graph_statistics(graph).to_text();
  {
    std::ofstream out(run.path("graph_stats.txt"));
    out << text;
  }
  run.output(run.path("graph_stats.txt").string());
  std::cout << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stock return forecasting with wavelets, a heterogeneous graph and investor games"};
  app.require_subcommand(1, 1);
  std::string config_path;
  std::vector<std::string> overrides;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"generate", "write a synthetic market and its oracle"},
      {"train", "fit a model and write a checkpoint"},
      {"evaluate", "score predictions against realized returns"},
      {"predict", "predict returns from a checkpoint"},
      {"graph-stats", "print heterogeneous graph statistics"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--set", overrides, "override a config key (key=value)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  RunConfig config;
  try {
    if (!fs::is_regular_file(config_path)) throw MissingFile("missing config file '" + config_path + "'");
    config = load_config(config_path, overrides);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    const auto seed = command == "generate" ? config.synthetic.seed : config.train.seed;
    Run run(command, config, seed, overrides, config_path);
    try {
      if (command == "generate") cmd_generate(config, run);
      if (command == "train") cmd_train(config, run);
      if (command == "evaluate") cmd_evaluate(config, run);
      if (command == "predict") cmd_predict(config, run);
      if (command == "graph-stats") cmd_graph_stats(config, run);
      run.finish();
    } catch (const std::exception& e) {
      run.log(std::string("status=error ") + e.what());
      throw;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const MissingFile& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
