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

// The end-to-end forecaster and its training loop.
//
// Per anchor day: wavelet-temporal embeddings Z (or a recurrent encoder) ->
// relational convolutions over the stock/industry/investor graph -> gated
// fusion with the decayed game signal -> row normalization with a learnable
// scale and shift -> linear scalar head. Training minimizes
//
//   L_total = L_pred + lambda_eq * L_eq
//
// with one anchor day per optimizer step.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gamestock/autodiff.hpp"
#include "gamestock/common.hpp"
#include "gamestock/game.hpp"
#include "gamestock/hetero_graph.hpp"
#include "gamestock/market_data.hpp"
#include "gamestock/metrics.hpp"
#include "gamestock/nn.hpp"
#include "gamestock/temporal.hpp"

namespace gamestock {

// How industry and investor nodes are featurized before the graph stage: a
// learned per-node row (uniform noise of 0.01 at initialization), or the
// mean embedding of the stocks each links to.
enum class NodeFeatures { kMemberMean, kLearned };

NodeFeatures parse_node_features(std::string_view name);  // member_mean | learned
std::string_view node_features_name(NodeFeatures mode);

struct ModelConfig {
  Eigen::Index lookback = 20;
  WaveletConfig wavelet;
  Eigen::Index embed_dim = 48;
  Eigen::Index graph_hidden = 64;
  int graph_layers = 2;
  Eigen::Index attention_hidden = 48;
  Eigen::Index action_hidden = 32;
  int pos_dim = 16;
  double lambda_eq = 0.1;
  // Returns are divided by this scale inside L_pred and the head output is
  // multiplied by it, so training sees unit-scale targets. 0 means the
  // standard deviation of the training labels; 1 gives the raw-return loss.
  double label_scale = 0.0;
  double alpha_decay = 0.1;
  // Panel windows go through anchor_windows before encoding.
  bool window_anchor = true;
  bool use_mdwt = true;
  bool use_hgcn = true;
  bool use_gre = true;
  Normalization normalization = Normalization::kDegree;
  NodeFeatures node_features = NodeFeatures::kLearned;
  GameSpec game = GameSpec::defaults();

  void validate() const;  // throws ConfigError
};

struct TrainConfig {
  double learning_rate = 1e-3;
  double weight_decay = 1e-3;
  int max_epochs = 300;
  int patience = 20;
  int plateau_patience = 5;
  double plateau_factor = 0.5;
  double min_learning_rate = 1e-6;
  std::uint64_t seed = 0;

  void validate() const;  // throws ConfigError
};

// An event as seen by one stock: calendar day index, triple and return.
struct StockEvent {
  Eigen::Index day = 0;
  ActionProfile actions{};
  double return_1d = 0.0;
};

// Events grouped by stock (panel order) and sorted by day.
std::vector<std::vector<StockEvent>> group_events(std::span<const LocatedEvent> events,
                                                  Eigen::Index num_stocks);

// Everything one forward pass needs for one anchor day.
struct AnchorInputs {
  Eigen::Index anchor = 0;
  Eigen::Index num_stocks = 0;
  PooledBands bands;              // when use_mdwt
  std::vector<Matrix> steps;      // L entries of N x D, oldest first, when !use_mdwt
  Matrix event_features;          // E x (pos_dim + 3)
  Matrix event_weights;           // N x E, rows sum to 1 for evented stocks
  Matrix eq_target;               // N x 3
  std::vector<bool> evented;
  Matrix labels;                  // N x 1, 0 where unlabeled
  std::vector<bool> labeled;
};

// `windows` holds N windows of L x D. The equilibrium target of an evented
// stock is solved from its most recent in-window event's return. Labels are
// optional (prediction-only days).
AnchorInputs prepare_inputs(const ModelConfig& config, std::span<const Matrix> windows,
                            std::span<const std::vector<StockEvent>> events_by_stock,
                            Eigen::Index anchor, const LabelVector* labels);

struct ForwardVars {
  ad::Var score;    // N x 1
  ad::Var actions;  // N x 3, empty without the game stage
  ad::Var l_pred;   // in units of label_scale^2
  ad::Var l_eq;
  ad::Var total;
  bool eq_empty = true;
};

// L_pred + lambda_eq * L_eq.
double loss_total(double l_pred, double l_eq, double lambda_eq);

// The same loss from plain arrays: squared error over labeled stocks plus
// lambda_eq times the equilibrium loss over evented stocks. No labeled stock
// is an error.
double loss_total(const Vector& pred, const Vector& labels, const std::vector<bool>& labeled,
                  const Matrix& actions, const Matrix& targets, const std::vector<bool>& evented,
                  double lambda_eq);

// Rows for industry and investor nodes (in graph order) averaging the stocks
// each one links to; these nodes enter the graph stage with that mean
// embedding.
Matrix member_means(const HeteroGraph& graph);

class Forecaster {
 public:
  // Parameters are initialized from `seed`; `in_dim` is the window width D.
  Forecaster(ModelConfig config, Eigen::Index in_dim, const HeteroGraph& graph,
             std::uint64_t seed);
  // Restores from existing parameters; names and shapes must match.
  Forecaster(ModelConfig config, Eigen::Index in_dim, const HeteroGraph& graph,
             nn::ParameterSet params);

  const ModelConfig& config() const { return config_; }
  Eigen::Index in_dim() const { return in_dim_; }
  nn::ParameterSet& params() { return params_; }
  const nn::ParameterSet& params() const { return params_; }
  const HeteroGraph& graph() const { return graph_; }

  // Records the forward pass and losses; labels may be absent, in which case
  // l_pred is 0. Requires a resolved (positive) label_scale.
  ForwardVars forward(nn::Binding& binding, const AnchorInputs& inputs) const;

  // Scores for one anchor (N), no gradients.
  Vector predict(const AnchorInputs& inputs) const;

 private:
  void build(nn::Rng& rng);

  ModelConfig config_;
  Eigen::Index in_dim_;
  HeteroGraph graph_;
  RelationOperators ops_;
  Matrix members_;
  nn::ParameterSet params_;
};

// Stops after `patience` epochs without strict improvement.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience) : patience_(patience) {}
  // Returns true when this epoch is the new best.
  bool update(int epoch, double loss);
  bool should_stop() const { return stale_ >= patience_; }
  int best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_; }

 private:
  int patience_;
  int stale_ = 0;
  int best_epoch_ = 0;
  double best_ = 0.0;
  bool seen_ = false;
};

// Multiplies the rate by `factor` after `patience` epochs without strict
// improvement, never going below `floor`.
class PlateauScheduler {
 public:
  PlateauScheduler(double lr, double factor, int patience, double floor);
  // Returns the rate for the next epoch.
  double update(double loss);
  double learning_rate() const { return lr_; }

 private:
  double lr_;
  double factor_;
  int patience_;
  double floor_;
  int stale_ = 0;
  double best_ = 0.0;
  bool seen_ = false;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double valid_loss = 0.0;
  double learning_rate = 0.0;
  std::optional<double> valid_ic;
};

// Raw panel, graph and located events; the split picks the anchors.
struct MarketData {
  StockPanel panel;
  HeteroGraph graph;
  std::vector<LocatedEvent> events;
  SplitSpec split;
};

struct TrainResult {
  ModelConfig model;        // with label_scale resolved
  nn::ParameterSet params;  // best-validation parameters
  StandardizationStats stats;
  std::vector<EpochRecord> log;
  int best_epoch = 0;
  Warnings warnings;
};

// Called after each epoch, e.g. for progress output.
using EpochCallback = std::function<void(const EpochRecord&)>;

TrainResult train(const ModelConfig& model, const TrainConfig& train, const MarketData& data,
                  const EpochCallback& on_epoch = {});

void write_training_log(std::span<const EpochRecord> log, const std::string& path);

struct Checkpoint {
  ModelConfig model;
  TrainConfig train;
  nn::ParameterSet params;
  StandardizationStats stats;
  std::vector<std::string> stocks;
  std::vector<std::string> node_ids;
  Eigen::Index in_dim = 0;
};

inline constexpr const char* kCheckpointVersion = "gamestock-checkpoint-1";

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// Scores for every anchor of `panel` (raw) within `range`, standardized with
// the checkpoint's statistics. An empty range gives an empty table.
PredictionTable predict(const Checkpoint& checkpoint, const MarketData& data,
                        const DateRange& range);

// Realized next-day returns on the same anchors, NaN where unavailable.
PredictionTable label_table(const StockPanel& panel, const DateRange& range,
                            Eigen::Index lookback);

}  // namespace gamestock
