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

#include "gamestock/forecaster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <utility>

#include "csv.hpp"
#include "json.hpp"

namespace gamestock {

namespace {

std::string level_name(int k, const char* what) {
  return "temporal.level" + std::to_string(k) + "." + what;
}

std::string graph_name(int layer, const std::string& what) {
  return "graph.layer" + std::to_string(layer) + "." + what;
}

Eigen::Index layer_out(const ModelConfig& c, int layer) {
  return layer + 1 == c.graph_layers ? c.embed_dim : c.graph_hidden;
}

Eigen::Index layer_in(const ModelConfig& c, int layer) {
  return layer == 0 ? c.embed_dim : c.graph_hidden;
}

}  // namespace

Matrix member_means(const HeteroGraph& graph) {
  const auto n = graph.num_stocks;
  Matrix out = Matrix::Zero(graph.num_nodes() - n, n);
  for (const auto r : {kInIndustry, kHeldBy}) {
    for (const auto& [src, dst] : graph.edges[r]) {
      if (src >= n && dst < n) out(src - n, dst) = 1.0;
    }
  }
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double c = out.row(i).sum();
    if (c > 0.0) out.row(i) /= c;
  }
  return out;
}

void ModelConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(lookback >= 2, "model.lookback must be at least 2");
  require(wavelet.level >= 1, "wavelet.level must be at least 1");
  require(embed_dim > 0, "model.embed_dim must be positive");
  require(graph_hidden > 0, "model.graph_hidden must be positive");
  require(graph_layers >= 1, "model.graph_layers must be at least 1");
  require(attention_hidden > 0, "model.attention_hidden must be positive");
  require(action_hidden > 0, "model.action_hidden must be positive");
  require(pos_dim > 0 && pos_dim % 2 == 0, "game.pos_dim must be positive and even");
  require(std::isfinite(lambda_eq) && lambda_eq >= 0.0, "model.lambda_eq must be >= 0");
  require(std::isfinite(label_scale) && label_scale >= 0.0, "model.label_scale must be >= 0");
  require(std::isfinite(alpha_decay) && alpha_decay > 0.0, "game.alpha_decay must be > 0");
  require(lookback >= (Eigen::Index{1} << wavelet.level),
          "model.lookback must be at least 2^wavelet.level");
  if (use_mdwt) {
    // Surfaces bad names and too-deep levels before any data is read.
    try {
      (void)wavelet::decompose(Matrix::Zero(lookback, 1), wavelet.name, wavelet.level,
                               wavelet.boundary);
    } catch (const Error& e) {
      throw ConfigError(std::string("wavelet: ") + e.what());
    }
  }
  try {
    game.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

void TrainConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(learning_rate > 0.0, "train.learning_rate must be positive");
  require(weight_decay >= 0.0, "train.weight_decay must be >= 0");
  require(max_epochs >= 1, "train.max_epochs must be at least 1");
  require(patience >= 1, "train.patience must be at least 1");
  require(plateau_patience >= 1, "train.plateau_patience must be at least 1");
  require(plateau_factor > 0.0 && plateau_factor < 1.0, "train.plateau_factor must be in (0, 1)");
  require(min_learning_rate > 0.0, "train.min_learning_rate must be positive");
}

std::vector<std::vector<StockEvent>> group_events(std::span<const LocatedEvent> events,
                                                  Eigen::Index num_stocks) {
  std::vector<std::vector<StockEvent>> out(static_cast<std::size_t>(num_stocks));
  for (const auto& e : events) {
    if (e.stock < 0 || e.stock >= num_stocks) throw Error("event stock index out of range");
    out[static_cast<std::size_t>(e.stock)].push_back({e.day, e.actions, e.return_1d});
  }
  for (auto& list : out) {
    std::stable_sort(list.begin(), list.end(),
                     [](const StockEvent& a, const StockEvent& b) { return a.day < b.day; });
  }
  return out;
}

AnchorInputs prepare_inputs(const ModelConfig& config, std::span<const Matrix> windows,
                            std::span<const std::vector<StockEvent>> events_by_stock,
                            Eigen::Index anchor, const LabelVector* labels) {
  AnchorInputs in;
  in.anchor = anchor;
  const auto n = static_cast<Eigen::Index>(windows.size());
  if (n == 0) throw Error("no stocks in the window batch");
  in.num_stocks = n;
  if (config.use_mdwt) {
    in.bands = pool_bands(windows, config.wavelet);
  } else {
    const auto len = windows.front().rows();
    const auto d = windows.front().cols();
    for (Eigen::Index t = 0; t < len; ++t) {
      Matrix step(n, d);
      for (Eigen::Index i = 0; i < n; ++i) step.row(i) = windows[static_cast<std::size_t>(i)].row(t);
      in.steps.push_back(std::move(step));
    }
  }

  in.eq_target = Matrix::Zero(n, kNumPlayers);
  in.evented.assign(static_cast<std::size_t>(n), false);
  std::vector<RowVector> feature_rows;
  std::vector<std::pair<Eigen::Index, double>> weight_entries;
  if (config.use_gre) {
    if (events_by_stock.size() != static_cast<std::size_t>(n)) {
      throw Error("event lists do not match the number of stocks");
    }
    const DecaySpec decay{config.alpha_decay, config.lookback};
    for (Eigen::Index i = 0; i < n; ++i) {
      std::vector<Eigen::Index> days;
      std::vector<const StockEvent*> in_window;
      for (const auto& e : events_by_stock[static_cast<std::size_t>(i)]) {
        if (e.day > anchor - config.lookback && e.day <= anchor) {
          days.push_back(e.day);
          in_window.push_back(&e);
        }
      }
      if (days.empty()) continue;
      const Vector w = decay_weights(days, anchor, decay);
      for (std::size_t j = 0; j < in_window.size(); ++j) {
        feature_rows.push_back(event_features(anchor - in_window[j]->day, in_window[j]->actions,
                                              config.pos_dim));
        weight_entries.emplace_back(i, w(static_cast<Eigen::Index>(j)));
      }
      const auto eq = solve_equilibrium(in_window.back()->return_1d, config.game);
      for (int p = 0; p < kNumPlayers; ++p) in.eq_target(i, p) = eq.actions[static_cast<std::size_t>(p)];
      in.evented[static_cast<std::size_t>(i)] = true;
    }
  }
  const auto e = static_cast<Eigen::Index>(feature_rows.size());
  in.event_features.resize(e, config.pos_dim + kNumPlayers);
  in.event_weights = Matrix::Zero(n, e);
  for (Eigen::Index j = 0; j < e; ++j) {
    in.event_features.row(j) = feature_rows[static_cast<std::size_t>(j)];
    in.event_weights(weight_entries[static_cast<std::size_t>(j)].first, j) =
        weight_entries[static_cast<std::size_t>(j)].second;
  }

  in.labels = Matrix::Zero(n, 1);
  in.labeled.assign(static_cast<std::size_t>(n), false);
  if (labels != nullptr) {
    if (labels->y.size() != n) throw Error("label vector does not match the number of stocks");
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!labels->available[static_cast<std::size_t>(i)]) continue;
      in.labels(i, 0) = labels->y(i);
      in.labeled[static_cast<std::size_t>(i)] = true;
    }
  }
  return in;
}

double loss_total(double l_pred, double l_eq, double lambda_eq) { return l_pred + lambda_eq * l_eq; }

double loss_total(const Vector& pred, const Vector& labels, const std::vector<bool>& labeled,
                  const Matrix& actions, const Matrix& targets, const std::vector<bool>& evented,
                  double lambda_eq) {
  if (pred.size() != labels.size() || labeled.size() != static_cast<std::size_t>(pred.size())) {
    throw Error("prediction and label shapes differ");
  }
  double sum = 0.0;
  double count = 0.0;
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    if (!labeled[static_cast<std::size_t>(i)]) continue;
    sum += (pred(i) - labels(i)) * (pred(i) - labels(i));
    count += 1.0;
  }
  if (count == 0.0) throw Error("no labeled stocks for the prediction loss");
  const auto eq = equilibrium_loss(actions, targets, evented);
  return loss_total(sum / count, eq.value, lambda_eq);
}

NodeFeatures parse_node_features(std::string_view name) {
  if (name == "member_mean") return NodeFeatures::kMemberMean;
  if (name == "learned") return NodeFeatures::kLearned;
  throw ConfigError("unknown node feature mode '" + std::string(name) +
                    "' (expected member_mean or learned)");
}

std::string_view node_features_name(NodeFeatures mode) {
  return mode == NodeFeatures::kLearned ? "learned" : "member_mean";
}

Forecaster::Forecaster(ModelConfig config, Eigen::Index in_dim, const HeteroGraph& graph,
                       std::uint64_t seed)
    : config_(std::move(config)), in_dim_(in_dim), graph_(graph) {
  config_.validate();
  if (in_dim_ <= 0) throw Error("input width must be positive");
  ops_ = relation_operators(graph_, config_.normalization);
  members_ = member_means(graph_);
  nn::Rng rng(seed);
  build(rng);
}

Forecaster::Forecaster(ModelConfig config, Eigen::Index in_dim, const HeteroGraph& graph,
                       nn::ParameterSet params)
    : config_(std::move(config)), in_dim_(in_dim), graph_(graph) {
  config_.validate();
  ops_ = relation_operators(graph_, config_.normalization);
  members_ = member_means(graph_);
  nn::Rng rng(0);
  build(rng);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto j = params.find(params_.name(i));
    if (!j) throw Error("checkpoint lacks parameter '" + params_.name(i) + "'");
    const auto& v = params.value(*j);
    if (v.rows() != params_.value(i).rows() || v.cols() != params_.value(i).cols()) {
      throw Error("checkpoint parameter '" + params_.name(i) + "' has the wrong shape");
    }
    params_.value(i) = v;
  }
  if (params.size() != params_.size()) throw Error("checkpoint has parameters this model does not use");
}

void Forecaster::build(nn::Rng& rng) {
  const auto m = config_.embed_dim;
  const auto d = in_dim_;
  auto weight = [&](const std::string& name, Eigen::Index r, Eigen::Index c) {
    params_.add(name, nn::glorot_uniform(r, c, rng));
  };
  auto zeros = [&](const std::string& name, Eigen::Index r, Eigen::Index c) {
    params_.add(name, Matrix::Zero(r, c));
  };

  if (config_.use_mdwt) {
    for (int k = 1; k <= config_.wavelet.level; ++k) {
      weight(level_name(k, "w"), d, m);
      zeros(level_name(k, "b"), 1, m);
    }
    weight("temporal.att.w1", m, config_.attention_hidden);
    zeros("temporal.att.b1", 1, config_.attention_hidden);
    weight("temporal.att.w2", config_.attention_hidden, 1);
    zeros("temporal.att.b2", 1, 1);
    weight("temporal.trend.w", d, m);
    zeros("temporal.trend.b", 1, m);
    weight("temporal.gate.w", m, m);
    zeros("temporal.gate.b", 1, m);
  } else {
    for (const char* gate : {"z", "r", "h"}) {
      weight(std::string("gru.w") + gate, d, m);
      weight(std::string("gru.u") + gate, m, m);
      zeros(std::string("gru.b") + gate, 1, m);
    }
    weight("gru.proj.w", m, m);
    zeros("gru.proj.b", 1, m);
  }

  if (config_.use_hgcn) {
    const auto others = graph_.num_nodes() - graph_.num_stocks;
    if (config_.node_features == NodeFeatures::kLearned && others > 0) {
      params_.add("graph.node_embed", nn::uniform(others, m, 0.01, rng));
    }
    for (int layer = 0; layer < config_.graph_layers; ++layer) {
      const auto in = layer_in(config_, layer);
      const auto out = layer_out(config_, layer);
      weight(graph_name(layer + 1, "self"), in, out);
      for (int r = 0; r < kNumRelations; ++r) {
        weight(graph_name(layer + 1, std::string(kRelationNames[static_cast<std::size_t>(r)])), in, out);
      }
    }
  }

  if (config_.use_gre) {
    weight("event.w1", config_.pos_dim + kNumPlayers, m);
    zeros("event.b1", 1, m);
    weight("event.w2", m, m);
    zeros("event.b2", 1, m);
    weight("fuse.wz", 2 * m, m);
    zeros("fuse.bz", 1, m);
    weight("action.w1", m, config_.action_hidden);
    zeros("action.b1", 1, config_.action_hidden);
    weight("action.w2", config_.action_hidden, kNumPlayers);
    zeros("action.b2", 1, kNumPlayers);
  }

  params_.add("head.gamma", Matrix::Ones(1, m));
  zeros("head.beta", 1, m);
  weight("head.w", m, 1);
  zeros("head.b", 1, 1);
}

ForwardVars Forecaster::forward(nn::Binding& binding, const AnchorInputs& in) const {
  auto& tape = binding.tape();
  auto p = [&](const std::string& name) { return binding[params_.at(name)]; };
  const auto n = in.num_stocks;
  const auto m = config_.embed_dim;
  if (!(config_.label_scale > 0.0)) throw Error("label_scale must be resolved before a forward pass");
  if (n != graph_.num_stocks) {
    throw Error("anchor has " + std::to_string(n) + " stocks, graph has " +
                std::to_string(graph_.num_stocks));
  }

  ad::Var h;
  if (config_.use_mdwt) {
    taped::TemporalVars v;
    for (int k = 1; k <= config_.wavelet.level; ++k) {
      v.level_w.push_back(p(level_name(k, "w")));
      v.level_b.push_back(p(level_name(k, "b")));
    }
    v.att_w1 = p("temporal.att.w1");
    v.att_b1 = p("temporal.att.b1");
    v.att_w2 = p("temporal.att.w2");
    v.att_b2 = p("temporal.att.b2");
    v.trend_w = p("temporal.trend.w");
    v.trend_b = p("temporal.trend.b");
    v.gate_w = p("temporal.gate.w");
    v.gate_b = p("temporal.gate.b");
    h = taped::embed(in.bands, v);
  } else {
    taped::GruVars v{p("gru.wz"), p("gru.uz"), p("gru.bz"), p("gru.wr"), p("gru.ur"), p("gru.br"),
                     p("gru.wh"), p("gru.uh"), p("gru.bh"), p("gru.proj.w"), p("gru.proj.b")};
    h = taped::gru_encode(in.steps, v);
  }

  if (config_.use_hgcn) {
    ad::Var features = h;
    if (graph_.num_nodes() > n) {
      const ad::Var parts[] = {h, config_.node_features == NodeFeatures::kLearned
                                      ? p("graph.node_embed")
                                      : ad::matmul(members_, h)};
      features = ad::vcat(parts);
    }
    for (int layer = 1; layer <= config_.graph_layers; ++layer) {
      std::array<ad::Var, kNumRelations> rel;
      for (int r = 0; r < kNumRelations; ++r) {
        rel[static_cast<std::size_t>(r)] =
            p(graph_name(layer, std::string(kRelationNames[static_cast<std::size_t>(r)])));
      }
      features = rgcn_layer(features, ops_, rel, p(graph_name(layer, "self")));
    }
    h = ad::middle_rows(features, 0, n);
  }

  ForwardVars out;
  out.l_eq = tape.constant(Matrix::Zero(1, 1));
  if (config_.use_gre) {
    ad::Var g;
    if (in.event_features.rows() > 0) {
      auto v = taped::encode_events(tape.constant(in.event_features), p("event.w1"), p("event.b1"),
                                    p("event.w2"), p("event.b2"));
      g = ad::matmul(in.event_weights, v);
    } else {
      g = tape.constant(Matrix::Zero(n, m));
    }
    h = taped::gated_fuse(h, g, p("fuse.wz"), p("fuse.bz"));
    out.actions = taped::predict_actions(h, p("action.w1"), p("action.b1"), p("action.w2"),
                                         p("action.b2"));
    out.eq_empty = std::none_of(in.evented.begin(), in.evented.end(), [](bool b) { return b; });
    out.l_eq = ad::masked_row_mse(out.actions, in.eq_target, in.evented);
  }

  const double scale = config_.label_scale;
  auto normed = ad::add_row(ad::mul_row(ad::normalize_rows(h), p("head.gamma")), p("head.beta"));
  auto raw = ad::add_row(ad::matmul(normed, p("head.w")), p("head.b"));
  out.score = scale * raw;
  out.l_pred = ad::masked_row_mse(raw, in.labels / scale, in.labeled);
  out.total = config_.use_gre ? out.l_pred + config_.lambda_eq * out.l_eq : out.l_pred;
  return out;
}

Vector Forecaster::predict(const AnchorInputs& inputs) const {
  ad::Tape tape;
  nn::Binding binding(tape, params_);
  return forward(binding, inputs).score.value().col(0);
}

bool EarlyStopping::update(int epoch, double loss) {
  if (!seen_ || loss < best_) {
    seen_ = true;
    best_ = loss;
    best_epoch_ = epoch;
    stale_ = 0;
    return true;
  }
  ++stale_;
  return false;
}

PlateauScheduler::PlateauScheduler(double lr, double factor, int patience, double floor)
    : lr_(lr), factor_(factor), patience_(patience), floor_(floor) {}

double PlateauScheduler::update(double loss) {
  if (!seen_ || loss < best_) {
    seen_ = true;
    best_ = loss;
    stale_ = 0;
    return lr_;
  }
  if (++stale_ >= patience_) {
    lr_ = std::max(lr_ * factor_, floor_);
    stale_ = 0;
  }
  return lr_;
}

namespace {

struct PreparedDay {
  AnchorInputs inputs;
  Vector labels;
};

std::vector<PreparedDay> prepare_days(const ModelConfig& config, const StockPanel& standardized,
                                      std::span<const Eigen::Index> anchors,
                                      std::span<const std::vector<StockEvent>> events) {
  std::vector<PreparedDay> out;
  out.reserve(anchors.size());
  for (auto anchor : anchors) {
    auto batch = make_window(standardized, config.lookback, anchor);
    if (config.window_anchor) anchor_windows(batch);
    const auto labels = compute_labels(standardized, anchor);
    out.push_back({prepare_inputs(config, batch.windows, events, anchor, &labels), labels.y});
  }
  return out;
}

bool any_labeled(const AnchorInputs& in) {
  return std::any_of(in.labeled.begin(), in.labeled.end(), [](bool b) { return b; });
}

double masked_mse(const Vector& pred, const AnchorInputs& in) {
  double sum = 0.0;
  double count = 0.0;
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    if (!in.labeled[static_cast<std::size_t>(i)]) continue;
    const double d = pred(i) - in.labels(i, 0);
    sum += d * d;
    count += 1.0;
  }
  return sum / count;
}

// Population standard deviation of every labeled entry; 1 when degenerate.
double label_std(const std::vector<PreparedDay>& days) {
  double sum = 0.0;
  double sq = 0.0;
  double count = 0.0;
  for (const auto& d : days) {
    for (Eigen::Index i = 0; i < d.inputs.labels.rows(); ++i) {
      if (!d.inputs.labeled[static_cast<std::size_t>(i)]) continue;
      sum += d.inputs.labels(i, 0);
      count += 1.0;
    }
  }
  const double mean = sum / count;
  for (const auto& d : days) {
    for (Eigen::Index i = 0; i < d.inputs.labels.rows(); ++i) {
      if (!d.inputs.labeled[static_cast<std::size_t>(i)]) continue;
      sq += (d.inputs.labels(i, 0) - mean) * (d.inputs.labels(i, 0) - mean);
    }
  }
  const double sd = std::sqrt(sq / count);
  return sd > 0.0 && std::isfinite(sd) ? sd : 1.0;
}

}  // namespace

TrainResult train(const ModelConfig& model, const TrainConfig& config, const MarketData& data,
                  const EpochCallback& on_epoch) {
  model.validate();
  config.validate();
  data.split.validate();
  TrainResult result;
  result.stats = fit_standardization(data.panel, data.split, &result.warnings);
  const auto panel = apply_standardization(data.panel, result.stats);
  const auto events = group_events(data.events, panel.num_stocks());

  const auto train_anchors = anchors_in(panel, data.split.train, model.lookback);
  const auto valid_anchors = anchors_in(panel, data.split.valid, model.lookback);
  if (train_anchors.empty()) throw Error("training split has no anchor days with a full window");
  if (valid_anchors.empty()) throw Error("validation split has no anchor days with a full window");

  auto train_days = prepare_days(model, panel, train_anchors, events);
  std::erase_if(train_days, [](const PreparedDay& d) { return !any_labeled(d.inputs); });
  auto valid_days = prepare_days(model, panel, valid_anchors, events);
  std::erase_if(valid_days, [](const PreparedDay& d) { return !any_labeled(d.inputs); });
  if (train_days.empty() || valid_days.empty()) throw Error("no labeled anchor days in train or valid");

  result.model = model;
  if (result.model.label_scale == 0.0) result.model.label_scale = label_std(train_days);
  const double scale2 = result.model.label_scale * result.model.label_scale;
  Forecaster net(result.model, kNumChannels, data.graph, config.seed);
  auto& params = net.params();
  nn::AdamW optimizer(params, {config.learning_rate, config.weight_decay});
  EarlyStopping stopper(config.patience);
  PlateauScheduler scheduler(config.learning_rate, config.plateau_factor, config.plateau_patience,
                             config.min_learning_rate);
  nn::Rng shuffle_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(train_days.size());
  std::iota(order.begin(), order.end(), 0);
  result.params = params;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    // Fisher-Yates with an explicit modulus so the order is library-independent.
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle_rng() % i]);
    }
    const double lr = optimizer.learning_rate();
    double train_sum = 0.0;
    for (auto idx : order) {
      ad::Tape tape;
      nn::Binding binding(tape, params);
      const auto fv = net.forward(binding, train_days[idx].inputs);
      const double loss = fv.total.scalar();
      if (!std::isfinite(loss)) {
        throw Error("training diverged at epoch " + std::to_string(epoch) + " (anchor " +
                    panel.dates[static_cast<std::size_t>(train_days[idx].inputs.anchor)].str() +
                    ", loss " + std::to_string(loss) + ")");
      }
      tape.backward(fv.total);
      optimizer.step(params, binding.gradients());
      train_sum += loss;
    }

    double valid_sum = 0.0;
    std::vector<double> ics;
    for (const auto& day : valid_days) {
      const Vector pred = net.predict(day.inputs);
      valid_sum += masked_mse(pred, day.inputs) / scale2;
      if (auto ic = daily_ic(std::span<const double>(pred.data(), static_cast<std::size_t>(pred.size())),
                             std::span<const double>(day.labels.data(), static_cast<std::size_t>(day.labels.size())))) {
        ics.push_back(*ic);
      }
    }
    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = train_sum / static_cast<double>(train_days.size());
    record.valid_loss = valid_sum / static_cast<double>(valid_days.size());
    record.learning_rate = lr;
    if (!ics.empty()) {
      record.valid_ic = std::accumulate(ics.begin(), ics.end(), 0.0) / static_cast<double>(ics.size());
    }
    if (!std::isfinite(record.train_loss) || !std::isfinite(record.valid_loss)) {
      throw Error("training diverged at epoch " + std::to_string(epoch));
    }
    result.log.push_back(record);
    if (stopper.update(epoch, record.valid_loss)) result.params = params;
    optimizer.set_learning_rate(scheduler.update(record.valid_loss));
    if (on_epoch) on_epoch(record);
    if (stopper.should_stop()) break;
  }
  result.best_epoch = stopper.best_epoch();
  return result;
}

void write_training_log(std::span<const EpochRecord> log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << "epoch,train_loss,valid_loss,lr\n";
  for (const auto& r : log) {
    out << r.epoch << ',' << csv::format(r.train_loss) << ',' << csv::format(r.valid_loss) << ','
        << csv::format(r.learning_rate) << '\n';
  }
}

namespace {

using nlohmann::json;

json matrix_json(const Matrix& m) {
  json data = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix json_matrix(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) throw Error("matrix size mismatch in checkpoint");
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = data[static_cast<std::size_t>(i * cols + k)].get<double>();
  }
  return m;
}

json model_json(const ModelConfig& c) {
  json beta = json::array();
  for (const auto& row : c.game.beta) {
    for (double b : row) beta.push_back(b);
  }
  return {{"lookback", c.lookback},
          {"wavelet_name", c.wavelet.name},
          {"wavelet_level", c.wavelet.level},
          {"wavelet_boundary", std::string(wavelet::boundary_name(c.wavelet.boundary))},
          {"embed_dim", c.embed_dim},
          {"graph_hidden", c.graph_hidden},
          {"graph_layers", c.graph_layers},
          {"attention_hidden", c.attention_hidden},
          {"action_hidden", c.action_hidden},
          {"pos_dim", c.pos_dim},
          {"lambda_eq", c.lambda_eq},
          {"label_scale", c.label_scale},
          {"alpha_decay", c.alpha_decay},
          {"window_anchor", c.window_anchor},
          {"use_mdwt", c.use_mdwt},
          {"use_hgcn", c.use_hgcn},
          {"use_gre", c.use_gre},
          {"normalization", std::string(normalization_name(c.normalization))},
          {"node_features", std::string(node_features_name(c.node_features))},
          {"lambda_follow", c.game.lambda_follow},
          {"beta", beta}};
}

ModelConfig json_model(const json& j) {
  ModelConfig c;
  c.lookback = j.at("lookback").get<Eigen::Index>();
  c.wavelet.name = j.at("wavelet_name").get<std::string>();
  c.wavelet.level = j.at("wavelet_level").get<int>();
  c.wavelet.boundary = wavelet::parse_boundary(j.at("wavelet_boundary").get<std::string>());
  c.embed_dim = j.at("embed_dim").get<Eigen::Index>();
  c.graph_hidden = j.at("graph_hidden").get<Eigen::Index>();
  c.graph_layers = j.at("graph_layers").get<int>();
  c.attention_hidden = j.at("attention_hidden").get<Eigen::Index>();
  c.action_hidden = j.at("action_hidden").get<Eigen::Index>();
  c.pos_dim = j.at("pos_dim").get<int>();
  c.lambda_eq = j.at("lambda_eq").get<double>();
  c.label_scale = j.at("label_scale").get<double>();
  c.alpha_decay = j.at("alpha_decay").get<double>();
  c.window_anchor = j.at("window_anchor").get<bool>();
  c.use_mdwt = j.at("use_mdwt").get<bool>();
  c.use_hgcn = j.at("use_hgcn").get<bool>();
  c.use_gre = j.at("use_gre").get<bool>();
  c.normalization = parse_normalization(j.at("normalization").get<std::string>());
  c.node_features = parse_node_features(j.at("node_features").get<std::string>());
  c.game.lambda_follow = j.at("lambda_follow").get<double>();
  const auto& beta = j.at("beta");
  if (beta.size() != kNumPlayers * kNumPlayers) throw Error("checkpoint beta must have 9 entries");
  for (int p = 0; p < kNumPlayers; ++p) {
    for (int q = 0; q < kNumPlayers; ++q) {
      c.game.beta[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)] =
          beta[static_cast<std::size_t>(p * kNumPlayers + q)].get<double>();
    }
  }
  return c;
}

json train_json(const TrainConfig& t) {
  return {{"learning_rate", t.learning_rate},   {"weight_decay", t.weight_decay},
          {"max_epochs", t.max_epochs},         {"patience", t.patience},
          {"plateau_patience", t.plateau_patience}, {"plateau_factor", t.plateau_factor},
          {"min_learning_rate", t.min_learning_rate}, {"seed", t.seed}};
}

TrainConfig json_train(const json& j) {
  TrainConfig t;
  t.learning_rate = j.at("learning_rate").get<double>();
  t.weight_decay = j.at("weight_decay").get<double>();
  t.max_epochs = j.at("max_epochs").get<int>();
  t.patience = j.at("patience").get<int>();
  t.plateau_patience = j.at("plateau_patience").get<int>();
  t.plateau_factor = j.at("plateau_factor").get<double>();
  t.min_learning_rate = j.at("min_learning_rate").get<double>();
  t.seed = j.at("seed").get<std::uint64_t>();
  return t;
}

}  // namespace

void save_checkpoint(const Checkpoint& c, const std::string& path) {
  json params = json::array();
  for (std::size_t i = 0; i < c.params.size(); ++i) {
    auto entry = matrix_json(c.params.value(i));
    entry["name"] = c.params.name(i);
    params.push_back(std::move(entry));
  }
  const json doc = {{"version", kCheckpointVersion},
                    {"model", model_json(c.model)},
                    {"train", train_json(c.train)},
                    {"in_dim", c.in_dim},
                    {"stocks", c.stocks},
                    {"node_ids", c.node_ids},
                    {"stats", {{"mean", matrix_json(c.stats.mean)}, {"stddev", matrix_json(c.stats.stddev)}}},
                    {"params", std::move(params)}};
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << doc.dump(1) << '\n';
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open checkpoint '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
    if (doc.at("version").get<std::string>() != kCheckpointVersion) {
      throw Error("checkpoint '" + path + "' has unsupported version " + doc.at("version").dump());
    }
    Checkpoint c;
    c.model = json_model(doc.at("model"));
    c.train = json_train(doc.at("train"));
    c.in_dim = doc.at("in_dim").get<Eigen::Index>();
    c.stocks = doc.at("stocks").get<std::vector<std::string>>();
    c.node_ids = doc.at("node_ids").get<std::vector<std::string>>();
    c.stats.mean = json_matrix(doc.at("stats").at("mean"));
    c.stats.stddev = json_matrix(doc.at("stats").at("stddev"));
    for (const auto& p : doc.at("params")) c.params.add(p.at("name").get<std::string>(), json_matrix(p));
    return c;
  } catch (const json::exception& e) {
    throw Error("malformed checkpoint '" + path + "': " + e.what());
  }
}

namespace {

std::string set_difference_text(const std::vector<std::string>& expected,
                                const std::vector<std::string>& actual) {
  std::vector<std::string> a = expected;
  std::vector<std::string> b = actual;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<std::string> missing;
  std::vector<std::string> extra;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(missing));
  std::set_difference(b.begin(), b.end(), a.begin(), a.end(), std::back_inserter(extra));
  std::ostringstream out;
  auto list = [&](const char* what, const std::vector<std::string>& v) {
    if (v.empty()) return;
    out << ' ' << what << ':';
    for (const auto& s : v) out << ' ' << s;
  };
  list("missing", missing);
  list("unexpected", extra);
  if (missing.empty() && extra.empty()) out << " same members in a different order";
  return out.str();
}

}  // namespace

PredictionTable predict(const Checkpoint& checkpoint, const MarketData& data,
                        const DateRange& range) {
  if (checkpoint.stocks != data.panel.stocks) {
    throw Error("panel stocks differ from the checkpoint:" +
                set_difference_text(checkpoint.stocks, data.panel.stocks));
  }
  if (checkpoint.node_ids != data.graph.node_ids) {
    throw Error("graph nodes differ from the checkpoint:" +
                set_difference_text(checkpoint.node_ids, data.graph.node_ids));
  }
  Forecaster net(checkpoint.model, checkpoint.in_dim, data.graph, checkpoint.params);
  const auto panel = apply_standardization(data.panel, checkpoint.stats);
  const auto events = group_events(data.events, panel.num_stocks());
  PredictionTable table;
  table.stocks = panel.stocks;
  std::vector<Eigen::Index> anchors;
  if (!(range.end < range.start)) anchors = anchors_in(panel, range, checkpoint.model.lookback);
  table.values.resize(static_cast<Eigen::Index>(anchors.size()), panel.num_stocks());
  for (std::size_t k = 0; k < anchors.size(); ++k) {
    auto batch = make_window(panel, checkpoint.model.lookback, anchors[k]);
    if (checkpoint.model.window_anchor) anchor_windows(batch);
    const auto inputs = prepare_inputs(checkpoint.model, batch.windows, events, anchors[k], nullptr);
    table.dates.push_back(panel.dates[static_cast<std::size_t>(anchors[k])]);
    table.values.row(static_cast<Eigen::Index>(k)) = net.predict(inputs).transpose();
  }
  return table;
}

PredictionTable label_table(const StockPanel& panel, const DateRange& range, Eigen::Index lookback) {
  PredictionTable table;
  table.stocks = panel.stocks;
  std::vector<Eigen::Index> anchors;
  if (!(range.end < range.start)) anchors = anchors_in(panel, range, lookback);
  table.values.resize(static_cast<Eigen::Index>(anchors.size()), panel.num_stocks());
  for (std::size_t k = 0; k < anchors.size(); ++k) {
    table.dates.push_back(panel.dates[static_cast<std::size_t>(anchors[k])]);
    table.values.row(static_cast<Eigen::Index>(k)) = compute_labels(panel, anchors[k]).y.transpose();
  }
  return table;
}

}  // namespace gamestock
