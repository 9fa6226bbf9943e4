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

// Trading-list game events and the three-player investor game.
//
// Players are institutions (0), hot money (1) and retail (2); each picks an
// action in {-1, 0, 1} (sell, hold, buy). Player p's payoff is
//
//   u_p(a) = a_p * r + lambda * a_p * sum_{q != p} beta[p][q] * a_q,
//
// linear in a_p, so the best response is the sign of the coefficient
// c_p = r + lambda * sum_{q != p} beta[p][q] * a_q (any action when c_p = 0).

#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "gamestock/autodiff.hpp"
#include "gamestock/common.hpp"

namespace gamestock {

struct StockPanel;

inline constexpr int kNumPlayers = 3;
using ActionProfile = std::array<int, kNumPlayers>;

void check_action(int a);  // throws Error unless a is -1, 0 or 1

struct GameEvent {
  Date date;
  std::string stock;
  ActionProfile actions{};
  double return_1d = 0.0;
};

std::vector<GameEvent> load_events(const std::string& path);
void write_events(const std::vector<GameEvent>& events, const std::string& path);

// An event resolved against a panel's stock list and calendar.
struct LocatedEvent {
  Eigen::Index stock = 0;
  Eigen::Index day = 0;
  ActionProfile actions{};
  double return_1d = 0.0;
};

// Events whose stock is not in the panel are skipped with a warning; dates
// outside the calendar are an error.
std::vector<LocatedEvent> locate_events(const std::vector<GameEvent>& events,
                                        const StockPanel& panel, Warnings* warnings = nullptr);

struct DecaySpec {
  double rate = 0.1;          // per trading day, > 0
  Eigen::Index window = 20;   // events in [t - window + 1, t] count
};

// Normalized exponential-decay weights for one stock's in-window events,
// given as calendar day indices. Empty input gives an empty result.
Vector decay_weights(std::span<const Eigen::Index> event_days, Eigen::Index anchor,
                     const DecaySpec& spec);

// Sinusoidal embedding of a day offset: width/2 sines followed by width/2
// cosines, frequencies 10000^(-2i/width).
RowVector positional_embedding(double offset, int width);

// [pos_emb(t - d); a_ins; a_hot; a_ret]
RowVector event_features(Eigen::Index age, const ActionProfile& actions, int pos_dim);

struct EventEncoderParams {
  Matrix w1;  // (pos_dim + 3) x M
  Matrix b1;  // 1 x M
  Matrix w2;  // M x M
  Matrix b2;  // 1 x M
};

// v = W2 tanh(W1 x + b1) + b2 applied to event_features.
RowVector encode_event(Eigen::Index age, const ActionProfile& actions,
                       const EventEncoderParams& params, int pos_dim);

// g = sum_j weights_j * encodings.row(j); zeros(width) when there are none.
RowVector aggregate_signal(const Vector& weights, const Matrix& encodings, Eigen::Index width);

struct GateParams {
  Matrix wz;  // 2M x M, acting on [h; g]
  Matrix bz;  // 1 x M
};

// z = sigmoid([h, g] Wz + bz); returns z .* h + (1 - z) .* g.
Matrix gated_fuse(const Matrix& h, const Matrix& g, const GateParams& params);

struct GameSpec {
  std::array<std::array<double, kNumPlayers>, kNumPlayers> beta{};  // beta[p][q]
  double lambda_follow = 0.1;

  static GameSpec defaults();
  void validate() const;  // zero diagonal, lambda >= 0, finite entries
};

double payoff(int player, const ActionProfile& profile, double r, const GameSpec& spec);

enum class EquilibriumStatus { kPure, kFallbackRegret };

struct EquilibriumProfile {
  ActionProfile actions{};
  EquilibriumStatus status = EquilibriumStatus::kPure;
  double regret = 0.0;
};

// Best-response coefficient c_p for the given profile.
double response_coefficient(int player, const ActionProfile& profile, double r,
                            const GameSpec& spec);
// sum_p (max_a u_p(a, a_-p) - u_p(a_p, a_-p))
double total_regret(const ActionProfile& profile, double r, const GameSpec& spec);

// All pure equilibria in lexicographic profile order.
std::vector<ActionProfile> pure_equilibria(double r, const GameSpec& spec);

// Pure equilibrium with the fewest non-hold actions, then lexicographically
// smallest; without one, the minimum-total-regret profile under the same
// tie-break.
EquilibriumProfile solve_equilibrium(double r, const GameSpec& spec);

// Ties in solve_equilibrium are broken by this order.
bool tie_break_less(const ActionProfile& a, const ActionProfile& b);

// tanh(tanh(x W1 + b1) W2 + b2), one row per stock.
struct ActionHeadParams {
  Matrix w1;
  Matrix b1;
  Matrix w2;  // hidden x 3
  Matrix b2;  // 1 x 3
};
Matrix predict_actions(const Matrix& state, const ActionHeadParams& params);

struct EquilibriumLoss {
  double value = 0.0;
  bool empty = true;  // no stock selected
};

// Mean over selected rows of the squared distance between predicted and
// equilibrium actions.
EquilibriumLoss equilibrium_loss(const Matrix& predicted, const Matrix& target,
                                 const std::vector<bool>& selected);

// Taped forms used by the forecaster; the plain functions above wrap these.
namespace taped {

// Rows of `features` are event_features; returns one encoding per row.
ad::Var encode_events(const ad::Var& features, const ad::Var& w1, const ad::Var& b1,
                      const ad::Var& w2, const ad::Var& b2);
ad::Var gated_fuse(const ad::Var& h, const ad::Var& g, const ad::Var& wz, const ad::Var& bz);
ad::Var predict_actions(const ad::Var& state, const ad::Var& w1, const ad::Var& b1,
                        const ad::Var& w2, const ad::Var& b2);

}  // namespace taped

}  // namespace gamestock
