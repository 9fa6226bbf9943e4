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

#include "gamestock/game.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "csv.hpp"
#include "gamestock/autodiff.hpp"
#include "gamestock/market_data.hpp"

namespace gamestock {

void check_action(int a) {
  if (a < -1 || a > 1) throw Error("action " + std::to_string(a) + " outside {-1, 0, 1}");
}

std::vector<GameEvent> load_events(const std::string& path) {
  csv::Reader reader(path);
  reader.expect_header({"date", "stock_id", "a_ins", "a_hot", "a_ret", "return_1d"});
  std::vector<GameEvent> out;
  std::set<std::pair<std::string, Date>> seen;
  std::vector<std::string_view> f;
  while (reader.next(f)) {
    if (f.size() != 6) reader.fail("expected 6 fields, got " + std::to_string(f.size()));
    GameEvent e;
    e.date = reader.to_date(f[0]);
    e.stock = std::string(f[1]);
    for (int p = 0; p < kNumPlayers; ++p) {
      e.actions[static_cast<std::size_t>(p)] = reader.to_int(f[2 + p]);
      if (e.actions[static_cast<std::size_t>(p)] < -1 || e.actions[static_cast<std::size_t>(p)] > 1) {
        reader.fail("action outside {-1, 0, 1}");
      }
    }
    e.return_1d = reader.to_double(f[5]);
    if (!std::isfinite(e.return_1d)) reader.fail("non-finite return");
    if (!seen.emplace(e.stock, e.date).second) reader.fail("duplicate event for " + e.stock);
    out.push_back(std::move(e));
  }
  return out;
}

void write_events(const std::vector<GameEvent>& events, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << "date,stock_id,a_ins,a_hot,a_ret,return_1d\n";
  for (const auto& e : events) {
    out << e.date.str() << ',' << e.stock << ',' << e.actions[0] << ',' << e.actions[1] << ','
        << e.actions[2] << ',' << csv::format(e.return_1d) << '\n';
  }
}

std::vector<LocatedEvent> locate_events(const std::vector<GameEvent>& events,
                                        const StockPanel& panel, Warnings* warnings) {
  std::vector<LocatedEvent> out;
  std::set<std::string> reported;
  for (const auto& e : events) {
    auto day = panel.day_index(e.date);
    if (!day) throw Error("event date " + e.date.str() + " is not a trading day of the panel");
    auto stock = panel.stock_index(e.stock);
    if (!stock) {
      if (warnings && reported.insert(e.stock).second) {
        warnings->push_back("events for stock " + e.stock + " ignored: not in panel");
      }
      continue;
    }
    out.push_back({*stock, *day, e.actions, e.return_1d});
  }
  std::sort(out.begin(), out.end(), [](const LocatedEvent& a, const LocatedEvent& b) {
    return std::tie(a.stock, a.day) < std::tie(b.stock, b.day);
  });
  return out;
}

Vector decay_weights(std::span<const Eigen::Index> event_days, Eigen::Index anchor,
                     const DecaySpec& spec) {
  if (!(spec.rate > 0.0)) throw Error("decay rate must be positive");
  Vector w(static_cast<Eigen::Index>(event_days.size()));
  for (std::size_t j = 0; j < event_days.size(); ++j) {
    const auto age = anchor - event_days[j];
    if (age < 0 || age >= spec.window) {
      throw Error("event at day " + std::to_string(event_days[j]) + " outside window ending at " +
                  std::to_string(anchor));
    }
    w(static_cast<Eigen::Index>(j)) = std::exp(-spec.rate * static_cast<double>(age));
  }
  if (w.size() > 0) w /= w.sum();
  return w;
}

RowVector positional_embedding(double offset, int width) {
  if (width < 2 || width % 2 != 0) throw Error("positional embedding width must be even and >= 2");
  const int half = width / 2;
  RowVector out(width);
  for (int i = 0; i < half; ++i) {
    const double freq = std::pow(10000.0, -2.0 * i / width);
    out(i) = std::sin(offset * freq);
    out(half + i) = std::cos(offset * freq);
  }
  return out;
}

RowVector event_features(Eigen::Index age, const ActionProfile& actions, int pos_dim) {
  RowVector x(pos_dim + kNumPlayers);
  x.head(pos_dim) = positional_embedding(static_cast<double>(age), pos_dim);
  for (int p = 0; p < kNumPlayers; ++p) {
    check_action(actions[static_cast<std::size_t>(p)]);
    x(pos_dim + p) = actions[static_cast<std::size_t>(p)];
  }
  return x;
}

RowVector encode_event(Eigen::Index age, const ActionProfile& actions,
                       const EventEncoderParams& params, int pos_dim) {
  const RowVector x = event_features(age, actions, pos_dim);
  if (params.w1.rows() != x.size()) throw Error("event encoder input width mismatch");
  ad::Tape tape;
  auto v = taped::encode_events(tape.constant(x), tape.constant(params.w1), tape.constant(params.b1),
                                tape.constant(params.w2), tape.constant(params.b2));
  return v.value();
}

RowVector aggregate_signal(const Vector& weights, const Matrix& encodings, Eigen::Index width) {
  if (weights.size() == 0) return RowVector::Zero(width);
  if (encodings.rows() != weights.size() || encodings.cols() != width) {
    throw Error("aggregate_signal: encodings do not match weights");
  }
  return weights.transpose() * encodings;
}

Matrix gated_fuse(const Matrix& h, const Matrix& g, const GateParams& params) {
  ad::Tape tape;
  return taped::gated_fuse(tape.constant(h), tape.constant(g), tape.constant(params.wz),
                           tape.constant(params.bz))
      .value();
}

GameSpec GameSpec::defaults() {
  GameSpec s;
  s.lambda_follow = 0.1;
  s.beta[2][1] = 1.0;  // retail follows hot money
  s.beta[2][0] = 1.0;  // retail follows institutions
  s.beta[1][0] = 0.5;  // hot money follows institutions
  return s;
}

void GameSpec::validate() const {
  if (!(lambda_follow >= 0.0) || !std::isfinite(lambda_follow)) {
    throw Error("lambda_follow must be finite and non-negative");
  }
  for (int p = 0; p < kNumPlayers; ++p) {
    if (beta[p][p] != 0.0) throw Error("beta must have a zero diagonal");
    for (int q = 0; q < kNumPlayers; ++q) {
      if (!std::isfinite(beta[p][q])) throw Error("beta entries must be finite");
    }
  }
}

double payoff(int player, const ActionProfile& profile, double r, const GameSpec& spec) {
  if (player < 0 || player >= kNumPlayers) throw Error("player index out of range");
  for (int a : profile) check_action(a);
  const double own = profile[static_cast<std::size_t>(player)];
  double follow = 0.0;
  for (int q = 0; q < kNumPlayers; ++q) {
    if (q == player) continue;
    follow += spec.beta[player][q] * profile[static_cast<std::size_t>(q)];
  }
  return own * r + spec.lambda_follow * own * follow;
}

double response_coefficient(int player, const ActionProfile& profile, double r,
                            const GameSpec& spec) {
  double follow = 0.0;
  for (int q = 0; q < kNumPlayers; ++q) {
    if (q == player) continue;
    follow += spec.beta[player][q] * profile[static_cast<std::size_t>(q)];
  }
  return r + spec.lambda_follow * follow;
}

double total_regret(const ActionProfile& profile, double r, const GameSpec& spec) {
  double regret = 0.0;
  for (int p = 0; p < kNumPlayers; ++p) {
    const double c = response_coefficient(p, profile, r, spec);
    regret += std::abs(c) - profile[static_cast<std::size_t>(p)] * c;
  }
  return regret;
}

namespace {

std::vector<ActionProfile> all_profiles() {
  std::vector<ActionProfile> out;
  for (int x = -1; x <= 1; ++x) {
    for (int y = -1; y <= 1; ++y) {
      for (int z = -1; z <= 1; ++z) out.push_back({x, y, z});
    }
  }
  return out;
}

int activity(const ActionProfile& a) { return std::abs(a[0]) + std::abs(a[1]) + std::abs(a[2]); }

}  // namespace

bool tie_break_less(const ActionProfile& a, const ActionProfile& b) {
  const int ka = activity(a);
  const int kb = activity(b);
  if (ka != kb) return ka < kb;
  return a < b;
}

std::vector<ActionProfile> pure_equilibria(double r, const GameSpec& spec) {
  std::vector<ActionProfile> out;
  for (const auto& a : all_profiles()) {
    bool stable = true;
    for (int p = 0; p < kNumPlayers && stable; ++p) {
      // a_p is a best response iff a_p * c_p attains max(-c_p, 0, c_p) = |c_p|.
      const double c = response_coefficient(p, a, r, spec);
      stable = a[static_cast<std::size_t>(p)] * c >= std::abs(c);
    }
    if (stable) out.push_back(a);
  }
  return out;
}

EquilibriumProfile solve_equilibrium(double r, const GameSpec& spec) {
  const auto pure = pure_equilibria(r, spec);
  EquilibriumProfile out;
  if (!pure.empty()) {
    out.actions = *std::min_element(pure.begin(), pure.end(), tie_break_less);
    out.status = EquilibriumStatus::kPure;
    out.regret = 0.0;
    return out;
  }
  out.status = EquilibriumStatus::kFallbackRegret;
  out.regret = std::numeric_limits<double>::infinity();
  for (const auto& a : all_profiles()) {
    const double regret = total_regret(a, r, spec);
    if (regret < out.regret || (regret == out.regret && tie_break_less(a, out.actions))) {
      out.regret = regret;
      out.actions = a;
    }
  }
  return out;
}

Matrix predict_actions(const Matrix& state, const ActionHeadParams& params) {
  ad::Tape tape;
  return taped::predict_actions(tape.constant(state), tape.constant(params.w1),
                                tape.constant(params.b1), tape.constant(params.w2),
                                tape.constant(params.b2))
      .value();
}

EquilibriumLoss equilibrium_loss(const Matrix& predicted, const Matrix& target,
                                 const std::vector<bool>& selected) {
  if (predicted.rows() != target.rows() || predicted.cols() != target.cols() ||
      selected.size() != static_cast<std::size_t>(predicted.rows())) {
    throw Error("equilibrium_loss: shape mismatch");
  }
  EquilibriumLoss out;
  double count = 0.0;
  for (Eigen::Index i = 0; i < predicted.rows(); ++i) {
    if (!selected[static_cast<std::size_t>(i)]) continue;
    out.value += (predicted.row(i) - target.row(i)).squaredNorm();
    count += 1.0;
  }
  if (count > 0.0) {
    out.value /= count;
    out.empty = false;
  }
  return out;
}

namespace taped {

ad::Var encode_events(const ad::Var& features, const ad::Var& w1, const ad::Var& b1,
                      const ad::Var& w2, const ad::Var& b2) {
  auto hidden = ad::tanh(ad::add_row(ad::matmul(features, w1), b1));
  return ad::add_row(ad::matmul(hidden, w2), b2);
}

ad::Var gated_fuse(const ad::Var& h, const ad::Var& g, const ad::Var& wz, const ad::Var& bz) {
  if (h.rows() != g.rows() || h.cols() != g.cols()) throw Error("gated_fuse: h and g differ in shape");
  if (wz.rows() != 2 * h.cols() || wz.cols() != h.cols() || bz.cols() != h.cols()) {
    throw Error("gated_fuse: gate weight shape mismatch");
  }
  const ad::Var parts[] = {h, g};
  auto z = ad::sigmoid(ad::add_row(ad::matmul(ad::hcat(parts), wz), bz));
  return ad::cwise_product(z, h) + ad::cwise_product(ad::one_minus(z), g);
}

ad::Var predict_actions(const ad::Var& state, const ad::Var& w1, const ad::Var& b1,
                        const ad::Var& w2, const ad::Var& b2) {
  auto hidden = ad::tanh(ad::add_row(ad::matmul(state, w1), b1));
  return ad::tanh(ad::add_row(ad::matmul(hidden, w2), b2));
}

}  // namespace taped

}  // namespace gamestock
