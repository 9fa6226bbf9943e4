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


// A three-stock forecaster instance small enough for exhaustive finite
// differences over every parameter entry.

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gamestock/forecaster.hpp"
#include "gradcheck.hpp"

namespace gamestock::testing {

struct MicroInstance {
  ModelConfig config;
  HeteroGraph graph;
  AnchorInputs inputs;
};

// N=3, L=8, two db2 levels, D=3 and a single event on the middle stock.
inline MicroInstance make_micro_instance(std::uint64_t seed = 7) {
  MicroInstance mi;
  auto& c = mi.config;
  c.lookback = 8;
  c.wavelet.name = "db2";
  c.wavelet.level = 2;
  c.embed_dim = 4;
  c.graph_hidden = 5;
  c.graph_layers = 2;
  c.attention_hidden = 3;
  c.action_hidden = 3;
  c.pos_dim = 4;
  c.lambda_eq = 0.5;
  c.label_scale = 1.0;
  c.window_anchor = false;
  c.game.lambda_follow = 0.3;

  const std::vector<std::string> stocks = {"A", "B", "C"};
  mi.graph = build_graph(stocks, {{"A", "I1"}, {"B", "I1"}, {"C", "I2"}},
                         {{InvestorType::kHotMoney, "B", 0.7}, {InvestorType::kRetail, "C", 0.4}});

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<Matrix> windows;
  for (int i = 0; i < 3; ++i) windows.push_back(Matrix::NullaryExpr(8, 3, [&]() { return g(rng); }));
  const Eigen::Index anchor = 20;
  std::vector<std::vector<StockEvent>> events(3);
  events[1].push_back({anchor - 2, {1, -1, 1}, 0.04});
  LabelVector labels;
  labels.y = Vector::NullaryExpr(3, [&]() { return 0.5 * g(rng); });
  labels.available = {true, true, true};
  mi.inputs = prepare_inputs(c, windows, events, anchor, &labels);
  return mi;
}

inline double micro_loss(const Forecaster& net, const AnchorInputs& inputs) {
  ad::Tape tape;
  nn::Binding binding(tape, net.params());
  return net.forward(binding, inputs).total.scalar();
}

// Analytic gradient of L_total against central differences, every entry.
inline GradCheck check_micro_gradients(Forecaster& net, const AnchorInputs& inputs) {
  ad::Tape tape;
  nn::Binding binding(tape, net.params());
  const auto fv = net.forward(binding, inputs);
  tape.backward(fv.total);
  const auto grads = binding.gradients();
  std::vector<Matrix*> ptrs;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < net.params().size(); ++i) {
    ptrs.push_back(&net.params().value(i));
    names.push_back(net.params().name(i));
  }
  return check_gradients(ptrs, names, grads, [&]() { return micro_loss(net, inputs); });
}

}  // namespace gamestock::testing
