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

// Trainable parameter storage, tape binding, initializers and the optimizer.

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "gamestock/autodiff.hpp"
#include "gamestock/common.hpp"

namespace gamestock::nn {

using Rng = std::mt19937_64;

// Ordered, named collection of parameter matrices. Indices are stable.
class ParameterSet {
 public:
  std::size_t add(std::string name, Matrix init);

  std::size_t size() const { return values_.size(); }
  const std::string& name(std::size_t i) const { return names_[i]; }
  Matrix& value(std::size_t i) { return values_[i]; }
  const Matrix& value(std::size_t i) const { return values_[i]; }
  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t at(std::string_view name) const;  // throws Error if absent

  Eigen::Index total_size() const;

 private:
  std::vector<std::string> names_;
  std::vector<Matrix> values_;
};

// Places parameters on a tape on first use and collects their gradients
// after Tape::backward().
class Binding {
 public:
  Binding(ad::Tape& tape, const ParameterSet& params);

  ad::Var operator[](std::size_t index);

  // One matrix per parameter, zero for parameters the pass never touched.
  std::vector<Matrix> gradients() const;

  ad::Tape& tape() { return *tape_; }

 private:
  ad::Tape* tape_;
  const ParameterSet* params_;
  std::vector<std::optional<ad::Var>> vars_;
};

Matrix glorot_uniform(Eigen::Index rows, Eigen::Index cols, Rng& rng);
Matrix uniform(Eigen::Index rows, Eigen::Index cols, double bound, Rng& rng);

// Adaptive moment estimation with decoupled weight decay.
class AdamW {
 public:
  struct Options {
    double learning_rate = 1e-3;
    double weight_decay = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
  };

  AdamW(const ParameterSet& params, Options options);

  void step(ParameterSet& params, const std::vector<Matrix>& grads);

  double learning_rate() const { return options_.learning_rate; }
  void set_learning_rate(double lr) { options_.learning_rate = lr; }
  std::int64_t steps() const { return steps_; }

 private:
  Options options_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  std::int64_t steps_ = 0;
};

}  // namespace gamestock::nn
