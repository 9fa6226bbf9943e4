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

#include "gamestock/nn.hpp"

#include <cmath>

namespace gamestock::nn {

std::size_t ParameterSet::add(std::string name, Matrix init) {
  if (find(name)) throw Error("duplicate parameter '" + name + "'");
  names_.push_back(std::move(name));
  values_.push_back(std::move(init));
  return values_.size() - 1;
}

std::optional<std::size_t> ParameterSet::find(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t ParameterSet::at(std::string_view name) const {
  auto i = find(name);
  if (!i) throw Error("no parameter named '" + std::string(name) + "'");
  return *i;
}

Eigen::Index ParameterSet::total_size() const {
  Eigen::Index n = 0;
  for (const auto& v : values_) n += v.size();
  return n;
}

Binding::Binding(ad::Tape& tape, const ParameterSet& params)
    : tape_(&tape), params_(&params), vars_(params.size()) {}

ad::Var Binding::operator[](std::size_t index) {
  auto& slot = vars_.at(index);
  if (!slot) slot = tape_->variable(params_->value(index));
  return *slot;
}

std::vector<Matrix> Binding::gradients() const {
  std::vector<Matrix> out;
  out.reserve(vars_.size());
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    const auto& p = params_->value(i);
    if (vars_[i] && vars_[i]->grad().size() != 0) {
      out.push_back(vars_[i]->grad());
    } else {
      out.push_back(Matrix::Zero(p.rows(), p.cols()));
    }
  }
  return out;
}

Matrix uniform(Eigen::Index rows, Eigen::Index cols, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix m(rows, cols);
  // Fill in row-major order so the draw sequence does not depend on storage.
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
  }
  return m;
}

Matrix glorot_uniform(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  return uniform(rows, cols, bound, rng);
}

AdamW::AdamW(const ParameterSet& params, Options options) : options_(options) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params.value(i);
    m_.push_back(Matrix::Zero(p.rows(), p.cols()));
    v_.push_back(Matrix::Zero(p.rows(), p.cols()));
  }
}

void AdamW::step(ParameterSet& params, const std::vector<Matrix>& grads) {
  if (grads.size() != params.size() || m_.size() != params.size()) {
    throw Error("optimizer state does not match the parameter set");
  }
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double c1 = 1.0 - std::pow(options_.beta1, t);
  const double c2 = 1.0 - std::pow(options_.beta2, t);
  const double lr = options_.learning_rate;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params.value(i);
    m_[i] = options_.beta1 * m_[i] + (1.0 - options_.beta1) * grads[i];
    v_[i] = options_.beta2 * v_[i] + (1.0 - options_.beta2) * grads[i].cwiseAbs2();
    auto update = ((m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + options_.epsilon)).matrix();
    p -= lr * (update + options_.weight_decay * p);
  }
}

}  // namespace gamestock::nn
