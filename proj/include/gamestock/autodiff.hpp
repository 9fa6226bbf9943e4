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

// Reverse-mode differentiation over dense Eigen matrices.
//
// A Tape records every operation of one forward pass. Each node owns its
// value; gradients are allocated lazily and only for nodes that depend on a
// variable. Nodes are created in topological order, so backward() is a
// single reverse sweep.

#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "gamestock/common.hpp"

namespace gamestock::ad {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

class Tape;

// Handle to a tape node. Cheap to copy; valid while its tape lives.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  // Zero-sized until backward() reaches this node.
  const Matrix& grad() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  // Scalar value of a 1 x 1 node.
  double scalar() const { return value()(0, 0); }

  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  using Backward = std::function<void(Tape&, std::size_t)>;

  Tape() { nodes_.reserve(256); }
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  Var variable(Matrix value);

  // Seeds d(loss)/d(loss) = 1 and propagates. `loss` must be 1 x 1.
  void backward(const Var& loss);

  const Matrix& value(std::size_t id) const { return nodes_[id].value; }
  const Matrix& grad(std::size_t id) const { return nodes_[id].grad; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  // Records an operation node. `backward` is called with the node's own id
  // once its gradient is final; it should push into its inputs through
  // accumulate().
  Var record(Matrix value, bool requires_grad, Backward backward);

  // Adds `delta` into the gradient of node `id` if that node needs one.
  template <typename Derived>
  void accumulate(std::size_t id, const Eigen::MatrixBase<Derived>& delta) {
    auto& node = nodes_[id];
    if (!node.requires_grad) return;
    if (node.grad.size() == 0) {
      node.grad = delta;
    } else {
      node.grad += delta;
    }
  }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    Backward backward;
  };
  std::vector<Node> nodes_;
};

// Arithmetic. Shapes follow Eigen; mismatches throw Error.
Var operator+(const Var& a, const Var& b);
Var operator-(const Var& a, const Var& b);
Var operator*(double s, const Var& a);
Var add_scalar(const Var& a, double s);
Var one_minus(const Var& a);
Var cwise_product(const Var& a, const Var& b);
Var matmul(const Var& a, const Var& b);
Var matmul(const SparseMatrix& lhs, const Var& b);
Var matmul(const Matrix& lhs, const Var& b);

// Broadcasts a 1 x C row over every row of a (R x C).
Var add_row(const Var& a, const Var& row);
Var mul_row(const Var& a, const Var& row);
// Scales each row i of a by col(i); col is R x 1.
Var mul_col(const Var& a, const Var& col);

Var tanh(const Var& a);
Var sigmoid(const Var& a);
Var elu(const Var& a);

Var hcat(std::span<const Var> parts);
Var vcat(std::span<const Var> parts);
Var middle_rows(const Var& a, Eigen::Index start, Eigen::Index count);
Var col(const Var& a, Eigen::Index j);

Var softmax_rows(const Var& a);
// Zero-mean unit-variance across each row (population variance).
Var normalize_rows(const Var& a, double eps = 1e-5);

Var sum(const Var& a);
Var squared_norm(const Var& a);

// Mean over rows with mask[i] of the squared row distance to target.
// Returns 0 when no row is selected.
Var masked_row_mse(const Var& pred, const Matrix& target, const std::vector<bool>& mask);

// Elementwise helpers shared with non-taped code.
inline double elu_value(double x) { return x > 0.0 ? x : std::expm1(x); }
inline double sigmoid_value(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace gamestock::ad
