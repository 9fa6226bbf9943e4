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

#include "gamestock/autodiff.hpp"

#include <string>
#include <utility>

namespace gamestock::ad {

namespace {

std::string shape(const Var& v) {
  return std::to_string(v.rows()) + "x" + std::to_string(v.cols());
}

void check_same_tape(const Var& a, const Var& b) {
  if (a.tape() == nullptr || a.tape() != b.tape()) throw Error("operands live on different tapes");
}

void check_same_shape(const Var& a, const Var& b, const char* op) {
  check_same_tape(a, b);
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(std::string(op) + ": shape mismatch " + shape(a) + " vs " + shape(b));
  }
}

bool needs(const Var& a) { return a.tape()->requires_grad(a.id()); }
bool needs(const Var& a, const Var& b) { return needs(a) || needs(b); }

}  // namespace

const Matrix& Var::value() const { return tape_->value(id_); }
const Matrix& Var::grad() const { return tape_->grad(id_); }

Var Tape::constant(Matrix value) { return record(std::move(value), false, nullptr); }

Var Tape::variable(Matrix value) { return record(std::move(value), true, nullptr); }

Var Tape::record(Matrix value, bool requires_grad, Backward backward) {
  nodes_.push_back(Node{std::move(value), Matrix(), requires_grad, std::move(backward)});
  return Var(this, nodes_.size() - 1);
}

void Tape::backward(const Var& loss) {
  if (loss.tape() != this) throw Error("loss belongs to another tape");
  if (loss.rows() != 1 || loss.cols() != 1) throw Error("backward() needs a 1x1 loss, got " + shape(loss));
  for (auto& node : nodes_) node.grad.resize(0, 0);
  if (!nodes_[loss.id()].requires_grad) return;
  nodes_[loss.id()].grad = Matrix::Ones(1, 1);
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    auto& node = nodes_[i];
    if (node.backward && node.grad.size() != 0) node.backward(*this, i);
  }
}

Var operator+(const Var& a, const Var& b) {
  check_same_shape(a, b, "add");
  const auto ia = a.id();
  const auto ib = b.id();
  return a.tape()->record(a.value() + b.value(), needs(a, b), [ia, ib](Tape& t, std::size_t self) {
    t.accumulate(ia, t.grad(self));
    t.accumulate(ib, t.grad(self));
  });
}

Var operator-(const Var& a, const Var& b) {
  check_same_shape(a, b, "sub");
  const auto ia = a.id();
  const auto ib = b.id();
  return a.tape()->record(a.value() - b.value(), needs(a, b), [ia, ib](Tape& t, std::size_t self) {
    t.accumulate(ia, t.grad(self));
    t.accumulate(ib, -t.grad(self));
  });
}

Var operator*(double s, const Var& a) {
  const auto ia = a.id();
  return a.tape()->record(s * a.value(), needs(a), [ia, s](Tape& t, std::size_t self) {
    t.accumulate(ia, s * t.grad(self));
  });
}

Var add_scalar(const Var& a, double s) {
  const auto ia = a.id();
  return a.tape()->record((a.value().array() + s).matrix(), needs(a),
                          [ia](Tape& t, std::size_t self) { t.accumulate(ia, t.grad(self)); });
}

Var one_minus(const Var& a) { return add_scalar(-1.0 * a, 1.0); }

Var cwise_product(const Var& a, const Var& b) {
  check_same_shape(a, b, "cwise_product");
  const auto ia = a.id();
  const auto ib = b.id();
  return a.tape()->record(a.value().cwiseProduct(b.value()), needs(a, b),
                          [ia, ib](Tape& t, std::size_t self) {
                            const auto& g = t.grad(self);
                            if (t.requires_grad(ia)) t.accumulate(ia, g.cwiseProduct(t.value(ib)));
                            if (t.requires_grad(ib)) t.accumulate(ib, g.cwiseProduct(t.value(ia)));
                          });
}

Var matmul(const Var& a, const Var& b) {
  check_same_tape(a, b);
  if (a.cols() != b.rows()) throw Error("matmul: shape mismatch " + shape(a) + " * " + shape(b));
  const auto ia = a.id();
  const auto ib = b.id();
  Matrix out = a.value() * b.value();
  return a.tape()->record(std::move(out), needs(a, b), [ia, ib](Tape& t, std::size_t self) {
    const auto& g = t.grad(self);
    if (t.requires_grad(ia)) t.accumulate(ia, g * t.value(ib).transpose());
    if (t.requires_grad(ib)) t.accumulate(ib, t.value(ia).transpose() * g);
  });
}

Var matmul(const SparseMatrix& lhs, const Var& b) {
  if (lhs.cols() != b.rows()) {
    throw Error("matmul: shape mismatch " + std::to_string(lhs.rows()) + "x" +
                std::to_string(lhs.cols()) + " * " + shape(b));
  }
  const auto ib = b.id();
  Matrix out = lhs * b.value();
  // The sparse operand outlives the tape in every caller (graph adjacency).
  const SparseMatrix* m = &lhs;
  return b.tape()->record(std::move(out), needs(b), [ib, m](Tape& t, std::size_t self) {
    t.accumulate(ib, m->transpose() * t.grad(self));
  });
}

Var matmul(const Matrix& lhs, const Var& b) {
  if (lhs.cols() != b.rows()) {
    throw Error("matmul: shape mismatch " + std::to_string(lhs.rows()) + "x" +
                std::to_string(lhs.cols()) + " * " + shape(b));
  }
  const auto ib = b.id();
  Matrix out = lhs * b.value();
  return b.tape()->record(std::move(out), needs(b), [ib, lhs](Tape& t, std::size_t self) {
    t.accumulate(ib, lhs.transpose() * t.grad(self));
  });
}

Var add_row(const Var& a, const Var& row) {
  check_same_tape(a, row);
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw Error("add_row: shape mismatch " + shape(a) + " + " + shape(row));
  }
  const auto ia = a.id();
  const auto ir = row.id();
  Matrix out = a.value().rowwise() + row.value().row(0);
  return a.tape()->record(std::move(out), needs(a, row), [ia, ir](Tape& t, std::size_t self) {
    const auto& g = t.grad(self);
    t.accumulate(ia, g);
    if (t.requires_grad(ir)) t.accumulate(ir, g.colwise().sum());
  });
}

Var mul_row(const Var& a, const Var& row) {
  check_same_tape(a, row);
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw Error("mul_row: shape mismatch " + shape(a) + " * " + shape(row));
  }
  const auto ia = a.id();
  const auto ir = row.id();
  Matrix out = a.value().array().rowwise() * row.value().row(0).array();
  return a.tape()->record(std::move(out), needs(a, row), [ia, ir](Tape& t, std::size_t self) {
    const auto& g = t.grad(self);
    if (t.requires_grad(ia)) {
      t.accumulate(ia, (g.array().rowwise() * t.value(ir).row(0).array()).matrix());
    }
    if (t.requires_grad(ir)) t.accumulate(ir, g.cwiseProduct(t.value(ia)).colwise().sum());
  });
}

Var mul_col(const Var& a, const Var& col) {
  check_same_tape(a, col);
  if (col.cols() != 1 || col.rows() != a.rows()) {
    throw Error("mul_col: shape mismatch " + shape(a) + " * " + shape(col));
  }
  const auto ia = a.id();
  const auto ic = col.id();
  Matrix out = a.value().array().colwise() * col.value().col(0).array();
  return a.tape()->record(std::move(out), needs(a, col), [ia, ic](Tape& t, std::size_t self) {
    const auto& g = t.grad(self);
    if (t.requires_grad(ia)) {
      t.accumulate(ia, (g.array().colwise() * t.value(ic).col(0).array()).matrix());
    }
    if (t.requires_grad(ic)) t.accumulate(ic, g.cwiseProduct(t.value(ia)).rowwise().sum());
  });
}

Var tanh(const Var& a) {
  const auto ia = a.id();
  Matrix out = a.value().array().tanh().matrix();
  return a.tape()->record(std::move(out), needs(a), [ia](Tape& t, std::size_t self) {
    const auto& y = t.value(self);
    t.accumulate(ia, (t.grad(self).array() * (1.0 - y.array().square())).matrix());
  });
}

Var sigmoid(const Var& a) {
  const auto ia = a.id();
  Matrix out = a.value().unaryExpr([](double x) { return sigmoid_value(x); });
  return a.tape()->record(std::move(out), needs(a), [ia](Tape& t, std::size_t self) {
    const auto& y = t.value(self);
    t.accumulate(ia, (t.grad(self).array() * y.array() * (1.0 - y.array())).matrix());
  });
}

Var elu(const Var& a) {
  const auto ia = a.id();
  Matrix out = a.value().unaryExpr([](double x) { return elu_value(x); });
  return a.tape()->record(std::move(out), needs(a), [ia](Tape& t, std::size_t self) {
    const auto& x = t.value(ia);
    const auto& y = t.value(self);
    Matrix slope = (x.array() > 0.0).select(Matrix::Ones(x.rows(), x.cols()), (y.array() + 1.0).matrix());
    t.accumulate(ia, t.grad(self).cwiseProduct(slope));
  });
}

Var hcat(std::span<const Var> parts) {
  if (parts.empty()) throw Error("hcat of nothing");
  const auto rows = parts.front().rows();
  Eigen::Index cols = 0;
  bool grad = false;
  for (const auto& p : parts) {
    check_same_tape(parts.front(), p);
    if (p.rows() != rows) throw Error("hcat: row mismatch " + shape(parts.front()) + " vs " + shape(p));
    cols += p.cols();
    grad = grad || needs(p);
  }
  Matrix out(rows, cols);
  std::vector<std::pair<std::size_t, Eigen::Index>> ids;
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.middleCols(at, p.cols()) = p.value();
    ids.emplace_back(p.id(), p.cols());
    at += p.cols();
  }
  return parts.front().tape()->record(std::move(out), grad, [ids](Tape& t, std::size_t self) {
    Eigen::Index at = 0;
    for (const auto& [id, c] : ids) {
      if (t.requires_grad(id)) t.accumulate(id, t.grad(self).middleCols(at, c));
      at += c;
    }
  });
}

Var vcat(std::span<const Var> parts) {
  if (parts.empty()) throw Error("vcat of nothing");
  const auto cols = parts.front().cols();
  Eigen::Index rows = 0;
  bool grad = false;
  for (const auto& p : parts) {
    check_same_tape(parts.front(), p);
    if (p.cols() != cols) throw Error("vcat: column mismatch " + shape(parts.front()) + " vs " + shape(p));
    rows += p.rows();
    grad = grad || needs(p);
  }
  Matrix out(rows, cols);
  std::vector<std::pair<std::size_t, Eigen::Index>> ids;
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.middleRows(at, p.rows()) = p.value();
    ids.emplace_back(p.id(), p.rows());
    at += p.rows();
  }
  return parts.front().tape()->record(std::move(out), grad, [ids](Tape& t, std::size_t self) {
    Eigen::Index at = 0;
    for (const auto& [id, r] : ids) {
      if (t.requires_grad(id)) t.accumulate(id, t.grad(self).middleRows(at, r));
      at += r;
    }
  });
}

Var middle_rows(const Var& a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > a.rows()) {
    throw Error("middle_rows: range out of bounds for " + shape(a));
  }
  const auto ia = a.id();
  const auto rows = a.rows();
  Matrix out = a.value().middleRows(start, count);
  return a.tape()->record(std::move(out), needs(a), [ia, start, count, rows](Tape& t, std::size_t self) {
    Matrix g = Matrix::Zero(rows, t.grad(self).cols());
    g.middleRows(start, count) = t.grad(self);
    t.accumulate(ia, g);
  });
}

Var col(const Var& a, Eigen::Index j) {
  if (j < 0 || j >= a.cols()) throw Error("col: index out of bounds for " + shape(a));
  const auto ia = a.id();
  const auto cols = a.cols();
  Matrix out = a.value().col(j);
  return a.tape()->record(std::move(out), needs(a), [ia, j, cols](Tape& t, std::size_t self) {
    Matrix g = Matrix::Zero(t.grad(self).rows(), cols);
    g.col(j) = t.grad(self);
    t.accumulate(ia, g);
  });
}

Var softmax_rows(const Var& a) {
  const auto ia = a.id();
  Matrix out = a.value();
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double m = out.row(i).maxCoeff();
    out.row(i) = (out.row(i).array() - m).exp().matrix();
    out.row(i) /= out.row(i).sum();
  }
  return a.tape()->record(std::move(out), needs(a), [ia](Tape& t, std::size_t self) {
    const auto& y = t.value(self);
    const auto& g = t.grad(self);
    Vector dot = g.cwiseProduct(y).rowwise().sum();
    Matrix d = (y.array() * (g.colwise() - dot).array()).matrix();
    t.accumulate(ia, d);
  });
}

Var normalize_rows(const Var& a, double eps) {
  const auto ia = a.id();
  const auto c = static_cast<double>(a.cols());
  const Matrix& x = a.value();
  Vector mean = x.rowwise().mean();
  Matrix centered = x.colwise() - mean;
  Vector inv_std = ((centered.array().square().rowwise().sum() / c) + eps).rsqrt().matrix();
  Matrix out = (centered.array().colwise() * inv_std.array()).matrix();
  return a.tape()->record(std::move(out), needs(a), [ia, inv_std, c](Tape& t, std::size_t self) {
    const auto& y = t.value(self);
    const auto& g = t.grad(self);
    // dx = inv_std * (g - mean(g) - y * mean(g . y))
    Vector g_mean = g.rowwise().mean();
    Vector gy_mean = g.cwiseProduct(y).rowwise().sum() / c;
    Matrix d = g.colwise() - g_mean;
    d -= (y.array().colwise() * gy_mean.array()).matrix();
    d = (d.array().colwise() * inv_std.array()).matrix();
    t.accumulate(ia, d);
  });
}

Var sum(const Var& a) {
  const auto ia = a.id();
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  const auto r = a.rows();
  const auto cc = a.cols();
  return a.tape()->record(std::move(out), needs(a), [ia, r, cc](Tape& t, std::size_t self) {
    t.accumulate(ia, Matrix::Constant(r, cc, t.grad(self)(0, 0)));
  });
}

Var squared_norm(const Var& a) {
  const auto ia = a.id();
  Matrix out(1, 1);
  out(0, 0) = a.value().squaredNorm();
  return a.tape()->record(std::move(out), needs(a), [ia](Tape& t, std::size_t self) {
    t.accumulate(ia, 2.0 * t.grad(self)(0, 0) * t.value(ia));
  });
}

Var masked_row_mse(const Var& pred, const Matrix& target, const std::vector<bool>& mask) {
  if (target.rows() != pred.rows() || target.cols() != pred.cols() ||
      mask.size() != static_cast<std::size_t>(pred.rows())) {
    throw Error("masked_row_mse: shape mismatch " + shape(pred));
  }
  double count = 0.0;
  Matrix diff = Matrix::Zero(pred.rows(), pred.cols());
  for (Eigen::Index i = 0; i < pred.rows(); ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    diff.row(i) = pred.value().row(i) - target.row(i);
    count += 1.0;
  }
  Matrix out(1, 1);
  out(0, 0) = count > 0.0 ? diff.squaredNorm() / count : 0.0;
  const auto ip = pred.id();
  return pred.tape()->record(std::move(out), needs(pred) && count > 0.0,
                             [ip, diff, count](Tape& t, std::size_t self) {
                               t.accumulate(ip, (2.0 * t.grad(self)(0, 0) / count) * diff);
                             });
}

}  // namespace gamestock::ad
