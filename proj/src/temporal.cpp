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

#include "gamestock/temporal.hpp"

namespace gamestock {

RowVector max_pool(const Matrix& band) {
  if (band.rows() == 0) throw Error("cannot pool an empty sub-band");
  return band.colwise().maxCoeff();
}

RowVector avg_pool(const Matrix& band) {
  if (band.rows() == 0) throw Error("cannot pool an empty sub-band");
  return band.colwise().mean();
}

PooledBands pool_bands(std::span<const Matrix> windows, const WaveletConfig& config) {
  PooledBands out;
  const auto n = static_cast<Eigen::Index>(windows.size());
  if (n == 0) throw Error("no windows to pool");
  const auto d = windows.front().cols();
  out.level_max.assign(static_cast<std::size_t>(config.level), Matrix(n, d));
  out.trend_avg.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto coeffs =
        wavelet::decompose(windows[static_cast<std::size_t>(i)], config.name, config.level, config.boundary);
    for (int k = 0; k < config.level; ++k) {
      out.level_max[static_cast<std::size_t>(k)].row(i) = max_pool(coeffs.detail[static_cast<std::size_t>(k)]);
    }
    out.trend_avg.row(i) = avg_pool(coeffs.approx);
  }
  return out;
}

namespace taped {

AttentionVars temporal_attention(std::span<const ad::Var> levels, const TemporalVars& vars) {
  if (levels.empty()) throw Error("temporal attention needs at least one level");
  std::vector<ad::Var> scores;
  for (const auto& h : levels) {
    auto hidden = ad::tanh(ad::add_row(ad::matmul(h, vars.att_w1), vars.att_b1));
    scores.push_back(ad::add_row(ad::matmul(hidden, vars.att_w2), vars.att_b2));
  }
  AttentionVars out;
  out.weights = ad::softmax_rows(ad::hcat(scores));
  out.output = ad::mul_col(levels.front(), ad::col(out.weights, 0));
  for (std::size_t k = 1; k < levels.size(); ++k) {
    out.output = out.output + ad::mul_col(levels[k], ad::col(out.weights, static_cast<Eigen::Index>(k)));
  }
  return out;
}

ad::Var embed(const PooledBands& bands, const TemporalVars& vars) {
  if (bands.level_max.size() != vars.level_w.size()) {
    throw Error("pooled bands have " + std::to_string(bands.level_max.size()) +
                " levels, parameters expect " + std::to_string(vars.level_w.size()));
  }
  auto& tape = *vars.trend_w.tape();
  std::vector<ad::Var> levels;
  for (std::size_t k = 0; k < bands.level_max.size(); ++k) {
    levels.push_back(ad::add_row(ad::matmul(tape.constant(bands.level_max[k]), vars.level_w[k]),
                                 vars.level_b[k]));
  }
  auto zeta = temporal_attention(levels, vars).output;
  auto trend = ad::add_row(ad::matmul(tape.constant(bands.trend_avg), vars.trend_w), vars.trend_b);
  auto gate = ad::sigmoid(ad::add_row(ad::matmul(trend, vars.gate_w), vars.gate_b));
  return trend + ad::cwise_product(gate, zeta);
}

ad::Var gru_encode(std::span<const Matrix> steps, const GruVars& vars) {
  if (steps.empty()) throw Error("recurrent encoder needs at least one step");
  auto& tape = *vars.wz.tape();
  const auto n = steps.front().rows();
  auto h = tape.constant(Matrix::Zero(n, vars.uz.rows()));
  for (const auto& step : steps) {
    auto x = tape.constant(step);
    auto z = ad::sigmoid(ad::add_row(ad::matmul(x, vars.wz) + ad::matmul(h, vars.uz), vars.bz));
    auto r = ad::sigmoid(ad::add_row(ad::matmul(x, vars.wr) + ad::matmul(h, vars.ur), vars.br));
    auto cand = ad::tanh(
        ad::add_row(ad::matmul(x, vars.wh) + ad::matmul(ad::cwise_product(r, h), vars.uh), vars.bh));
    h = ad::cwise_product(ad::one_minus(z), h) + ad::cwise_product(z, cand);
  }
  return ad::add_row(ad::matmul(h, vars.proj_w), vars.proj_b);
}

}  // namespace taped

namespace {

taped::TemporalVars constants(ad::Tape& tape, const TemporalParams& p) {
  taped::TemporalVars v;
  for (std::size_t k = 0; k < p.fusion.level_w.size(); ++k) {
    v.level_w.push_back(tape.constant(p.fusion.level_w[k]));
    v.level_b.push_back(tape.constant(p.fusion.level_b[k]));
  }
  v.att_w1 = tape.constant(p.attention.w1);
  v.att_b1 = tape.constant(p.attention.b1);
  v.att_w2 = tape.constant(p.attention.w2);
  v.att_b2 = tape.constant(p.attention.b2);
  v.trend_w = tape.constant(p.fusion.trend_w);
  v.trend_b = tape.constant(p.fusion.trend_b);
  v.gate_w = tape.constant(p.fusion.gate_w);
  v.gate_b = tape.constant(p.fusion.gate_b);
  return v;
}

}  // namespace

RowVector level_feature(const Matrix& detail, const Matrix& w, const Matrix& b) {
  const RowVector pooled = max_pool(detail);
  if (w.rows() != pooled.size()) throw Error("level map expects " + std::to_string(w.rows()) + " channels");
  return pooled * w + b;
}

AttentionResult temporal_attention(const Matrix& levels, const AttentionParams& params) {
  ad::Tape tape;
  std::vector<ad::Var> rows;
  for (Eigen::Index k = 0; k < levels.rows(); ++k) rows.push_back(tape.constant(levels.row(k)));
  taped::TemporalVars v;
  v.att_w1 = tape.constant(params.w1);
  v.att_b1 = tape.constant(params.b1);
  v.att_w2 = tape.constant(params.w2);
  v.att_b2 = tape.constant(params.b2);
  auto out = taped::temporal_attention(rows, v);
  return {out.output.value(), out.weights.value().row(0).transpose()};
}

RowVector fluctuation_gate(const wavelet::Coeffs<double>& coeffs, const FusionParams& params) {
  const RowVector trend = avg_pool(coeffs.approx) * params.trend_w + params.trend_b;
  const RowVector pre = trend * params.gate_w + params.gate_b;
  return pre.unaryExpr([](double x) { return ad::sigmoid_value(x); });
}

RowVector trend_fluct_fuse(const wavelet::Coeffs<double>& coeffs, const RowVector& zeta,
                           const FusionParams& params) {
  const RowVector trend = avg_pool(coeffs.approx) * params.trend_w + params.trend_b;
  if (zeta.size() != trend.size()) throw Error("trend and fluctuation widths differ");
  return trend + fluctuation_gate(coeffs, params).cwiseProduct(zeta);
}

Matrix embed_all(std::span<const Matrix> windows, const WaveletConfig& config,
                 const TemporalParams& params) {
  ad::Tape tape;
  return taped::embed(pool_bands(windows, config), constants(tape, params)).value();
}

}  // namespace gamestock
