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

// Stock embeddings from wavelet sub-bands.
//
// Per stock and level k, each channel's detail band is max-pooled over time
// and the D pooled values go through a per-level linear map to width M (h_k).
// Attention over levels,
//
//   e_k = tanh(h_k W1 + b1) W2 + b2,  alpha = softmax(e),  zeta = sum alpha_k h_k,
//
// weighs the levels. The approximation band is average-pooled into the trend
// h_trend = avg(cA) Wt + bt, and a gate lambda = sigmoid(h_trend Wg + bg)
// mixes in the fluctuation: z = h_trend + lambda .* zeta.
//
// Everything after pooling is batched: rows are stocks.

#pragma once

#include <span>
#include <string>
#include <vector>

#include "gamestock/autodiff.hpp"
#include "gamestock/common.hpp"
#include "gamestock/wavelet.hpp"

namespace gamestock {

struct WaveletConfig {
  std::string name = "db4";
  int level = 3;
  wavelet::Boundary boundary = wavelet::Boundary::kPeriodization;
};

// Global max over time of each channel (1 x D).
RowVector max_pool(const Matrix& band);
// Global mean over time of each channel (1 x D).
RowVector avg_pool(const Matrix& band);

// Pooled sub-bands for a set of stocks. level_max[k-1] holds the pooled cD_k
// (N x D); trend_avg the pooled cA (N x D).
struct PooledBands {
  std::vector<Matrix> level_max;
  Matrix trend_avg;
};

PooledBands pool_bands(std::span<const Matrix> windows, const WaveletConfig& config);

struct AttentionParams {
  Matrix w1;  // M x hidden
  Matrix b1;  // 1 x hidden
  Matrix w2;  // hidden x 1
  Matrix b2;  // 1 x 1
};

struct FusionParams {
  std::vector<Matrix> level_w;  // D x M, one per level
  std::vector<Matrix> level_b;  // 1 x M
  Matrix trend_w;               // D x M
  Matrix trend_b;               // 1 x M
  Matrix gate_w;                // M x M
  Matrix gate_b;                // 1 x M
};

struct TemporalParams {
  FusionParams fusion;
  AttentionParams attention;
};

// h_k for one stock: linear map of the max-pooled detail band (len x D).
RowVector level_feature(const Matrix& detail, const Matrix& w, const Matrix& b);

struct AttentionResult {
  RowVector output;  // zeta
  Vector weights;    // alpha, one per level
};
// `levels` holds h_1..h_l as rows.
AttentionResult temporal_attention(const Matrix& levels, const AttentionParams& params);

// z for one stock from its coefficients and zeta.
RowVector trend_fluct_fuse(const wavelet::Coeffs<double>& coeffs, const RowVector& zeta,
                           const FusionParams& params);
// The gate lambda for one stock, exposed for inspection.
RowVector fluctuation_gate(const wavelet::Coeffs<double>& coeffs, const FusionParams& params);

// Z, one row per window.
Matrix embed_all(std::span<const Matrix> windows, const WaveletConfig& config,
                 const TemporalParams& params);

namespace taped {

struct TemporalVars {
  std::vector<ad::Var> level_w;
  std::vector<ad::Var> level_b;
  ad::Var att_w1, att_b1, att_w2, att_b2;
  ad::Var trend_w, trend_b, gate_w, gate_b;
};

struct AttentionVars {
  ad::Var output;   // N x M
  ad::Var weights;  // N x l
};
AttentionVars temporal_attention(std::span<const ad::Var> levels, const TemporalVars& vars);

// Z (N x M) from pooled bands.
ad::Var embed(const PooledBands& bands, const TemporalVars& vars);

struct GruVars {
  ad::Var wz, uz, bz;  // update gate
  ad::Var wr, ur, br;  // reset gate
  ad::Var wh, uh, bh;  // candidate
  ad::Var proj_w, proj_b;
};

// Single-layer gated recurrent encoder over steps (each N x D, oldest first);
// the final hidden state is projected to width M.
ad::Var gru_encode(std::span<const Matrix> steps, const GruVars& vars);

}  // namespace taped

}  // namespace gamestock
