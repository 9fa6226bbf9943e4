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

#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "gradcheck.hpp"

namespace gamestock {
namespace {

using Rng = std::mt19937_64;

Matrix random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  return Matrix::NullaryExpr(r, c, [&]() { return g(rng); });
}

TemporalParams random_params(int levels, Eigen::Index d, Eigen::Index m, Eigen::Index hidden, Rng& rng) {
  TemporalParams p;
  for (int k = 0; k < levels; ++k) {
    p.fusion.level_w.push_back(random_matrix(d, m, rng, 0.5));
    p.fusion.level_b.push_back(random_matrix(1, m, rng, 0.1));
  }
  p.fusion.trend_w = random_matrix(d, m, rng, 0.5);
  p.fusion.trend_b = random_matrix(1, m, rng, 0.1);
  p.fusion.gate_w = random_matrix(m, m, rng, 0.5);
  p.fusion.gate_b = random_matrix(1, m, rng, 0.1);
  p.attention.w1 = random_matrix(m, hidden, rng, 0.5);
  p.attention.b1 = random_matrix(1, hidden, rng, 0.1);
  p.attention.w2 = random_matrix(hidden, 1, rng, 0.5);
  p.attention.b2 = random_matrix(1, 1, rng, 0.1);
  return p;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Per-stock embedding computed directly from the coefficients.
RowVector reference_embedding(const Matrix& window, const WaveletConfig& cfg, const TemporalParams& p) {
  const auto c = wavelet::decompose(window, cfg.name, cfg.level, cfg.boundary);
  const auto m = p.fusion.trend_w.cols();
  std::vector<RowVector> h;
  std::vector<double> e;
  for (int k = 0; k < cfg.level; ++k) {
    const auto& band = c.detail[static_cast<std::size_t>(k)];
    RowVector pooled(band.cols());
    for (Eigen::Index j = 0; j < band.cols(); ++j) pooled(j) = band.col(j).maxCoeff();
    h.push_back(pooled * p.fusion.level_w[static_cast<std::size_t>(k)] + p.fusion.level_b[static_cast<std::size_t>(k)]);
    RowVector hidden = h.back() * p.attention.w1 + p.attention.b1;
    for (auto& v : hidden) v = std::tanh(v);
    e.push_back((hidden * p.attention.w2)(0, 0) + p.attention.b2(0, 0));
  }
  double top = *std::max_element(e.begin(), e.end());
  double total = 0.0;
  for (double v : e) total += std::exp(v - top);
  RowVector zeta = RowVector::Zero(m);
  for (std::size_t k = 0; k < h.size(); ++k) zeta += std::exp(e[k] - top) / total * h[k];
  RowVector mean(c.approx.cols());
  for (Eigen::Index j = 0; j < c.approx.cols(); ++j) mean(j) = c.approx.col(j).mean();
  const RowVector trend = mean * p.fusion.trend_w + p.fusion.trend_b;
  RowVector gate = trend * p.fusion.gate_w + p.fusion.gate_b;
  for (auto& v : gate) v = sigmoid(v);
  return trend + gate.cwiseProduct(zeta);
}

TEST(Pooling, MaxAndAverageOverTime) {
  Matrix band(3, 2);
  band << -1, 4, 3, 0, 2, 2;
  EXPECT_EQ(max_pool(band), RowVector((RowVector(2) << 3, 4).finished()));
  EXPECT_TRUE(avg_pool(band).isApprox((RowVector(2) << 4.0 / 3.0, 2.0).finished()));
  EXPECT_THROW(max_pool(Matrix(0, 2)), Error);
}

TEST(LevelFeature, HandExamples) {
  Matrix one(3, 1);
  one << -1, 3, 2;
  EXPECT_EQ(level_feature(one, Matrix::Ones(1, 1), Matrix::Zero(1, 1))(0), 3.0);

  Matrix two(2, 2);
  two << 1, 0, 0, 2;
  EXPECT_EQ(level_feature(two, Matrix::Ones(2, 1), Matrix::Zero(1, 1))(0), 3.0);

  // Equal channels through a row-sum map give D times the max.
  Matrix same(4, 3);
  same.col(0) << 0.5, 1.5, -2.0, 1.0;
  same.col(1) = same.col(0);
  same.col(2) = same.col(0);
  const RowVector h = level_feature(same, Matrix::Ones(3, 2), Matrix::Zero(1, 2));
  EXPECT_EQ(h(0), 4.5);
  EXPECT_EQ(h(1), 4.5);
}

TEST(LevelFeature, EmptyBandIsError) {
  EXPECT_THROW(level_feature(Matrix(0, 2), Matrix::Ones(2, 1), Matrix::Zero(1, 1)), Error);
}

TEST(TemporalAttention, SingleLevelPassesThrough) {
  Rng rng(1);
  AttentionParams p{random_matrix(4, 3, rng), random_matrix(1, 3, rng), random_matrix(3, 1, rng),
                    random_matrix(1, 1, rng)};
  const Matrix h = random_matrix(1, 4, rng);
  const auto r = temporal_attention(h, p);
  EXPECT_NEAR(r.weights(0), 1.0, 1e-15);
  EXPECT_TRUE(r.output.isApprox(h.row(0), 1e-15));
}

TEST(TemporalAttention, IdenticalLevelsShareWeightEqually) {
  Rng rng(2);
  AttentionParams p{random_matrix(4, 3, rng), random_matrix(1, 3, rng), random_matrix(3, 1, rng),
                    random_matrix(1, 1, rng)};
  Matrix h(3, 4);
  h.rowwise() = random_matrix(1, 4, rng).row(0);
  const auto r = temporal_attention(h, p);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(r.weights(k), 1.0 / 3.0, 1e-15);
}

TEST(TemporalAttention, TwoThirdsOneThird) {
  // e_1 = W2 tanh(W1 h_1) = ln 2 and e_2 = 0.
  AttentionParams p{Matrix::Ones(1, 1), Matrix::Zero(1, 1),
                    Matrix::Constant(1, 1, std::log(2.0) / std::tanh(1.0)), Matrix::Zero(1, 1)};
  Matrix h(2, 1);
  h << 1.0, 0.0;
  const auto r = temporal_attention(h, p);
  EXPECT_NEAR(r.weights(0), 2.0 / 3.0, 1e-9);
  EXPECT_NEAR(r.weights(1), 1.0 / 3.0, 1e-9);
  EXPECT_NEAR(r.output(0), 2.0 / 3.0, 1e-9);
}

TEST(TemporalAttention, WeightsFormDistributionAndIgnoreShift) {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    AttentionParams p{random_matrix(5, 4, rng, 2.0), random_matrix(1, 4, rng), random_matrix(4, 1, rng, 2.0),
                      random_matrix(1, 1, rng)};
    const Matrix h = random_matrix(3, 5, rng, 3.0);
    const auto r = temporal_attention(h, p);
    EXPECT_NEAR(r.weights.sum(), 1.0, 1e-12);
    EXPECT_GT(r.weights.minCoeff(), 0.0);
    auto shifted = p;
    shifted.b2(0, 0) += 7.5;
    EXPECT_LE((temporal_attention(h, shifted).weights - r.weights).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Fusion, ZeroFluctuationGivesTrend) {
  Rng rng(4);
  const auto p = random_params(2, 3, 4, 3, rng);
  const auto c = wavelet::decompose(random_matrix(16, 3, rng), "db2", 2);
  const RowVector trend = avg_pool(c.approx) * p.fusion.trend_w + p.fusion.trend_b;
  EXPECT_EQ(trend_fluct_fuse(c, RowVector::Zero(4), p.fusion), trend);
}

TEST(Fusion, ClosedGateGivesTrend) {
  Rng rng(5);
  auto p = random_params(2, 3, 4, 3, rng);
  p.fusion.gate_w.setZero();
  p.fusion.gate_b.setConstant(-800.0);
  const auto c = wavelet::decompose(random_matrix(16, 3, rng), "db2", 2);
  const RowVector trend = avg_pool(c.approx) * p.fusion.trend_w + p.fusion.trend_b;
  EXPECT_LE((trend_fluct_fuse(c, RowVector::Constant(4, 5.0), p.fusion) - trend).cwiseAbs().maxCoeff(), 1e-300);
}

TEST(Fusion, HandExample) {
  // h_trend = 1 and gate pre-activation 0 give z = 1 + 0.5 * 2.
  FusionParams p;
  p.trend_w = Matrix::Zero(1, 1);
  p.trend_b = Matrix::Ones(1, 1);
  p.gate_w = Matrix::Zero(1, 1);
  p.gate_b = Matrix::Zero(1, 1);
  const auto c = wavelet::decompose(Matrix::Ones(4, 1), "db1", 1);
  EXPECT_NEAR(fluctuation_gate(c, p)(0), 0.5, 1e-15);
  EXPECT_NEAR(trend_fluct_fuse(c, RowVector::Constant(1, 2.0), p)(0), 2.0, 1e-15);
}

TEST(Fusion, GateStaysInsideUnitInterval) {
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = random_params(2, 3, 6, 3, rng);
    const auto c = wavelet::decompose(random_matrix(16, 3, rng, 2.0), "db2", 2);
    const RowVector g = fluctuation_gate(c, p.fusion);
    EXPECT_GT(g.minCoeff(), 0.0);
    EXPECT_LT(g.maxCoeff(), 1.0);
  }
}

TEST(EmbedAll, MatchesDirectComputation) {
  Rng rng(7);
  const WaveletConfig cfg;
  const auto p = random_params(cfg.level, 9, 48, 48, rng);
  std::vector<Matrix> windows;
  for (int i = 0; i < 5; ++i) windows.push_back(random_matrix(20, 9, rng));
  const Matrix z = embed_all(windows, cfg, p);
  ASSERT_EQ(z.rows(), 5);
  ASSERT_EQ(z.cols(), 48);
  for (int i = 0; i < 5; ++i) {
    EXPECT_TRUE(z.row(i).isApprox(reference_embedding(windows[static_cast<std::size_t>(i)], cfg, p), 1e-12));
  }
}

TEST(EmbedAll, SingleStockAndDuplicateRows) {
  Rng rng(8);
  const WaveletConfig cfg{"db2", 2, wavelet::Boundary::kPeriodization};
  const auto p = random_params(2, 3, 5, 4, rng);
  const Matrix w = random_matrix(8, 3, rng);
  const std::vector<Matrix> one = {w};
  const Matrix z1 = embed_all(one, cfg, p);
  ASSERT_EQ(z1.rows(), 1);
  EXPECT_TRUE(z1.row(0).isApprox(reference_embedding(w, cfg, p), 1e-12));
  const std::vector<Matrix> twin = {w, w};
  const Matrix z2 = embed_all(twin, cfg, p);
  EXPECT_EQ(z2.row(0), z2.row(1));
}

TEST(EmbedAll, GradientsMatchFiniteDifferences) {
  Rng rng(9);
  const WaveletConfig cfg{"db2", 2, wavelet::Boundary::kPeriodization};
  auto p = random_params(2, 3, 4, 3, rng);
  const std::vector<Matrix> windows = {random_matrix(8, 3, rng), random_matrix(8, 3, rng)};

  ad::Tape tape;
  taped::TemporalVars v;
  for (int k = 0; k < 2; ++k) {
    v.level_w.push_back(tape.variable(p.fusion.level_w[static_cast<std::size_t>(k)]));
    v.level_b.push_back(tape.variable(p.fusion.level_b[static_cast<std::size_t>(k)]));
  }
  v.att_w1 = tape.variable(p.attention.w1);
  v.att_b1 = tape.variable(p.attention.b1);
  v.att_w2 = tape.variable(p.attention.w2);
  v.att_b2 = tape.variable(p.attention.b2);
  v.trend_w = tape.variable(p.fusion.trend_w);
  v.trend_b = tape.variable(p.fusion.trend_b);
  v.gate_w = tape.variable(p.fusion.gate_w);
  v.gate_b = tape.variable(p.fusion.gate_b);
  const auto loss = ad::squared_norm(taped::embed(pool_bands(windows, cfg), v));
  tape.backward(loss);

  std::vector<Matrix*> params = {&p.fusion.level_w[0], &p.fusion.level_b[0], &p.fusion.level_w[1],
                                 &p.fusion.level_b[1], &p.attention.w1,      &p.attention.b1,
                                 &p.attention.w2,      &p.attention.b2,      &p.fusion.trend_w,
                                 &p.fusion.trend_b,    &p.fusion.gate_w,     &p.fusion.gate_b};
  std::vector<std::string> names = {"level1.w", "level1.b", "level2.w", "level2.b", "att.w1", "att.b1",
                                    "att.w2",   "att.b2",   "trend.w",  "trend.b",  "gate.w", "gate.b"};
  std::vector<Matrix> grads = {v.level_w[0].grad(), v.level_b[0].grad(), v.level_w[1].grad(),
                               v.level_b[1].grad(), v.att_w1.grad(),     v.att_b1.grad(),
                               v.att_w2.grad(),     v.att_b2.grad(),     v.trend_w.grad(),
                               v.trend_b.grad(),    v.gate_w.grad(),     v.gate_b.grad()};
  const auto check = testing::check_gradients(params, names, grads, [&]() {
    return embed_all(windows, cfg, p).squaredNorm();
  });
  EXPECT_LT(check.max_relative_error, 1e-4) << check.worst;
  EXPECT_EQ(check.entries, 2 * (3 * 4 + 4) + (4 * 3 + 3 + 3 + 1) + (3 * 4 + 4) + (4 * 4 + 4));
}

TEST(GruEncode, GradientsMatchFiniteDifferences) {
  Rng rng(10);
  const Eigen::Index d = 3, hdim = 4, m = 5;
  std::vector<Matrix> w = {random_matrix(d, hdim, rng, 0.5), random_matrix(hdim, hdim, rng, 0.5),
                           random_matrix(1, hdim, rng, 0.1), random_matrix(d, hdim, rng, 0.5),
                           random_matrix(hdim, hdim, rng, 0.5), random_matrix(1, hdim, rng, 0.1),
                           random_matrix(d, hdim, rng, 0.5), random_matrix(hdim, hdim, rng, 0.5),
                           random_matrix(1, hdim, rng, 0.1), random_matrix(hdim, m, rng, 0.5),
                           random_matrix(1, m, rng, 0.1)};
  std::vector<Matrix> steps;
  for (int t = 0; t < 6; ++t) steps.push_back(random_matrix(2, d, rng));

  auto run = [&](ad::Tape& tape, bool variables, std::vector<ad::Var>* out) {
    std::vector<ad::Var> vars;
    for (const auto& m : w) vars.push_back(variables ? tape.variable(m) : tape.constant(m));
    taped::GruVars g{vars[0], vars[1], vars[2], vars[3], vars[4], vars[5],
                     vars[6], vars[7], vars[8], vars[9], vars[10]};
    auto loss = ad::squared_norm(taped::gru_encode(steps, g));
    if (out) *out = vars;
    return loss;
  };
  ad::Tape tape;
  std::vector<ad::Var> vars;
  const auto loss = run(tape, true, &vars);
  tape.backward(loss);

  std::vector<Matrix*> params;
  std::vector<std::string> names;
  std::vector<Matrix> grads;
  for (std::size_t i = 0; i < w.size(); ++i) {
    params.push_back(&w[i]);
    names.push_back("gru" + std::to_string(i));
    grads.push_back(vars[i].grad());
  }
  const auto check = testing::check_gradients(params, names, grads, [&]() {
    ad::Tape t;
    return run(t, false, nullptr).scalar();
  });
  EXPECT_LT(check.max_relative_error, 1e-4) << check.worst;
}

}  // namespace
}  // namespace gamestock
