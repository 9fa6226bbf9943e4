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


#include "gamestock/forecaster.hpp"

#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "gamestock/config.hpp"
#include "gamestock/synthetic.hpp"
#include "micro_instance.hpp"
#include "test_util.hpp"

namespace gamestock {
namespace {

using testing::check_micro_gradients;
using testing::make_micro_instance;
using testing::micro_loss;

std::set<std::string> param_names(const Forecaster& net) {
  std::set<std::string> out;
  for (std::size_t i = 0; i < net.params().size(); ++i) out.insert(net.params().name(i));
  return out;
}

bool has_prefix(const std::set<std::string>& names, const std::string& prefix) {
  for (const auto& n : names) {
    if (n.rfind(prefix, 0) == 0) return true;
  }
  return false;
}

TEST(Forecaster, MicroInstanceGradientsMatchFiniteDifferences) {
  auto mi = make_micro_instance();
  Forecaster net(mi.config, 3, mi.graph, 11);
  const auto check = check_micro_gradients(net, mi.inputs);
  EXPECT_GT(check.entries, 200);
  EXPECT_LT(check.max_relative_error, 1e-3) << check.worst;
}

TEST(Forecaster, MicroGradientsForAblationsAndNodeFeatures) {
  for (int variant = 0; variant < 3; ++variant) {
    auto mi = make_micro_instance(variant + 20);
    if (variant == 0) mi.config.node_features = NodeFeatures::kMemberMean;
    if (variant == 1) mi.config.normalization = Normalization::kConstant;
    if (variant == 2) mi.config.use_mdwt = false;
    std::vector<Matrix> windows;
    if (variant == 2) {
      // Recurrent encoder consumes raw steps; rebuild the inputs.
      mi = make_micro_instance(variant + 20);
      mi.config.use_mdwt = false;
      std::mt19937_64 rng(3);
      std::normal_distribution<double> g;
      for (int i = 0; i < 3; ++i) windows.push_back(Matrix::NullaryExpr(8, 3, [&]() { return g(rng); }));
      std::vector<std::vector<StockEvent>> events(3);
      events[0].push_back({19, {-1, 0, 1}, -0.02});
      LabelVector labels{Vector::Constant(3, 0.1), {true, false, true}};
      labels.y(2) = -0.3;
      mi.inputs = prepare_inputs(mi.config, windows, events, 20, &labels);
    }
    Forecaster net(mi.config, 3, mi.graph, 12);
    const auto check = check_micro_gradients(net, mi.inputs);
    EXPECT_LT(check.max_relative_error, 1e-3) << "variant " << variant << " " << check.worst;
  }
}

TEST(Forecaster, SmallStepDecreasesSingleSampleObjective) {
  const auto mi = make_micro_instance();
  Forecaster net(mi.config, 3, mi.graph, 13);
  const double before = micro_loss(net, mi.inputs);
  ad::Tape tape;
  nn::Binding binding(tape, net.params());
  tape.backward(net.forward(binding, mi.inputs).total);
  nn::AdamW adam(net.params(), {1e-4, 1e-3});
  adam.step(net.params(), binding.gradients());
  EXPECT_LT(micro_loss(net, mi.inputs), before);
}

TEST(Forecaster, AblationNesting) {
  auto mi = make_micro_instance();
  mi.config.use_gre = false;
  Forecaster no_gre(mi.config, 3, mi.graph, 14);
  ad::Tape tape;
  nn::Binding binding(tape, no_gre.params());
  const auto fv = no_gre.forward(binding, mi.inputs);
  EXPECT_EQ(fv.total.scalar(), fv.l_pred.scalar());
  const auto names = param_names(no_gre);
  EXPECT_FALSE(has_prefix(names, "event."));
  EXPECT_FALSE(has_prefix(names, "fuse."));
  EXPECT_FALSE(has_prefix(names, "action."));
  EXPECT_TRUE(has_prefix(names, "graph."));

  mi.config.use_hgcn = false;
  mi.config.use_mdwt = false;
  Forecaster bare(mi.config, 3, mi.graph, 14);
  for (const auto& n : param_names(bare)) {
    EXPECT_TRUE(n.rfind("gru.", 0) == 0 || n.rfind("head.", 0) == 0) << n;
  }
}

TEST(Forecaster, ZeroParametersPredictZero) {
  const auto mi = make_micro_instance();
  Forecaster net(mi.config, 3, mi.graph, 15);
  for (std::size_t i = 0; i < net.params().size(); ++i) net.params().value(i).setZero();
  EXPECT_TRUE(net.predict(mi.inputs).isZero(0.0));
}

TEST(Forecaster, IdenticalIsolatedStocksScoreIdentically) {
  auto mi = make_micro_instance();
  const std::vector<std::string> stocks = {"X", "Y"};
  const auto graph = build_graph(stocks, {}, {});
  EXPECT_FALSE(graph.warnings.empty());
  const Matrix w = Matrix::Random(8, 3);
  const std::vector<Matrix> windows = {w, w};
  std::vector<std::vector<StockEvent>> events(2);
  events[0].push_back({18, {1, 1, 0}, 0.01});
  events[1].push_back({18, {1, 1, 0}, 0.01});
  const auto inputs = prepare_inputs(mi.config, windows, events, 20, nullptr);
  Forecaster net(mi.config, 3, graph, 16);
  const Vector y = net.predict(inputs);
  EXPECT_EQ(y(0), y(1));
  EXPECT_TRUE(std::isfinite(y(0)));
}

TEST(Forecaster, ForwardRejectsUnresolvedScaleAndShapeMismatch) {
  auto mi = make_micro_instance();
  mi.config.label_scale = 0.0;
  Forecaster net(mi.config, 3, mi.graph, 17);
  ad::Tape tape;
  nn::Binding binding(tape, net.params());
  EXPECT_THROW(net.forward(binding, mi.inputs), Error);
  auto bad = mi.config;
  bad.lookback = 2;
  EXPECT_THROW(bad.validate(), ConfigError);
  EXPECT_THROW(parse_node_features("mean"), ConfigError);
}

TEST(PrepareInputs, EventsWeightsAndTargets) {
  const auto mi = make_micro_instance();
  const auto& in = mi.inputs;
  ASSERT_EQ(in.event_features.rows(), 1);
  EXPECT_EQ(in.event_weights(1, 0), 1.0);
  EXPECT_EQ(in.event_weights.row(0).sum(), 0.0);
  EXPECT_EQ(in.evented, (std::vector<bool>{false, true, false}));
  const auto eq = solve_equilibrium(0.04, mi.config.game);
  for (int p = 0; p < 3; ++p) EXPECT_EQ(in.eq_target(1, p), eq.actions[static_cast<std::size_t>(p)]);
  EXPECT_EQ(in.event_features(0, 4), 1.0);
  EXPECT_EQ(in.event_features(0, 5), -1.0);
}

TEST(PrepareInputs, EventsOutsideWindowAreIgnored) {
  auto mi = make_micro_instance();
  std::vector<Matrix> windows(3, Matrix::Random(8, 3));
  std::vector<std::vector<StockEvent>> events(3);
  events[0].push_back({12, {1, 1, 1}, 0.1});  // age 8 with L = 8
  events[0].push_back({21, {1, 1, 1}, 0.1});  // after the anchor
  const auto in = prepare_inputs(mi.config, windows, events, 20, nullptr);
  EXPECT_EQ(in.event_features.rows(), 0);
  EXPECT_FALSE(in.evented[0]);
}

TEST(GroupEvents, SortsByDayPerStock) {
  std::vector<LocatedEvent> events = {{1, 9, {0, 0, 0}, 0.0}, {0, 4, {0, 0, 0}, 0.0}, {1, 3, {0, 0, 0}, 0.0}};
  const auto grouped = group_events(events, 2);
  ASSERT_EQ(grouped[1].size(), 2u);
  EXPECT_EQ(grouped[1][0].day, 3);
  EXPECT_EQ(grouped[1][1].day, 9);
  EXPECT_THROW(group_events(events, 1), Error);
}

TEST(MemberMeans, AveragesLinkedStocks) {
  const auto mi = make_micro_instance();
  const Matrix m = member_means(mi.graph);
  ASSERT_EQ(m.cols(), 3);
  ASSERT_EQ(m.rows(), mi.graph.num_nodes() - 3);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const auto& id = mi.graph.node_ids[static_cast<std::size_t>(r + 3)];
    if (id == "I1") {
      EXPECT_EQ(m.row(r), (RowVector(3) << 0.5, 0.5, 0.0).finished());
    } else if (id == "I2") {
      EXPECT_EQ(m.row(r), (RowVector(3) << 0.0, 0.0, 1.0).finished());
    }
    const double sum = m.row(r).sum();
    EXPECT_TRUE(sum == 0.0 || std::abs(sum - 1.0) < 1e-15);
  }
}

TEST(LossTotal, Examples) {
  EXPECT_NEAR(loss_total(0.04, 1.0, 0.1), 0.14, 1e-15);
  EXPECT_EQ(loss_total(0.04, 1.0, 0.0), 0.04);
  Vector y(3);
  y << 0.1, -0.2, 0.3;
  const Matrix a = Matrix::Ones(3, 3);
  const std::vector<bool> all(3, true);
  EXPECT_EQ(loss_total(y, y, all, a, a, all, 0.1), 0.0);
  Vector p = y;
  p(0) += 0.3;  // squared error 0.09 on one of three stocks
  Matrix b = a;
  b(2, 1) = -1.0;  // squared distance 4 on one of three stocks
  EXPECT_NEAR(loss_total(p, y, all, b, a, all, 0.5), 0.03 + 0.5 * 4.0 / 3.0, 1e-15);
  EXPECT_THROW(loss_total(p, y, std::vector<bool>(3, false), b, a, all, 0.5), Error);
}

TEST(EarlyStopping, PatienceArithmetic) {
  EarlyStopping improving(20);
  for (int e = 1; e <= 300; ++e) {
    EXPECT_TRUE(improving.update(e, 1.0 / e));
    EXPECT_FALSE(improving.should_stop());
  }
  EXPECT_EQ(improving.best_epoch(), 300);

  EarlyStopping flat(20);
  int stopped = 0;
  for (int e = 1; e <= 300 && !stopped; ++e) {
    flat.update(e, 1.0);
    if (flat.should_stop()) stopped = e;
  }
  EXPECT_EQ(stopped, 21);
  EXPECT_EQ(flat.best_epoch(), 1);
}

TEST(PlateauScheduler, HalvesAfterPatienceWithFloor) {
  PlateauScheduler s(1e-3, 0.5, 5, 1e-6);
  EXPECT_EQ(s.update(1.0), 1e-3);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(s.update(1.0), 1e-3);
  EXPECT_EQ(s.update(1.0), 5e-4);
  EXPECT_EQ(s.update(0.5), 5e-4);
  for (int i = 0; i < 100; ++i) s.update(2.0);
  EXPECT_EQ(s.learning_rate(), 1e-6);
}

class TrainingTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    SyntheticSpec spec;
    spec.num_stocks = 12;
    spec.num_industries = 3;
    spec.num_days = 140;
    spec.event_rate = 0.05;
    spec.seed = 3;
    market_ = new SyntheticMarket(generate(spec));
    data_ = new MarketData(assemble_market(market_->panel, market_->industries, market_->holdings,
                                           market_->events, SplitDates{}, nullptr));
  }
  static void TearDownTestSuite() {
    delete data_;
    delete market_;
  }
  static ModelConfig small_model() {
    ModelConfig m;
    m.embed_dim = 8;
    m.graph_hidden = 8;
    m.attention_hidden = 8;
    m.action_hidden = 8;
    return m;
  }
  static TrainConfig short_training() {
    TrainConfig t;
    t.max_epochs = 3;
    t.seed = 5;
    return t;
  }
  static Checkpoint checkpoint(const TrainResult& r, const TrainConfig& t) {
    return {r.model, t, r.params, r.stats, data_->panel.stocks, data_->graph.node_ids, kNumChannels};
  }
  static inline SyntheticMarket* market_ = nullptr;
  static inline MarketData* data_ = nullptr;
};

TEST_F(TrainingTest, SameSeedGivesIdenticalLogsAndPredictions) {
  const auto a = train(small_model(), short_training(), *data_);
  const auto b = train(small_model(), short_training(), *data_);
  ASSERT_EQ(a.log.size(), 3u);
  ASSERT_EQ(a.log.size(), b.log.size());
  for (std::size_t e = 0; e < a.log.size(); ++e) {
    EXPECT_EQ(a.log[e].train_loss, b.log[e].train_loss);
    EXPECT_EQ(a.log[e].valid_loss, b.log[e].valid_loss);
  }
  EXPECT_GT(a.model.label_scale, 0.0);
  const auto pa = predict(checkpoint(a, short_training()), *data_, data_->split.test);
  const auto pb = predict(checkpoint(b, short_training()), *data_, data_->split.test);
  EXPECT_EQ(pa.values, pb.values);
  EXPECT_TRUE(pa.values.allFinite());
}

TEST_F(TrainingTest, CheckpointRoundTripReproducesPredictions) {
  const auto r = train(small_model(), short_training(), *data_);
  const auto ck = checkpoint(r, short_training());
  testing::TempDir dir;
  save_checkpoint(ck, dir.file("ck.json"));
  const auto back = load_checkpoint(dir.file("ck.json"));
  EXPECT_EQ(back.model.label_scale, ck.model.label_scale);
  EXPECT_EQ(back.model.node_features, ck.model.node_features);
  EXPECT_EQ(back.stats.mean.size(), ck.stats.mean.size());
  const auto p1 = predict(ck, *data_, data_->split.test);
  const auto p2 = predict(back, *data_, data_->split.test);
  EXPECT_EQ(p1.values, p2.values);

  const auto labels = label_table(data_->panel, data_->split.test, ck.model.lookback);
  EXPECT_EQ(labels.dates, p1.dates);
  EXPECT_EQ(p1.dates.back(), data_->panel.dates[data_->panel.dates.size() - 2]);
  EXPECT_NO_THROW(evaluate(p1, labels));

  const auto empty = predict(ck, *data_, {Date{2030, 1, 1}, Date{2029, 1, 1}});
  EXPECT_EQ(empty.values.rows(), 0);

  testing::write_file(dir.file("bad.json"), "{\"version\": \"other\"}");
  EXPECT_THROW(load_checkpoint(dir.file("bad.json")), Error);
}

TEST_F(TrainingTest, PredictRejectsMismatchedStocks) {
  const auto r = train(small_model(), short_training(), *data_);
  auto ck = checkpoint(r, short_training());
  ck.stocks.back() = "ZZZ";
  try {
    predict(ck, *data_, data_->split.test);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("ZZZ"), std::string::npos);
  }
}

TEST_F(TrainingTest, AblationsTrainWithoutGameLoss) {
  auto m = small_model();
  m.use_gre = false;
  const auto r = train(m, short_training(), *data_);
  EXPECT_EQ(r.log.size(), 3u);
  m.use_hgcn = false;
  m.use_mdwt = false;
  EXPECT_NO_THROW(train(m, short_training(), *data_));
}

TEST_F(TrainingTest, TrainingLogCsv) {
  const auto r = train(small_model(), short_training(), *data_);
  testing::TempDir dir;
  write_training_log(r.log, dir.file("log.csv"));
  const auto text = testing::read_file(dir.file("log.csv"));
  EXPECT_EQ(text.rfind("epoch,train_loss,valid_loss,lr\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
}

}  // namespace
}  // namespace gamestock
