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


#include "gamestock/config.hpp"

#include <algorithm>

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace gamestock {
namespace {

std::string value_of(const RunConfig& c, const std::string& key) {
  for (const auto& [k, v] : flatten(c)) {
    if (k == key) return v;
  }
  return "<absent>";
}

TEST(Config, DefaultsMatchDocumentedValues) {
  const auto c = load_config("", {});
  EXPECT_EQ(c.model.lookback, 20);
  EXPECT_EQ(c.model.wavelet.level, 3);
  EXPECT_EQ(c.model.embed_dim, 48);
  EXPECT_EQ(c.model.graph_hidden, 64);
  EXPECT_EQ(c.model.graph_layers, 2);
  EXPECT_EQ(c.model.lambda_eq, 0.1);
  EXPECT_EQ(c.train.learning_rate, 1e-3);
  EXPECT_EQ(c.train.weight_decay, 1e-3);
  EXPECT_EQ(c.train.max_epochs, 300);
  EXPECT_EQ(c.train.patience, 20);
  EXPECT_EQ(c.synthetic.num_stocks, 60);
  EXPECT_EQ(c.synthetic.num_industries, 6);
  EXPECT_EQ(c.synthetic.num_days, 600);
  EXPECT_EQ(c.synthetic.event_decay, 0.1);
  EXPECT_TRUE(c.model.use_mdwt && c.model.use_hgcn && c.model.use_gre);
}

TEST(Config, UnknownKeyIsNamed) {
  testing::TempDir dir;
  testing::write_file(dir.file("c.json"), R"({"wavelet": {"lvel": 2}})");
  try {
    load_config(dir.file("c.json"), {});
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("wavelet.lvel"), std::string::npos) << e.what();
  }
  EXPECT_THROW(load_config("", {"model.nope=1"}), ConfigError);
}

TEST(Config, NestedAndDottedKeysFlattenAlike) {
  testing::TempDir dir;
  testing::write_file(dir.file("a.json"), R"({"wavelet": {"level": 2, "name": "db2"}, "game": {"beta": [[0,1,0],[0,0,0],[0,0,0]]}})");
  testing::write_file(dir.file("b.json"), R"({"wavelet.level": 2, "wavelet.name": "db2", "game.beta": [0,1,0,0,0,0,0,0,0]})");
  const auto a = load_config(dir.file("a.json"), {});
  const auto b = load_config(dir.file("b.json"), {});
  EXPECT_EQ(flatten(a), flatten(b));
  EXPECT_EQ(a.model.wavelet.level, 2);
  EXPECT_EQ(a.model.game.beta[0][1], 1.0);
}

TEST(Config, OverridesWinOverFile) {
  testing::TempDir dir;
  testing::write_file(dir.file("c.json"), R"({"train": {"seed": 3, "max_epochs": 10}})");
  const auto c = load_config(dir.file("c.json"), {"train.seed=7", "model.normalization=constant",
                                                  "model.node_features=member_mean", "model.use_gre=false"});
  EXPECT_EQ(c.train.seed, 7u);
  EXPECT_EQ(c.train.max_epochs, 10);
  EXPECT_EQ(c.model.normalization, Normalization::kConstant);
  EXPECT_EQ(c.model.node_features, NodeFeatures::kMemberMean);
  EXPECT_FALSE(c.model.use_gre);
  EXPECT_EQ(value_of(c, "train.seed"), "7");
  EXPECT_EQ(value_of(c, "model.node_features"), "\"member_mean\"");
}

TEST(Config, IllTypedAndInvalidValues) {
  EXPECT_THROW(load_config("", {"train.seed=abc"}), ConfigError);
  EXPECT_THROW(load_config("", {"model.use_gre=1"}), ConfigError);
  EXPECT_THROW(load_config("", {"wavelet.name=db9"}), ConfigError);
  EXPECT_THROW(load_config("", {"wavelet.boundary=zero"}), ConfigError);
  EXPECT_THROW(load_config("", {"model.lookback=4"}), ConfigError);
  EXPECT_THROW(load_config("", {"game.beta=[1,0,0,0,0,0,0,0,0]"}), ConfigError);
  EXPECT_THROW(load_config("", {"synthetic.stocks=3", "synthetic.industries=6"}), ConfigError);
  EXPECT_THROW(load_config("", {"novalue"}), ConfigError);
  testing::TempDir dir;
  testing::write_file(dir.file("bad.json"), "{not json");
  EXPECT_THROW(load_config(dir.file("bad.json"), {}), ConfigError);
  testing::write_file(dir.file("list.json"), "[1, 2]");
  EXPECT_THROW(load_config(dir.file("list.json"), {}), ConfigError);
}

TEST(Config, FlattenRoundTripsThroughSetKey) {
  auto c = load_config("", {"model.lambda_eq=0.25", "data.dir=/tmp/x y", "split.test_start=2019-01-02"});
  RunConfig copy;
  for (const auto& [k, v] : flatten(c)) set_key(copy, k, v);
  EXPECT_EQ(flatten(copy), flatten(c));
  EXPECT_EQ(c.data.dir, "/tmp/x y");
  EXPECT_EQ(c.data.panel_path(), "/tmp/x y/panel.csv");
}

TEST(Config, DefaultSplitIsSixtyTwentyTwenty) {
  StockPanel panel;
  for (int d = 0; d < 100; ++d) panel.dates.push_back(Date::from_serial(Date{2020, 1, 1}.serial() + d));
  const auto s = resolve_split(SplitDates{}, panel);
  EXPECT_EQ(s.train.start, panel.dates[0]);
  EXPECT_EQ(s.train.end, panel.dates[59]);
  EXPECT_EQ(s.valid.start, panel.dates[60]);
  EXPECT_EQ(s.valid.end, panel.dates[79]);
  EXPECT_EQ(s.test.start, panel.dates[80]);
  EXPECT_EQ(s.test.end, panel.dates[99]);
  SplitDates overlap;
  overlap.valid_start = panel.dates[50].str();
  EXPECT_THROW(resolve_split(overlap, panel), Error);
}

}  // namespace
}  // namespace gamestock
