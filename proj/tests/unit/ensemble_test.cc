// Copyright 2026 The detkit Authors.
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
//
#include "detkit/ensemble.h"

#include <vector>

#include "gtest/gtest.h"
#include "testing/oracles.h"

namespace detkit {
namespace {

void ExpectBoxNear(const Box& a, const Box& b, double tol = 1e-9) {
  EXPECT_NEAR(a.xmin, b.xmin, tol);
  EXPECT_NEAR(a.ymin, b.ymin, tol);
  EXPECT_NEAR(a.xmax, b.xmax, tol);
  EXPECT_NEAR(a.ymax, b.ymax, tol);
}

TEST(WbfTest, SingletonUnchanged) {
  const std::vector<std::vector<Detection>> models = {
      {{"a", {1, 2, 3, 4}, 0.6}}};
  FusionConfig config;
  config.score_mode = FusionScoreMode::kMean;
  EXPECT_EQ(*WeightedBoxesFusion(models, config), models[0]);
}

TEST(WbfTest, TwoModelExample) {
  const std::vector<std::vector<Detection>> models = {
      {{"a", {0, 0, 10, 10}, 0.9}}, {{"a", {2, 2, 12, 12}, 0.6}}};
  EXPECT_NEAR(Iou(models[0][0].box, models[1][0].box), 64.0 / 136.0, 1e-12);
  for (FusionScoreMode mode :
       {FusionScoreMode::kMean, FusionScoreMode::kMeanRescaled}) {
    FusionConfig config{0.4, {}, mode};
    const auto out = *WeightedBoxesFusion(models, config);
    ASSERT_EQ(out.size(), 1u);
    ExpectBoxNear(out[0].box, {0.8, 0.8, 10.8, 10.8});
    EXPECT_NEAR(out[0].score, 0.75, 1e-12);
  }
}

TEST(WbfTest, RescaleHalvesLonelyBoxes) {
  const std::vector<std::vector<Detection>> models = {
      {{"a", {0, 0, 10, 10}, 0.8}, {"a", {50, 50, 60, 60}, 0.6}}, {}};
  const auto out = *WeightedBoxesFusion(models, {});
  ASSERT_EQ(out.size(), 2u);
  EXPECT_NEAR(out[0].score, 0.4, 1e-12);
  EXPECT_NEAR(out[1].score, 0.3, 1e-12);
}

TEST(WbfTest, ClustersStayWithinImage) {
  const std::vector<std::vector<Detection>> models = {
      {{"a", {0, 0, 10, 10}, 0.8}}, {{"b", {0, 0, 10, 10}, 0.8}}};
  EXPECT_EQ(WeightedBoxesFusion(models, {})->size(), 2u);
}

TEST(WbfTest, WeightedExampleMatchesOracle) {
  const std::vector<std::vector<Detection>> models = {
      {{"a", {0, 0, 10, 10}, 0.9}, {"a", {30, 30, 40, 42}, 0.5}},
      {{"a", {1, 0, 11, 10}, 0.7}, {"a", {31, 30, 41, 40}, 0.8}},
      {{"a", {0, 1, 10, 12}, 0.4}}};
  const std::vector<double> weights = {2.0, 1.0, 1.5};
  const auto expected = testing::OracleWbf(models, weights, 0.55, true);
  const auto out =
      *WeightedBoxesFusion(models, {0.55, weights, FusionScoreMode::kMeanRescaled});
  ASSERT_EQ(out.size(), expected.size());
  for (const auto& cluster : expected) {
    bool found = false;
    for (const Detection& d : out) {
      if (std::abs(d.box.xmin - cluster.fused.xmin) < 1e-9 &&
          std::abs(d.box.ymin - cluster.fused.ymin) < 1e-9) {
        found = true;
        ExpectBoxNear(d.box, cluster.fused);
        EXPECT_NEAR(d.score, cluster.score, 1e-9);
      }
    }
    EXPECT_TRUE(found);
  }
}

TEST(WbfTest, ZeroWeightModelIgnored) {
  const std::vector<std::vector<Detection>> models = {
      {{"a", {0, 0, 10, 10}, 0.9}}, {{"a", {0, 0, 10, 10}, 0.1}}};
  FusionConfig config{0.55, {1.0, 0.0}, FusionScoreMode::kMean};
  const auto out = *WeightedBoxesFusion(models, config);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_NEAR(out[0].score, 0.9, 1e-12);
}

TEST(WbfTest, ConfigErrors) {
  const std::vector<std::vector<Detection>> two(2);
  EXPECT_FALSE(WeightedBoxesFusion({}, {}).ok());
  EXPECT_FALSE(WeightedBoxesFusion(two, {0.55, {1.0}, {}}).ok());
  EXPECT_FALSE(WeightedBoxesFusion(two, {0.55, {0.0, 0.0}, {}}).ok());
  EXPECT_FALSE(WeightedBoxesFusion(two, {0.55, {-1.0, 1.0}, {}}).ok());
  EXPECT_FALSE(WeightedBoxesFusion(two, {0.0, {}, {}}).ok());
  EXPECT_EQ(*ParseFusionScoreMode("mean"), FusionScoreMode::kMean);
  EXPECT_FALSE(ParseFusionScoreMode("max").ok());
}

TEST(TtaMergeTest, IdentityIsPlainNms) {
  const std::vector<Detection> dets = {{"img", {0, 0, 10, 10}, 0.9},
                                       {"img", {1, 1, 11, 11}, 0.8},
                                       {"img", {20, 20, 30, 30}, 0.7}};
  const std::vector<TtaView> views = {{{AffineMap::Identity(), "id"}, dets}};
  EXPECT_EQ(*TtaMerge(views, 0.3), Nms(dets, 0.3));
}

TEST(TtaMergeTest, FlipMapsBack) {
  const std::vector<TtaView> views = {
      {{AffineMap::HorizontalFlip(100), "hflip"},
       {{"img", {10, 10, 20, 20}, 0.9}}}};
  const auto out = *TtaMerge(views, 0.3);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0], (Detection{"img", {80, 10, 90, 20}, 0.9}));
}

TEST(TtaMergeTest, SymmetricViewsCollapse) {
  const Detection centred{"img", {40, 10, 60, 30}, 0.8};
  const std::vector<TtaView> views = {
      {{AffineMap::Identity(), "id"}, {centred}},
      {{AffineMap::HorizontalFlip(100), "hflip"},
       {{"img", {40, 10, 60, 30}, 0.7}}}};
  const auto out = *TtaMerge(views, 0.3);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0], centred);
}

TEST(TtaMergeTest, SingularTransformFails) {
  const std::vector<TtaView> views = {
      {{AffineMap(0, 0, 0, 0, 0, 0), "flat"}, {}}};
  EXPECT_FALSE(TtaMerge(views, 0.3).ok());
  EXPECT_FALSE(TtaMerge({}, 0.0).ok());
}

TEST(PipelineTest, SingleModelEmptyChain) {
  const std::vector<std::vector<Detection>> models = {
      {{"a", {0, 0, 10, 10}, 0.9}, {"a", {50, 50, 60, 60}, 0.6}}};
  FusionConfig config;
  config.score_mode = FusionScoreMode::kMean;
  EXPECT_EQ(*EnsemblePipeline(models, config, {}), models[0]);
}

TEST(PipelineTest, ChainRunsAfterFusion) {
  const std::vector<std::vector<Detection>> models = {
      {{"a", {0, 0, 10, 10}, 0.9}, {"a", {50, 50, 60, 60}, 0.6}}, {}};
  const auto out = *EnsemblePipeline(models, {}, {FilterStep{0.4}});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_NEAR(out[0].score, 0.45, 1e-12);
  EXPECT_FALSE(EnsemblePipeline(models, {}, {FilterStep{-1}}).ok());
}

TEST(PipelineTest, SilentModelsLowerRescaledScores) {
  const std::vector<Detection> base = {{"a", {0, 0, 10, 10}, 0.9},
                                       {"a", {40, 40, 55, 50}, 0.7}};
  double previous = 2.0;
  for (size_t n = 1; n <= 5; ++n) {
    std::vector<std::vector<Detection>> models(n);
    models[0] = base;
    const auto out = *EnsemblePipeline(models, {}, {});
    ASSERT_EQ(out.size(), 2u);
    EXPECT_LT(out[0].score, previous);
    EXPECT_NEAR(out[0].score, 0.9 / static_cast<double>(n), 1e-12);
    previous = out[0].score;
  }
}

}  // namespace
}  // namespace detkit
