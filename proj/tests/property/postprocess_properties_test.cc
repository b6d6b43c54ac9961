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
#include <algorithm>
#include <vector>

#include "detkit/postprocess.h"
#include "gtest/gtest.h"
#include "testing/generators.h"
#include "testing/oracles.h"

namespace detkit {
namespace {

TEST(PostprocessProperties, NmsMatchesQuadraticOracle) {
  testing::Gen gen(301);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto dets = gen.Detections(gen.Int(0, 50), 1, 40, 40);
    const double t = gen.Grid(0.1, 0.9, 0.1);
    ASSERT_EQ(Nms(dets, t), testing::OracleNms(dets, t)) << trial;
  }
}

TEST(PostprocessProperties, NmsIsIdempotentAndPairwiseSeparated) {
  testing::Gen gen(302);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto dets = gen.Detections(gen.Int(0, 50), 1, 40, 40);
    const auto kept = Nms(dets, 0.5);
    ASSERT_EQ(Nms(kept, 0.5), kept);
    for (size_t i = 0; i < kept.size(); ++i)
      for (size_t j = i + 1; j < kept.size(); ++j)
        ASSERT_LT(Iou(kept[i].box, kept[j].box), 0.5);
    ASSERT_TRUE(std::is_sorted(kept.begin(), kept.end(), RanksBefore));
  }
}

TEST(PostprocessProperties, NmsOutputIndependentOfInputOrder) {
  testing::Gen gen(303);
  for (int trial = 0; trial < 1000; ++trial) {
    auto dets = gen.Detections(gen.Int(0, 40), 1, 40, 40);
    const auto kept = Nms(dets, 0.4);
    std::shuffle(dets.begin(), dets.end(), gen.rng());
    ASSERT_EQ(Nms(dets, 0.4), kept);
  }
}

TEST(PostprocessProperties, SoftNmsNeverRaisesScores) {
  testing::Gen gen(304);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto dets = gen.Detections(gen.Int(0, 40), 1, 40, 40, false);
    SoftNmsConfig config;
    config.decay = gen.Coin() ? SoftNmsDecay::kGaussian : SoftNmsDecay::kLinear;
    config.prune_score = 0.0;
    const auto out = SoftNms(dets, config);
    ASSERT_EQ(out.size(), dets.size());
    for (const Detection& d : out) {
      const auto it = std::find_if(dets.begin(), dets.end(), [&](const Detection& o) {
        return o.box == d.box && o.image_id == d.image_id;
      });
      ASSERT_NE(it, dets.end());
      ASSERT_LE(d.score, it->score);
    }
  }
}

TEST(PostprocessProperties, LinearFullRetentionPruneIsHardNms) {
  testing::Gen gen(305);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto dets = gen.Detections(gen.Int(0, 50), 1, 40, 40);
    SoftNmsConfig config;
    config.decay = SoftNmsDecay::kLinear;
    config.iou_trigger = gen.Grid(0.1, 0.9, 0.1);
    config.prune = SoftNmsPrune::kRetainedFraction;
    config.prune_score = 1.0;
    ASSERT_EQ(SoftNms(dets, config), Nms(dets, config.iou_trigger)) << trial;
  }
}

TEST(PostprocessProperties, RemoveOverlapsMatchesClosureOracle) {
  testing::Gen gen(306);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto dets = gen.Detections(gen.Int(0, 30), 1, 30, 30);
    const double t = gen.Grid(0.3, 0.9, 0.1);
    const auto out = RemoveOverlaps(dets, t);
    ASSERT_EQ(out, testing::OracleRemoveOverlaps(dets, t));
    // Survivors come from different groups, so none of them overlap.
    for (size_t i = 0; i < out.size(); ++i)
      for (size_t j = i + 1; j < out.size(); ++j)
        ASSERT_LT(Iou(out[i].box, out[j].box), t);
    ASSERT_EQ(RemoveOverlaps(out, t), out);
  }
}

TEST(PostprocessProperties, FilterIdempotentAndMonotone) {
  testing::Gen gen(307);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto dets = gen.Detections(gen.Int(0, 30), 3);
    const double lo = gen.Real(0, 1), hi = gen.Real(lo, 1);
    const auto a = FilterConfidence(dets, lo);
    ASSERT_EQ(FilterConfidence(a, lo), a);
    ASSERT_GE(a.size(), FilterConfidence(dets, hi).size());
    const auto s = AdaptiveSuppress(dets, lo);
    ASSERT_EQ(s.size(), dets.size() == 1 ? 1 : a.size());
  }
}

}  // namespace
}  // namespace detkit
