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
#include "detkit/geometry.h"

#include <cmath>
#include <limits>
#include <vector>

#include "gtest/gtest.h"
#include "testing/oracles.h"

namespace detkit {
namespace {

using ::detkit::testing::OracleArea;
using ::detkit::testing::OracleIou;

TEST(AreaTest, Basics) {
  EXPECT_EQ(Area({0, 0, 10, 10}), 100.0);
  EXPECT_EQ(Area({5, 5, 5, 9}), 0.0);
  const Box b{2, 3, 8, 9};
  EXPECT_EQ(Area(b), OracleArea(b));
  EXPECT_EQ(Area(b), 36.0);
}

TEST(IouTest, Identity) {
  const Box b{3, 4, 17, 29};
  EXPECT_EQ(Iou(b, b), 1.0);
}

TEST(IouTest, Disjoint) {
  EXPECT_EQ(Iou({0, 0, 10, 10}, {20, 20, 30, 30}), 0.0);
}

TEST(IouTest, PartialOverlap) {
  const Box a{0, 0, 10, 10}, b{5, 5, 15, 15};
  const double expected = OracleIou(a, b);
  EXPECT_DOUBLE_EQ(expected, 25.0 / 175.0);
  EXPECT_DOUBLE_EQ(Iou(a, b), expected);
}

TEST(IouTest, ZeroAreaBoxesHaveZeroIou) {
  EXPECT_EQ(Iou({5, 5, 5, 5}, {5, 5, 5, 5}), 0.0);
  EXPECT_EQ(Iou({0, 0, 0, 10}, {0, 0, 0, 10}), 0.0);
}

TEST(IouTest, TouchingEdgesDoNotIntersect) {
  EXPECT_EQ(IntersectionArea({0, 0, 10, 10}, {10, 0, 20, 10}), 0.0);
}

TEST(MergeTest, Idempotent) {
  const Box b{1, 2, 3, 4};
  EXPECT_EQ(Merge(b, b), b);
}

TEST(MergeTest, WorkedExample) {
  EXPECT_EQ(Merge({2, 3, 8, 9}, {5, 1, 10, 7}), (Box{2, 1, 10, 9}));
}

TEST(MergeTest, FarApart) {
  const Box a{0, 0, 1, 1}, b{10, 10, 11, 11};
  const Box expected{std::min(a.xmin, b.xmin), std::min(a.ymin, b.ymin),
                     std::max(a.xmax, b.xmax), std::max(a.ymax, b.ymax)};
  EXPECT_EQ(expected, (Box{0, 0, 11, 11}));
  EXPECT_EQ(Merge(a, b), expected);
}

TEST(ClipTest, ClampsNegativeCorner) {
  EXPECT_EQ(*Clip({-5, -5, 10, 10}, 640, 480), (Box{0, 0, 10, 10}));
}

TEST(ClipTest, InteriorUnchanged) {
  EXPECT_EQ(*Clip({0, 0, 10, 10}, 640, 480), (Box{0, 0, 10, 10}));
}

TEST(ClipTest, ClampsFarCorner) {
  const Box in{630, 470, 700, 500};
  const Box expected{std::clamp(in.xmin, 0.0, 640.0),
                     std::clamp(in.ymin, 0.0, 480.0),
                     std::clamp(in.xmax, 0.0, 640.0),
                     std::clamp(in.ymax, 0.0, 480.0)};
  EXPECT_EQ(*Clip(in, 640, 480), expected);
  EXPECT_EQ(expected, (Box{630, 470, 640, 480}));
}

TEST(ClipTest, FullyOutsideIsAnError) {
  EXPECT_FALSE(Clip({700, 10, 720, 20}, 640, 480).ok());
  EXPECT_FALSE(Clip({-20, -20, -10, -10}, 640, 480).ok());
}

TEST(NormalizedTest, FullImage) {
  const NormBox n = *ToNormalized({0, 0, 640, 480}, 640, 480);
  EXPECT_EQ(n, (NormBox{0.5, 0.5, 1.0, 1.0}));
}

TEST(NormalizedTest, CenteredQuarter) {
  const Box b{160, 120, 480, 360};
  const NormBox n = *ToNormalized(b, 640, 480);
  EXPECT_DOUBLE_EQ(n.cx, (b.xmin + b.xmax) / (2 * 640.0));
  EXPECT_DOUBLE_EQ(n.cy, (b.ymin + b.ymax) / (2 * 480.0));
  EXPECT_DOUBLE_EQ(n.w, (b.xmax - b.xmin) / 640.0);
  EXPECT_DOUBLE_EQ(n.h, (b.ymax - b.ymin) / 480.0);
  EXPECT_EQ(n, (NormBox{0.5, 0.5, 0.5, 0.5}));
}

TEST(NormalizedTest, RoundTrip) {
  for (const Box& b : {Box{0, 0, 640, 480}, Box{160, 120, 480, 360},
                       Box{1.25, 7.5, 33.125, 400.75}}) {
    const Box back = FromNormalized(*ToNormalized(b, 640, 480), 640, 480);
    EXPECT_NEAR(back.xmin, b.xmin, 1e-6 * 640);
    EXPECT_NEAR(back.ymin, b.ymin, 1e-6 * 480);
    EXPECT_NEAR(back.xmax, b.xmax, 1e-6 * 640);
    EXPECT_NEAR(back.ymax, b.ymax, 1e-6 * 480);
  }
}

TEST(NormalizedTest, RejectsOutOfBoundsAndDegenerate) {
  EXPECT_FALSE(ToNormalized({0, 0, 700, 10}, 640, 480).ok());
  EXPECT_FALSE(ToNormalized({5, 5, 5, 10}, 640, 480).ok());
}

TEST(YoloTest, DecodeZeroOffsets) {
  YoloOffsets t;
  t.cell = {3, 4};
  t.prior = {10, 20};
  const Box b = *DecodeYolo(t, 32);
  EXPECT_DOUBLE_EQ(b.CenterX(), 112.0);
  EXPECT_DOUBLE_EQ(b.CenterY(), 144.0);
  EXPECT_DOUBLE_EQ(b.Width(), 10.0);
  EXPECT_DOUBLE_EQ(b.Height(), 20.0);
}

TEST(YoloTest, DecodeLogTwoDoublesExtent) {
  YoloOffsets t;
  t.tw = std::log(2.0);
  t.th = std::log(2.0);
  t.prior = {10, 20};
  const Box b = *DecodeYolo(t, 32);
  EXPECT_NEAR(b.Width(), 10.0 * std::exp(std::log(2.0)), 1e-12);
  EXPECT_NEAR(b.Height(), 20.0 * std::exp(std::log(2.0)), 1e-12);
  EXPECT_NEAR(b.Width(), 20.0, 1e-12);
  EXPECT_NEAR(b.Height(), 40.0, 1e-12);
}

TEST(YoloTest, EncodeInvertsDecode) {
  YoloOffsets t{0.3, -1.2, 0.7, -0.4, {5, 2}, {30, 45}};
  const Box b = *DecodeYolo(t, 16);
  const YoloOffsets back = *EncodeYolo(b, t.cell, t.prior, 16);
  EXPECT_NEAR(back.tx, t.tx, 1e-9);
  EXPECT_NEAR(back.ty, t.ty, 1e-9);
  EXPECT_NEAR(back.tw, t.tw, 1e-9);
  EXPECT_NEAR(back.th, t.th, 1e-9);
}

TEST(YoloTest, EncodeRejectsCenterOutsideCell) {
  EXPECT_FALSE(EncodeYolo({0, 0, 10, 10}, {3, 3}, {10, 10}, 32).ok());
  EXPECT_FALSE(EncodeYolo({100, 100, 100, 110}, {3, 3}, {10, 10}, 32).ok());
}

TEST(YoloTest, DecodeRejectsNonFinite) {
  YoloOffsets t;
  t.prior = {1, 1};
  t.tx = std::numeric_limits<double>::quiet_NaN();
  EXPECT_FALSE(DecodeYolo(t, 32).ok());
}

TEST(TransformBoxTest, IdentityMap) {
  const Box b{1, 2, 3, 4};
  EXPECT_EQ(*TransformBox(b, AffineMap::Identity()), b);
}

TEST(TransformBoxTest, HorizontalFlip) {
  const Box b{10, 10, 20, 20};
  // Corner oracle: x -> 100 - x swaps the roles of xmin and xmax.
  const Box expected{100 - b.xmax, b.ymin, 100 - b.xmin, b.ymax};
  EXPECT_EQ(expected, (Box{80, 10, 90, 20}));
  EXPECT_EQ(*TransformBox(b, AffineMap::HorizontalFlip(100)), expected);
}

TEST(TransformBoxTest, QuarterTurnPreservesArea) {
  const Box b{10, 20, 40, 30};
  const Box r = *TransformBox(b, AffineMap::Rotation(90, 50, 50));
  EXPECT_DOUBLE_EQ(Area(r), Area(b));
}

TEST(TransformBoxTest, SingularMapIsAnError) {
  EXPECT_FALSE(TransformBox({0, 0, 1, 1}, AffineMap(1, 2, 0, 2, 4, 0)).ok());
}

TEST(AffineMapTest, InverseComposesToIdentity) {
  const AffineMap m = AffineMap::Compose(AffineMap::Translation(3, -2),
                                         AffineMap::Rotation(30, 5, 5));
  const AffineMap inv = *m.Inverse();
  const auto p = AffineMap::Compose(inv, m).Apply(7.5, -1.25);
  EXPECT_NEAR(p[0], 7.5, 1e-12);
  EXPECT_NEAR(p[1], -1.25, 1e-12);
}

TEST(ClusterAnchorsTest, IdenticalBoxes) {
  const std::vector<Box> boxes(6, Box{0, 0, 12, 7});
  const auto priors = *ClusterAnchors(boxes, 1, 3);
  ASSERT_EQ(priors.size(), 1u);
  EXPECT_EQ(priors[0], (AnchorPrior{12, 7}));
}

TEST(ClusterAnchorsTest, EachBoxItsOwnAnchor) {
  const std::vector<Box> boxes = {{0, 0, 5, 5}, {0, 0, 50, 20}, {0, 0, 9, 40}};
  const auto priors = *ClusterAnchors(boxes, 3, 11);
  ASSERT_EQ(priors.size(), 3u);
  EXPECT_EQ(priors[0], (AnchorPrior{5, 5}));
  EXPECT_EQ(priors[1], (AnchorPrior{9, 40}));
  EXPECT_EQ(priors[2], (AnchorPrior{50, 20}));
}

// Cost of assigning each extent to the mean of its group under 1 - IoU.
double PartitionCost(const std::vector<AnchorPrior>& pts, unsigned mask,
                     AnchorPrior* m0, AnchorPrior* m1) {
  double sw[2] = {0, 0}, sh[2] = {0, 0};
  int n[2] = {0, 0};
  for (size_t i = 0; i < pts.size(); ++i) {
    const int g = (mask >> i) & 1u;
    sw[g] += pts[i].width;
    sh[g] += pts[i].height;
    ++n[g];
  }
  if (n[0] == 0 || n[1] == 0) return std::numeric_limits<double>::infinity();
  const AnchorPrior mean[2] = {{sw[0] / n[0], sh[0] / n[0]},
                               {sw[1] / n[1], sh[1] / n[1]}};
  double cost = 0.0;
  for (size_t i = 0; i < pts.size(); ++i) {
    const AnchorPrior& c = mean[(mask >> i) & 1u];
    const double inter = std::min(c.width, pts[i].width) *
                         std::min(c.height, pts[i].height);
    cost += 1.0 - inter / (c.width * c.height + pts[i].width * pts[i].height -
                           inter);
  }
  *m0 = mean[0];
  *m1 = mean[1];
  return cost;
}

TEST(ClusterAnchorsTest, TwoSeparatedGroupsMatchExhaustivePartition) {
  const std::vector<Box> boxes = {
      {0, 0, 10, 12}, {0, 0, 11, 10}, {0, 0, 9, 13}, {0, 0, 12, 11},
      {0, 0, 100, 90}, {0, 0, 95, 97}, {0, 0, 104, 88}, {0, 0, 99, 93},
      {0, 0, 10, 11}};
  std::vector<AnchorPrior> pts;
  for (const Box& b : boxes) pts.push_back({b.Width(), b.Height()});
  double best = std::numeric_limits<double>::infinity();
  AnchorPrior a, b;
  for (unsigned mask = 1; mask + 1 < (1u << pts.size()); ++mask) {
    AnchorPrior m0, m1;
    const double cost = PartitionCost(pts, mask, &m0, &m1);
    if (cost < best) {
      best = cost;
      a = m0;
      b = m1;
    }
  }
  if (a.width * a.height > b.width * b.height) std::swap(a, b);
  for (uint64_t seed : {0u, 1u, 7u, 42u}) {
    const auto priors = *ClusterAnchors(boxes, 2, seed);
    ASSERT_EQ(priors.size(), 2u);
    EXPECT_NEAR(priors[0].width, a.width, 1e-9);
    EXPECT_NEAR(priors[0].height, a.height, 1e-9);
    EXPECT_NEAR(priors[1].width, b.width, 1e-9);
    EXPECT_NEAR(priors[1].height, b.height, 1e-9);
  }
}

TEST(ClusterAnchorsTest, Errors) {
  const std::vector<Box> boxes = {{0, 0, 5, 5}, {0, 0, 5, 5}};
  EXPECT_FALSE(ClusterAnchors(boxes, 0, 1).ok());
  EXPECT_FALSE(ClusterAnchors(boxes, 2, 1).ok());  // one distinct extent
  EXPECT_FALSE(ClusterAnchors(std::vector<Box>{{0, 0, 0, 5}}, 1, 1).ok());
}

TEST(ClusterAnchorsTest, DeterministicForSeed) {
  std::vector<Box> boxes;
  for (int i = 1; i <= 40; ++i) {
    boxes.push_back({0, 0, 3.0 + (i * 7) % 31, 2.0 + (i * 11) % 29});
  }
  EXPECT_EQ(*ClusterAnchors(boxes, 5, 99), *ClusterAnchors(boxes, 5, 99));
}

}  // namespace
}  // namespace detkit
