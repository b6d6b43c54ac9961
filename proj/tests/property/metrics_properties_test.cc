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

#include "detkit/metrics.h"
#include "gtest/gtest.h"
#include "testing/generators.h"
#include "testing/oracles.h"

namespace detkit {
namespace {

struct Scene {
  std::vector<Annotation> gt;
  std::vector<Detection> dets;
};

Scene RandomScene(testing::Gen& gen) {
  Scene s;
  const int images = gen.Int(1, 4);
  s.gt = gen.Annotations(gen.Int(0, 20), images, 80, 80);
  s.dets = gen.NoisyDetections(s.gt, gen.Int(0, 10), images + 1, 80, 80);
  if (s.dets.size() > 40) s.dets.resize(40);
  return s;
}

TEST(MetricsProperties, MatchingAndApAgreeWithBruteForce) {
  testing::Gen gen(501);
  for (int trial = 0; trial < 2000; ++trial) {
    const Scene s = RandomScene(gen);
    const double t = gen.Grid(0.3, 0.7, 0.1);
    const MatchResult m = MatchDetections(s.gt, s.dets, t);
    const auto oracle = testing::OracleMatchDetections(s.gt, s.dets, t);
    ASSERT_EQ(m.TruePositives(), oracle.tp_count);
    ASSERT_EQ(m.FalsePositives(), oracle.fp_count);
    for (size_t i = 0; i < s.dets.size(); ++i) {
      ASSERT_EQ(m.detections[i].true_positive, oracle.tp[i]);
    }
    const EvalReport r = Evaluate(s.gt, s.dets, t, ApMode::kAllPoint);
    ASSERT_NEAR(r.ap, testing::OracleAllPointAp(oracle.curve), 1e-9);
  }
}

TEST(MetricsProperties, TruePositivesShrinkAsThresholdTightens) {
  testing::Gen gen(502);
  const std::vector<double> thresholds = {0.3, 0.4, 0.5, 0.6, 0.7};
  for (int trial = 0; trial < 2000; ++trial) {
    const Scene s = RandomScene(gen);
    const auto reports =
        ThresholdSweep(s.gt, s.dets, thresholds, ApMode::kAllPoint);
    for (size_t i = 1; i < reports.size(); ++i) {
      ASSERT_GE(reports[i - 1].tp, reports[i].tp);
      ASSERT_EQ(reports[i].tp + reports[i].fp,
                static_cast<int64_t>(s.dets.size()));
    }
  }
}

TEST(MetricsProperties, InputOrderIrrelevant) {
  testing::Gen gen(503);
  for (int trial = 0; trial < 1000; ++trial) {
    Scene s = RandomScene(gen);
    const EvalReport a = Evaluate(s.gt, s.dets, 0.5, ApMode::kAllPoint);
    std::shuffle(s.dets.begin(), s.dets.end(), gen.rng());
    std::shuffle(s.gt.begin(), s.gt.end(), gen.rng());
    const EvalReport b = Evaluate(s.gt, s.dets, 0.5, ApMode::kAllPoint);
    ASSERT_EQ(a.tp, b.tp);
    ASSERT_EQ(a.fp, b.fp);
    ASSERT_NEAR(a.ap, b.ap, 1e-12);
  }
}

TEST(MetricsProperties, EnvelopeDominatesRawCurve) {
  testing::Gen gen(504);
  for (int trial = 0; trial < 2000; ++trial) {
    const Scene s = RandomScene(gen);
    const auto n_gt = static_cast<int64_t>(s.gt.size());
    const PrCurve curve = BuildPrCurve(MatchDetections(s.gt, s.dets, 0.5), n_gt);
    double raw = 0.0, prev = 0.0;
    for (const PrPoint& p : curve.points) {
      raw += (p.recall - prev) * p.precision;
      prev = p.recall;
    }
    const double ap = AveragePrecision(curve, ApMode::kAllPoint);
    ASSERT_GE(ap, raw - 1e-12);
    ASSERT_LE(ap, 1.0);
    const double eleven = AveragePrecision(curve, ApMode::kElevenPoint);
    ASSERT_GE(eleven, 0.0);
    ASSERT_LE(eleven, 1.0);
  }
}

TEST(MetricsProperties, ReportIdentities) {
  testing::Gen gen(505);
  for (int trial = 0; trial < 10000; ++trial) {
    const int n_gt = gen.Int(1, 5000);
    const int tp = gen.Int(0, n_gt), fp = gen.Int(0, 5000);
    const EvalReport r = ReportFromCounts(tp, fp, n_gt);
    ASSERT_EQ(r.tp + r.fn, r.n_gt);
    if (tp + fp > 0) ASSERT_DOUBLE_EQ(r.precision, double(tp) / (tp + fp));
    ASSERT_DOUBLE_EQ(r.recall, double(tp) / n_gt);
    if (tp > 0) ASSERT_NEAR(r.f1, 2.0 * tp / (2.0 * tp + fp + (n_gt - tp)), 1e-12);
  }
}

}  // namespace
}  // namespace detkit
