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
#ifndef DETKIT_METRICS_H_
#define DETKIT_METRICS_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "detkit/annotations.h"

// Single-class detection evaluation: greedy IoU matching, TP/FP/FN counts,
// recall/precision/F1 and average precision.

namespace detkit {

enum class ApMode { kAllPoint, kElevenPoint };

std::string_view ApModeName(ApMode mode);
absl::StatusOr<ApMode> ParseApMode(std::string_view name);

struct DetectionMatch {
  bool true_positive = false;
  // Index into the ground-truth list, -1 for false positives.
  long gt_index = -1;
  double iou = 0.0;
};

struct MatchResult {
  double iou_threshold = 0.5;
  // Parallel to the input detections.
  std::vector<DetectionMatch> detections;
  // Parallel to the input ground truth.
  std::vector<bool> gt_matched;
  // Detection indices in global rank order (RanksBefore).
  std::vector<size_t> rank_order;

  int64_t TruePositives() const;
  int64_t FalsePositives() const;
};

// Within every image, detections are visited in rank order and each claims the
// still-unmatched ground truth of highest IoU (lowest index on ties) if that
// IoU reaches iou_threshold; otherwise it is a false positive. Detections on
// images without ground truth are false positives.
MatchResult MatchDetections(std::span<const Annotation> ground_truth,
                            std::span<const Detection> detections,
                            double iou_threshold);

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
};

// Cumulative (recall, precision) after each detection in rank order.
struct PrCurve {
  std::vector<PrPoint> points;
};

PrCurve BuildPrCurve(const MatchResult& match, int64_t n_gt);

// kAllPoint: area under the precision envelope (precision at recall r replaced
// by the best precision at any recall >= r). kElevenPoint: mean envelope
// precision at recall 0, 0.1, ..., 1.
double AveragePrecision(const PrCurve& curve, ApMode mode);

struct EvalReport {
  double iou_threshold = 0.5;
  ApMode ap_mode = ApMode::kAllPoint;
  int64_t n_gt = 0;
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t fn = 0;
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
  double ap = 0.0;
};

// Fills counts and recall/precision/F1 from raw TP/FP/GT counts. Zero
// denominators give 0. `ap` is left at 0.
EvalReport ReportFromCounts(int64_t tp, int64_t fp, int64_t n_gt,
                            double iou_threshold = 0.5,
                            ApMode ap_mode = ApMode::kAllPoint);

EvalReport Evaluate(std::span<const Annotation> ground_truth,
                    std::span<const Detection> detections,
                    double iou_threshold = 0.5,
                    ApMode ap_mode = ApMode::kAllPoint);

std::vector<EvalReport> ThresholdSweep(std::span<const Annotation> ground_truth,
                                       std::span<const Detection> detections,
                                       std::span<const double> thresholds,
                                       ApMode ap_mode = ApMode::kAllPoint);

// {"iou_threshold", "ap_mode", "n_gt", "tp", "fp", "fn", "recall",
//  "precision", "f1", "ap"}, reals with 6 decimals.
std::string ReportToJson(const EvalReport& report);
std::string ReportsToJson(std::span<const EvalReport> reports);

}  // namespace detkit

#endif  // DETKIT_METRICS_H_
