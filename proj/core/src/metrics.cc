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
#include "detkit/metrics.h"
#include "internal/strings.h"

#include <algorithm>
#include <map>
#include <numeric>


namespace detkit {

std::string_view ApModeName(ApMode mode) {
  return mode == ApMode::kAllPoint ? "allpoint" : "elevenpoint";
}

absl::StatusOr<ApMode> ParseApMode(std::string_view name) {
  if (name == "allpoint") return ApMode::kAllPoint;
  if (name == "elevenpoint") return ApMode::kElevenPoint;
  return absl::InvalidArgumentError(internal::StrCat(
      "unknown AP mode '", name, "' (expected allpoint or elevenpoint)"));
}

int64_t MatchResult::TruePositives() const {
  return std::count_if(detections.begin(), detections.end(),
                       [](const DetectionMatch& m) { return m.true_positive; });
}

int64_t MatchResult::FalsePositives() const {
  return static_cast<int64_t>(detections.size()) - TruePositives();
}

MatchResult MatchDetections(std::span<const Annotation> ground_truth,
                            std::span<const Detection> detections,
                            double iou_threshold) {
  MatchResult result;
  result.iou_threshold = iou_threshold;
  result.detections.resize(detections.size());
  result.gt_matched.assign(ground_truth.size(), false);

  std::map<std::string_view, std::vector<size_t>> gt_by_image;
  for (size_t i = 0; i < ground_truth.size(); ++i) {
    gt_by_image[ground_truth[i].image_id].push_back(i);
  }

  result.rank_order.resize(detections.size());
  std::iota(result.rank_order.begin(), result.rank_order.end(), size_t{0});
  std::stable_sort(result.rank_order.begin(), result.rank_order.end(),
                   [&](size_t a, size_t b) {
                     return RanksBefore(detections[a], detections[b]);
                   });

  // Images are independent, so one pass in global rank order is equivalent to
  // matching each image in its own rank order.
  for (size_t det_index : result.rank_order) {
    const Detection& det = detections[det_index];
    const auto it = gt_by_image.find(det.image_id);
    if (it == gt_by_image.end()) continue;
    long best = -1;
    double best_iou = -1.0;
    for (size_t gt_index : it->second) {
      if (result.gt_matched[gt_index]) continue;
      const double iou = Iou(det.box, ground_truth[gt_index].box);
      if (iou > best_iou) {
        best_iou = iou;
        best = static_cast<long>(gt_index);
      }
    }
    DetectionMatch& match = result.detections[det_index];
    if (best >= 0) match.iou = best_iou;
    if (best >= 0 && best_iou >= iou_threshold) {
      match.true_positive = true;
      match.gt_index = best;
      result.gt_matched[best] = true;
    }
  }
  return result;
}

PrCurve BuildPrCurve(const MatchResult& match, int64_t n_gt) {
  PrCurve curve;
  curve.points.reserve(match.rank_order.size());
  int64_t tp = 0;
  int64_t fp = 0;
  for (size_t index : match.rank_order) {
    if (match.detections[index].true_positive) {
      ++tp;
    } else {
      ++fp;
    }
    const double recall =
        n_gt > 0 ? static_cast<double>(tp) / static_cast<double>(n_gt) : 0.0;
    const double precision =
        static_cast<double>(tp) / static_cast<double>(tp + fp);
    curve.points.push_back({recall, precision});
  }
  return curve;
}

double AveragePrecision(const PrCurve& curve, ApMode mode) {
  const std::vector<PrPoint>& pts = curve.points;
  if (pts.empty()) return 0.0;
  std::vector<double> envelope(pts.size());
  double running = 0.0;
  for (size_t i = pts.size(); i-- > 0;) {
    running = std::max(running, pts[i].precision);
    envelope[i] = running;
  }
  if (mode == ApMode::kAllPoint) {
    double area = 0.0;
    double previous_recall = 0.0;
    for (size_t i = 0; i < pts.size(); ++i) {
      area += (pts[i].recall - previous_recall) * envelope[i];
      previous_recall = pts[i].recall;
    }
    return std::clamp(area, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int step = 0; step <= 10; ++step) {
    const double level = step / 10.0;
    // Recall is non-decreasing, so the first point reaching `level` carries
    // the envelope value for it.
    const auto it =
        std::find_if(pts.begin(), pts.end(), [level](const PrPoint& p) {
          return p.recall >= level - 1e-12;
        });
    if (it != pts.end()) sum += envelope[it - pts.begin()];
  }
  return sum / 11.0;
}

EvalReport ReportFromCounts(int64_t tp, int64_t fp, int64_t n_gt,
                            double iou_threshold, ApMode ap_mode) {
  EvalReport r;
  r.iou_threshold = iou_threshold;
  r.ap_mode = ap_mode;
  r.n_gt = n_gt;
  r.tp = tp;
  r.fp = fp;
  r.fn = n_gt - tp;
  r.recall = n_gt > 0 ? static_cast<double>(tp) / static_cast<double>(n_gt)
                      : 0.0;
  r.precision = tp + fp > 0
                    ? static_cast<double>(tp) / static_cast<double>(tp + fp)
                    : 0.0;
  r.f1 = r.precision + r.recall > 0.0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  return r;
}

EvalReport Evaluate(std::span<const Annotation> ground_truth,
                    std::span<const Detection> detections, double iou_threshold,
                    ApMode ap_mode) {
  const MatchResult match =
      MatchDetections(ground_truth, detections, iou_threshold);
  const auto n_gt = static_cast<int64_t>(ground_truth.size());
  EvalReport report = ReportFromCounts(match.TruePositives(),
                                       match.FalsePositives(), n_gt,
                                       iou_threshold, ap_mode);
  report.ap = AveragePrecision(BuildPrCurve(match, n_gt), ap_mode);
  return report;
}

std::vector<EvalReport> ThresholdSweep(std::span<const Annotation> ground_truth,
                                       std::span<const Detection> detections,
                                       std::span<const double> thresholds,
                                       ApMode ap_mode) {
  std::vector<EvalReport> reports;
  reports.reserve(thresholds.size());
  for (double t : thresholds) {
    reports.push_back(Evaluate(ground_truth, detections, t, ap_mode));
  }
  return reports;
}

std::string ReportToJson(const EvalReport& r) {
  return fmt::sprintf(
      "{\"iou_threshold\": %.6f, \"ap_mode\": \"%s\", \"n_gt\": %d, "
      "\"tp\": %d, \"fp\": %d, \"fn\": %d, \"recall\": %.6f, "
      "\"precision\": %.6f, \"f1\": %.6f, \"ap\": %.6f}",
      r.iou_threshold, ApModeName(r.ap_mode), r.n_gt, r.tp, r.fp, r.fn,
      r.recall, r.precision, r.f1, r.ap);
}

std::string ReportsToJson(std::span<const EvalReport> reports) {
  if (reports.empty()) return "[]";
  std::vector<std::string> items;
  items.reserve(reports.size());
  for (const EvalReport& r : reports) items.push_back("  " + ReportToJson(r));
  return internal::StrCat("[\n", fmt::format("{}", fmt::join(items, ",\n")), "\n]");
}

}  // namespace detkit
