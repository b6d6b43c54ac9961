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
#ifndef DETKIT_ANNOTATIONS_H_
#define DETKIT_ANNOTATIONS_H_

#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "detkit/geometry.h"

namespace detkit {

// Ground-truth or pseudo-label box of one image.
struct Annotation {
  std::string image_id;
  Box box;

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

// Scored prediction on one image. Scores live in [0, 1].
struct Detection {
  std::string image_id;
  Box box;
  double score = 0.0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

struct ImageMeta {
  std::string image_id;
  int width = 0;
  int height = 0;
};

using MetaIndex = std::map<std::string, ImageMeta, std::less<>>;

struct DuplicatePair {
  std::string image_id_a;
  std::string image_id_b;
};

// Global ranking used wherever detections are ordered: score descending, then
// area descending, then (xmin, ymin, xmax, ymax) ascending, then image_id.
bool RanksBefore(const Detection& a, const Detection& b);

// Sorts by (image_id, xmin, ymin, xmax, ymax).
void SortAnnotations(std::vector<Annotation>& annotations);

// --- CSV: "filename,xmin,ymin,xmax,ymax[,score]" ---------------------------
//
// Parse errors carry `source:line:` prefixes. Annotation files may carry a
// score column, which is ignored; detection files must carry one.

absl::StatusOr<std::vector<Annotation>> ParseAnnotationsCsv(
    std::string_view content, std::string_view source = "<input>");
absl::StatusOr<std::vector<Detection>> ParseDetectionsCsv(
    std::string_view content, std::string_view source = "<input>");
absl::StatusOr<std::string> FormatAnnotationsCsv(
    std::span<const Annotation> annotations);
absl::StatusOr<std::string> FormatDetectionsCsv(
    std::span<const Detection> detections);

absl::StatusOr<std::vector<Annotation>> LoadAnnotations(
    const std::filesystem::path& path);
absl::Status SaveAnnotations(std::span<const Annotation> annotations,
                             const std::filesystem::path& path);
absl::StatusOr<std::vector<Detection>> LoadDetections(
    const std::filesystem::path& path);
absl::Status SaveDetections(std::span<const Detection> detections,
                            const std::filesystem::path& path);

// "filename,width,height"
absl::StatusOr<MetaIndex> ParseImageMetasCsv(std::string_view content,
                                             std::string_view source =
                                                 "<input>");
absl::StatusOr<MetaIndex> LoadImageMetas(const std::filesystem::path& path);

// "filename_a,filename_b"
absl::StatusOr<std::vector<DuplicatePair>> ParseDuplicatePairsCsv(
    std::string_view content, std::string_view source = "<input>");
absl::StatusOr<std::vector<DuplicatePair>> LoadDuplicatePairs(
    const std::filesystem::path& path);

// --- YOLO txt: one file per image, lines "0 cx cy w h" ----------------------

// "img_001.jpg" -> "img_001.txt"
std::string YoloLabelFileName(std::string_view image_id);

absl::StatusOr<std::string> FormatYoloLabels(
    std::span<const Annotation> annotations, const ImageMeta& meta);
absl::StatusOr<std::vector<Annotation>> ParseYoloLabels(
    std::string_view content, const ImageMeta& meta,
    std::string_view source = "<input>");

// Reads the label file of every image in `metas` (a missing file means no
// boxes). Output is sorted by image id, then file order.
absl::StatusOr<std::vector<Annotation>> LoadYolo(
    const std::filesystem::path& dir, const MetaIndex& metas);
// Writes one label file per image in `metas`, empty for images without boxes.
absl::Status SaveYolo(std::span<const Annotation> annotations,
                      const MetaIndex& metas,
                      const std::filesystem::path& dir);

// --- Cleansing ---------------------------------------------------------------

struct JoinResult {
  std::vector<Annotation> annotations;
  std::vector<std::string> warnings;
};

// Folds the boxes of each duplicate group onto its lexicographically smallest
// image id. Pairs chain transitively. Ids absent from the annotation set only
// produce warnings. Output is sorted with SortAnnotations.
JoinResult JoinDuplicates(std::span<const Annotation> annotations,
                          std::span<const DuplicatePair> pairs);

// Per image, repeatedly replaces two boxes with positive intersection area by
// their Merge until no intersecting pair remains.
std::vector<Annotation> MergeIntersecting(
    std::span<const Annotation> annotations);

enum class IssueKind { kOutOfBounds, kZeroArea, kMissingMeta, kDuplicateRow };

std::string_view IssueKindName(IssueKind kind);

struct Issue {
  IssueKind kind;
  std::string image_id;
  // Zero-based index into the validated list.
  size_t index = 0;
  std::string message;
};

std::vector<Issue> Validate(std::span<const Annotation> annotations,
                            const MetaIndex& metas);

// Keeps detections with score >= min_score and strips the scores.
std::vector<Annotation> PseudoLabel(std::span<const Detection> detections,
                                    double min_score);

// --- File helpers ------------------------------------------------------------

absl::StatusOr<std::string> ReadFile(const std::filesystem::path& path);
// Writes to a sibling temporary file and renames it over `path`, so readers
// never observe a partial file.
absl::Status WriteFileAtomically(const std::filesystem::path& path,
                                 std::string_view content);

}  // namespace detkit

#endif  // DETKIT_ANNOTATIONS_H_
