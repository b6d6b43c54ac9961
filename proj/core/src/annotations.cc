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
#include "detkit/annotations.h"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <system_error>
#include <tuple>
#include <utility>

#include "detkit/internal/status_macros.h"
#include "internal/strings.h"

namespace detkit {
namespace {

namespace fs = std::filesystem;

constexpr std::string_view kAnnotationHeader = "filename,xmin,ymin,xmax,ymax";
constexpr std::string_view kDetectionHeader =
    "filename,xmin,ymin,xmax,ymax,score";
constexpr std::string_view kMetaHeader = "filename,width,height";
constexpr std::string_view kPairHeader = "filename_a,filename_b";
constexpr double kNormTolerance = 1e-6;

struct CsvRow {
  size_t line = 0;
  std::vector<std::string_view> fields;
};

absl::Status LineError(std::string_view source, size_t line,
                       std::string_view what) {
  return absl::InvalidArgumentError(
      internal::StrCat(source, ":", line, ": ", what));
}

// Splits `content` into trimmed comma-separated rows, skipping blank lines.
// The first non-blank row is returned separately as the header.
absl::StatusOr<std::pair<std::string, std::vector<CsvRow>>> SplitCsv(
    std::string_view content, std::string_view source) {
  std::vector<CsvRow> rows;
  std::string header;
  bool have_header = false;
  size_t line_no = 0;
  for (std::string_view line : internal::Split(content, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    line = internal::StripWhitespace(line);
    if (line.empty()) continue;
    if (!have_header) {
      header = std::string(line);
      have_header = true;
      continue;
    }
    CsvRow row{line_no, {}};
    for (std::string_view field : internal::Split(line, ',')) {
      row.fields.push_back(internal::StripWhitespace(field));
    }
    rows.push_back(std::move(row));
  }
  if (!have_header) {
    return absl::InvalidArgumentError(
        internal::StrCat(source, ": missing CSV header"));
  }
  std::string normalized;
  for (std::string_view field : internal::Split(header, ',')) {
    if (!normalized.empty()) normalized += ',';
    normalized += internal::StripWhitespace(field);
  }
  return std::make_pair(std::move(normalized), std::move(rows));
}

absl::StatusOr<double> ParseNumber(std::string_view field,
                                   std::string_view source, size_t line,
                                   std::string_view name) {
  double value = 0.0;
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    return LineError(source, line,
                     internal::StrCat("non-numeric ", name, " '", field, "'"));
  }
  if (!std::isfinite(value)) {
    return LineError(source, line, internal::StrCat("non-finite ", name));
  }
  return value;
}

absl::StatusOr<int> ParsePositiveInt(std::string_view field,
                                     std::string_view source, size_t line,
                                     std::string_view name) {
  int value = 0;
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    return LineError(source, line,
                     internal::StrCat("non-integer ", name, " '", field, "'"));
  }
  if (value <= 0) {
    return LineError(source, line, internal::StrCat(name, " must be positive"));
  }
  return value;
}

absl::StatusOr<Box> ParseBoxFields(const CsvRow& row, std::string_view source) {
  Box box;
  DETKIT_ASSIGN_OR_RETURN(box.xmin,
                          ParseNumber(row.fields[1], source, row.line, "xmin"));
  DETKIT_ASSIGN_OR_RETURN(box.ymin,
                          ParseNumber(row.fields[2], source, row.line, "ymin"));
  DETKIT_ASSIGN_OR_RETURN(box.xmax,
                          ParseNumber(row.fields[3], source, row.line, "xmax"));
  DETKIT_ASSIGN_OR_RETURN(box.ymax,
                          ParseNumber(row.fields[4], source, row.line, "ymax"));
  if (box.xmin > box.xmax) {
    return LineError(source, row.line, "xmin > xmax");
  }
  if (box.ymin > box.ymax) {
    return LineError(source, row.line, "ymin > ymax");
  }
  return box;
}

absl::Status CheckImageId(std::string_view id, std::string_view source,
                          size_t line) {
  if (id.empty()) return LineError(source, line, "empty filename");
  return absl::OkStatus();
}

absl::Status CheckWritableId(std::string_view id) {
  if (id.empty()) return absl::InvalidArgumentError("empty image id");
  if (id.find_first_of(",\r\n") != std::string_view::npos ||
      internal::StripWhitespace(id) != id) {
    return absl::InvalidArgumentError(
        internal::StrCat("image id '", id, "' cannot be written to CSV"));
  }
  return absl::OkStatus();
}

std::string FormatBox(const Box& box) {
  return fmt::sprintf("%.6f,%.6f,%.6f,%.6f", box.xmin, box.ymin, box.xmax,
                         box.ymax);
}

auto BoxKey(const Box& b) { return std::tie(b.xmin, b.ymin, b.xmax, b.ymax); }

// Union-find keyed by image id; the representative is the smallest id.
class IdUnion {
 public:
  void Add(const std::string& id) { parent_.try_emplace(id, id); }

  const std::string& Find(const std::string& id) {
    std::string* cur = &parent_.at(id);
    if (*cur == id) return *cur;
    const std::string root = Find(*cur);
    *cur = root;
    return *cur;
  }

  void Unite(const std::string& a, const std::string& b) {
    const std::string ra = Find(a);
    const std::string rb = Find(b);
    if (ra == rb) return;
    if (ra < rb) {
      parent_[rb] = ra;
    } else {
      parent_[ra] = rb;
    }
  }

  bool Contains(const std::string& id) const { return parent_.contains(id); }

 private:
  std::map<std::string, std::string> parent_;
};

}  // namespace

bool RanksBefore(const Detection& a, const Detection& b) {
  if (a.score != b.score) return a.score > b.score;
  const double area_a = Area(a.box);
  const double area_b = Area(b.box);
  if (area_a != area_b) return area_a > area_b;
  if (BoxKey(a.box) != BoxKey(b.box)) return BoxKey(a.box) < BoxKey(b.box);
  return a.image_id < b.image_id;
}

void SortAnnotations(std::vector<Annotation>& annotations) {
  std::stable_sort(annotations.begin(), annotations.end(),
                   [](const Annotation& a, const Annotation& b) {
                     if (a.image_id != b.image_id) return a.image_id < b.image_id;
                     return BoxKey(a.box) < BoxKey(b.box);
                   });
}

absl::StatusOr<std::vector<Annotation>> ParseAnnotationsCsv(
    std::string_view content, std::string_view source) {
  DETKIT_ASSIGN_OR_RETURN(auto split, SplitCsv(content, source));
  auto& [header, rows] = split;
  size_t columns = 0;
  if (header == kAnnotationHeader) {
    columns = 5;
  } else if (header == kDetectionHeader) {
    columns = 6;
  } else {
    return absl::InvalidArgumentError(internal::StrCat(
        source, ": expected header '", kAnnotationHeader, "[,score]', got '",
        header, "'"));
  }
  std::vector<Annotation> out;
  out.reserve(rows.size());
  for (const CsvRow& row : rows) {
    if (row.fields.size() != columns) {
      return LineError(source, row.line,
                       fmt::sprintf("expected %d fields, got %d", columns,
                                       row.fields.size()));
    }
    DETKIT_RETURN_IF_ERROR(CheckImageId(row.fields[0], source, row.line));
    DETKIT_ASSIGN_OR_RETURN(Box box, ParseBoxFields(row, source));
    if (columns == 6) {
      DETKIT_ASSIGN_OR_RETURN(
          double ignored, ParseNumber(row.fields[5], source, row.line, "score"));
      (void)ignored;
    }
    out.push_back({std::string(row.fields[0]), box});
  }
  return out;
}

absl::StatusOr<std::vector<Detection>> ParseDetectionsCsv(
    std::string_view content, std::string_view source) {
  DETKIT_ASSIGN_OR_RETURN(auto split, SplitCsv(content, source));
  auto& [header, rows] = split;
  if (header != kDetectionHeader) {
    return absl::InvalidArgumentError(internal::StrCat(
        source, ": expected header '", kDetectionHeader, "', got '", header,
        "'"));
  }
  std::vector<Detection> out;
  out.reserve(rows.size());
  for (const CsvRow& row : rows) {
    if (row.fields.size() != 6) {
      return LineError(
          source, row.line,
          fmt::sprintf("expected 6 fields, got %d", row.fields.size()));
    }
    DETKIT_RETURN_IF_ERROR(CheckImageId(row.fields[0], source, row.line));
    DETKIT_ASSIGN_OR_RETURN(Box box, ParseBoxFields(row, source));
    DETKIT_ASSIGN_OR_RETURN(
        double score, ParseNumber(row.fields[5], source, row.line, "score"));
    if (score < 0.0 || score > 1.0) {
      return LineError(source, row.line, "score outside [0, 1]");
    }
    out.push_back({std::string(row.fields[0]), box, score});
  }
  return out;
}

absl::StatusOr<std::string> FormatAnnotationsCsv(
    std::span<const Annotation> annotations) {
  std::string out = internal::StrCat(kAnnotationHeader, "\n");
  for (const Annotation& a : annotations) {
    DETKIT_RETURN_IF_ERROR(CheckWritableId(a.image_id));
    internal::StrAppend(&out, a.image_id, ",", FormatBox(a.box), "\n");
  }
  return out;
}

absl::StatusOr<std::string> FormatDetectionsCsv(
    std::span<const Detection> detections) {
  std::string out = internal::StrCat(kDetectionHeader, "\n");
  for (const Detection& d : detections) {
    DETKIT_RETURN_IF_ERROR(CheckWritableId(d.image_id));
    internal::StrAppend(&out, d.image_id, ",", FormatBox(d.box),
                    fmt::sprintf(",%.6f\n", d.score));
  }
  return out;
}

absl::StatusOr<std::vector<Annotation>> LoadAnnotations(const fs::path& path) {
  DETKIT_ASSIGN_OR_RETURN(std::string content, ReadFile(path));
  return ParseAnnotationsCsv(content, path.string());
}

absl::Status SaveAnnotations(std::span<const Annotation> annotations,
                             const fs::path& path) {
  DETKIT_ASSIGN_OR_RETURN(std::string content,
                          FormatAnnotationsCsv(annotations));
  return WriteFileAtomically(path, content);
}

absl::StatusOr<std::vector<Detection>> LoadDetections(const fs::path& path) {
  DETKIT_ASSIGN_OR_RETURN(std::string content, ReadFile(path));
  return ParseDetectionsCsv(content, path.string());
}

absl::Status SaveDetections(std::span<const Detection> detections,
                            const fs::path& path) {
  DETKIT_ASSIGN_OR_RETURN(std::string content, FormatDetectionsCsv(detections));
  return WriteFileAtomically(path, content);
}

absl::StatusOr<MetaIndex> ParseImageMetasCsv(std::string_view content,
                                             std::string_view source) {
  DETKIT_ASSIGN_OR_RETURN(auto split, SplitCsv(content, source));
  auto& [header, rows] = split;
  if (header != kMetaHeader) {
    return absl::InvalidArgumentError(internal::StrCat(
        source, ": expected header '", kMetaHeader, "', got '", header, "'"));
  }
  MetaIndex out;
  for (const CsvRow& row : rows) {
    if (row.fields.size() != 3) {
      return LineError(
          source, row.line,
          fmt::sprintf("expected 3 fields, got %d", row.fields.size()));
    }
    DETKIT_RETURN_IF_ERROR(CheckImageId(row.fields[0], source, row.line));
    ImageMeta meta;
    meta.image_id = std::string(row.fields[0]);
    DETKIT_ASSIGN_OR_RETURN(
        meta.width, ParsePositiveInt(row.fields[1], source, row.line, "width"));
    DETKIT_ASSIGN_OR_RETURN(meta.height, ParsePositiveInt(row.fields[2], source,
                                                          row.line, "height"));
    if (out.contains(meta.image_id)) {
      return LineError(source, row.line,
                       internal::StrCat("duplicate image '", meta.image_id, "'"));
    }
    out.emplace(meta.image_id, meta);
  }
  return out;
}

absl::StatusOr<MetaIndex> LoadImageMetas(const fs::path& path) {
  DETKIT_ASSIGN_OR_RETURN(std::string content, ReadFile(path));
  return ParseImageMetasCsv(content, path.string());
}

absl::StatusOr<std::vector<DuplicatePair>> ParseDuplicatePairsCsv(
    std::string_view content, std::string_view source) {
  DETKIT_ASSIGN_OR_RETURN(auto split, SplitCsv(content, source));
  auto& [header, rows] = split;
  if (header != kPairHeader) {
    return absl::InvalidArgumentError(internal::StrCat(
        source, ": expected header '", kPairHeader, "', got '", header, "'"));
  }
  std::vector<DuplicatePair> out;
  for (const CsvRow& row : rows) {
    if (row.fields.size() != 2) {
      return LineError(
          source, row.line,
          fmt::sprintf("expected 2 fields, got %d", row.fields.size()));
    }
    DETKIT_RETURN_IF_ERROR(CheckImageId(row.fields[0], source, row.line));
    DETKIT_RETURN_IF_ERROR(CheckImageId(row.fields[1], source, row.line));
    if (row.fields[0] == row.fields[1]) {
      return LineError(source, row.line, "pair repeats the same image");
    }
    out.push_back({std::string(row.fields[0]), std::string(row.fields[1])});
  }
  return out;
}

absl::StatusOr<std::vector<DuplicatePair>> LoadDuplicatePairs(
    const fs::path& path) {
  DETKIT_ASSIGN_OR_RETURN(std::string content, ReadFile(path));
  return ParseDuplicatePairsCsv(content, path.string());
}

std::string YoloLabelFileName(std::string_view image_id) {
  return fs::path(image_id).replace_extension(".txt").string();
}

absl::StatusOr<std::string> FormatYoloLabels(
    std::span<const Annotation> annotations, const ImageMeta& meta) {
  std::string out;
  for (const Annotation& a : annotations) {
    auto norm = ToNormalized(a.box, meta.width, meta.height);
    if (!norm.ok()) {
      return absl::Status(norm.status().code(),
                          internal::StrCat(a.image_id, ": ",
                                       norm.status().message()));
    }
    out += fmt::sprintf("0 %.6f %.6f %.6f %.6f\n", norm->cx, norm->cy,
                          norm->w, norm->h);
  }
  return out;
}

absl::StatusOr<std::vector<Annotation>> ParseYoloLabels(
    std::string_view content, const ImageMeta& meta, std::string_view source) {
  std::vector<Annotation> out;
  size_t line_no = 0;
  for (std::string_view line : internal::Split(content, '\n')) {
    ++line_no;
    line = internal::StripWhitespace(line);
    if (line.empty()) continue;
    std::vector<std::string_view> tokens =
        internal::SplitAnySkipEmpty(line, " \t");
    if (tokens.size() != 5) {
      return LineError(source, line_no,
                       fmt::sprintf("expected 5 values, got %d",
                                       tokens.size()));
    }
    if (tokens[0] != "0") {
      return LineError(source, line_no,
                       internal::StrCat("unsupported class '", tokens[0], "'"));
    }
    NormBox norm;
    DETKIT_ASSIGN_OR_RETURN(norm.cx, ParseNumber(tokens[1], source, line_no, "cx"));
    DETKIT_ASSIGN_OR_RETURN(norm.cy, ParseNumber(tokens[2], source, line_no, "cy"));
    DETKIT_ASSIGN_OR_RETURN(norm.w, ParseNumber(tokens[3], source, line_no, "w"));
    DETKIT_ASSIGN_OR_RETURN(norm.h, ParseNumber(tokens[4], source, line_no, "h"));
    const bool in_range = norm.cx >= 0.0 && norm.cx <= 1.0 && norm.cy >= 0.0 &&
                          norm.cy <= 1.0 && norm.w > 0.0 && norm.w <= 1.0 &&
                          norm.h > 0.0 && norm.h <= 1.0;
    const bool extent_inside =
        norm.cx - 0.5 * norm.w >= -kNormTolerance &&
        norm.cx + 0.5 * norm.w <= 1.0 + kNormTolerance &&
        norm.cy - 0.5 * norm.h >= -kNormTolerance &&
        norm.cy + 0.5 * norm.h <= 1.0 + kNormTolerance;
    if (!in_range || !extent_inside) {
      return LineError(source, line_no, "normalized value outside [0, 1]");
    }
    out.push_back({meta.image_id, FromNormalized(norm, meta.width, meta.height)});
  }
  return out;
}

absl::StatusOr<std::vector<Annotation>> LoadYolo(const fs::path& dir,
                                                 const MetaIndex& metas) {
  std::vector<Annotation> out;
  for (const auto& [id, meta] : metas) {
    const fs::path file = dir / YoloLabelFileName(id);
    std::error_code ec;
    if (!fs::exists(file, ec)) continue;
    DETKIT_ASSIGN_OR_RETURN(std::string content, ReadFile(file));
    DETKIT_ASSIGN_OR_RETURN(auto labels,
                            ParseYoloLabels(content, meta, file.string()));
    out.insert(out.end(), labels.begin(), labels.end());
  }
  return out;
}

absl::Status SaveYolo(std::span<const Annotation> annotations,
                      const MetaIndex& metas, const fs::path& dir) {
  std::map<std::string, std::vector<Annotation>, std::less<>> grouped;
  for (const Annotation& a : annotations) {
    if (!metas.contains(a.image_id)) {
      return absl::NotFoundError(
          internal::StrCat("no image metadata for '", a.image_id, "'"));
    }
    grouped[a.image_id].push_back(a);
  }
  std::map<std::string, std::string> files;
  for (const auto& [id, meta] : metas) {
    const auto it = grouped.find(id);
    std::string content;
    if (it != grouped.end()) {
      DETKIT_ASSIGN_OR_RETURN(content, FormatYoloLabels(it->second, meta));
    }
    const std::string name = YoloLabelFileName(id);
    if (files.contains(name)) {
      return absl::InvalidArgumentError(
          internal::StrCat("two images map to label file '", name, "'"));
    }
    files.emplace(name, std::move(content));
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    return absl::InternalError(
        internal::StrCat("cannot create ", dir.string(), ": ", ec.message()));
  }
  for (const auto& [name, content] : files) {
    DETKIT_RETURN_IF_ERROR(WriteFileAtomically(dir / name, content));
  }
  return absl::OkStatus();
}

JoinResult JoinDuplicates(std::span<const Annotation> annotations,
                          std::span<const DuplicatePair> pairs) {
  JoinResult result;
  std::set<std::string, std::less<>> present;
  for (const Annotation& a : annotations) present.insert(a.image_id);

  IdUnion groups;
  for (const DuplicatePair& pair : pairs) {
    if (pair.image_id_a == pair.image_id_b) {
      result.warnings.push_back(
          internal::StrCat("ignoring self-pair '", pair.image_id_a, "'"));
      continue;
    }
    for (const std::string* id : {&pair.image_id_a, &pair.image_id_b}) {
      if (!present.contains(*id)) {
        result.warnings.push_back(
            internal::StrCat("duplicate image '", *id, "' has no annotations"));
      }
      groups.Add(*id);
    }
    groups.Unite(pair.image_id_a, pair.image_id_b);
  }

  result.annotations.reserve(annotations.size());
  for (const Annotation& a : annotations) {
    Annotation joined = a;
    if (groups.Contains(a.image_id)) joined.image_id = groups.Find(a.image_id);
    result.annotations.push_back(std::move(joined));
  }
  SortAnnotations(result.annotations);
  return result;
}

std::vector<Annotation> MergeIntersecting(
    std::span<const Annotation> annotations) {
  std::map<std::string, std::vector<Box>, std::less<>> per_image;
  for (const Annotation& a : annotations) per_image[a.image_id].push_back(a.box);

  std::vector<Annotation> out;
  for (auto& [id, boxes] : per_image) {
    std::sort(boxes.begin(), boxes.end(), [](const Box& a, const Box& b) {
      return BoxKey(a) < BoxKey(b);
    });
    bool merged = true;
    while (merged) {
      merged = false;
      for (size_t i = 0; i < boxes.size() && !merged; ++i) {
        for (size_t j = i + 1; j < boxes.size(); ++j) {
          if (IntersectionArea(boxes[i], boxes[j]) > 0.0) {
            boxes[i] = Merge(boxes[i], boxes[j]);
            boxes.erase(boxes.begin() + static_cast<std::ptrdiff_t>(j));
            merged = true;
            break;
          }
        }
      }
    }
    for (const Box& box : boxes) out.push_back({id, box});
  }
  SortAnnotations(out);
  return out;
}

std::string_view IssueKindName(IssueKind kind) {
  switch (kind) {
    case IssueKind::kOutOfBounds:
      return "out_of_bounds";
    case IssueKind::kZeroArea:
      return "zero_area";
    case IssueKind::kMissingMeta:
      return "missing_meta";
    case IssueKind::kDuplicateRow:
      return "duplicate_row";
  }
  return "unknown";
}

std::vector<Issue> Validate(std::span<const Annotation> annotations,
                            const MetaIndex& metas) {
  std::vector<Issue> issues;
  std::set<std::tuple<std::string, double, double, double, double>> seen;
  for (size_t i = 0; i < annotations.size(); ++i) {
    const Annotation& a = annotations[i];
    const Box& b = a.box;
    const auto it = metas.find(a.image_id);
    if (it == metas.end()) {
      issues.push_back({IssueKind::kMissingMeta, a.image_id, i,
                        "no image metadata"});
    } else if (b.xmin < 0.0 || b.ymin < 0.0 || b.xmax > it->second.width ||
               b.ymax > it->second.height) {
      issues.push_back(
          {IssueKind::kOutOfBounds, a.image_id, i,
           fmt::sprintf("box (%g,%g,%g,%g) exceeds %dx%d", b.xmin, b.ymin,
                           b.xmax, b.ymax, it->second.width,
                           it->second.height)});
    }
    if (Area(b) <= 0.0) {
      issues.push_back({IssueKind::kZeroArea, a.image_id, i, "box has no area"});
    }
    if (!seen.emplace(a.image_id, b.xmin, b.ymin, b.xmax, b.ymax).second) {
      issues.push_back({IssueKind::kDuplicateRow, a.image_id, i,
                        "identical to an earlier row"});
    }
  }
  return issues;
}

std::vector<Annotation> PseudoLabel(std::span<const Detection> detections,
                                    double min_score) {
  std::vector<Annotation> out;
  for (const Detection& d : detections) {
    if (d.score >= min_score) out.push_back({d.image_id, d.box});
  }
  return out;
}

absl::StatusOr<std::string> ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    return absl::NotFoundError(internal::StrCat("cannot open ", path.string()));
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) {
    return absl::DataLossError(internal::StrCat("error reading ", path.string()));
  }
  return std::move(buffer).str();
}

absl::Status WriteFileAtomically(const fs::path& path,
                                 std::string_view content) {
  static std::atomic<uint64_t> counter{0};
  fs::path tmp = path;
  tmp += fmt::sprintf(".tmp.%d.%d", ::getpid(), counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      return absl::PermissionDeniedError(
          internal::StrCat("cannot write ", tmp.string()));
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      fs::remove(tmp, ignored);
      return absl::DataLossError(internal::StrCat("short write to ", tmp.string()));
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    return absl::InternalError(internal::StrCat("cannot rename onto ",
                                            path.string(), ": ", ec.message()));
  }
  return absl::OkStatus();
}

}  // namespace detkit
