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

#include <cstdio>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "testing/oracles.h"

namespace detkit {
namespace {

namespace fs = std::filesystem;
using ::testing::HasSubstr;

fs::path TempDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() /
                       ("detkit_annotations_" + name + "_" +
                        std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TEST(CsvTest, ParsesSingleRow) {
  const auto rows =
      *ParseAnnotationsCsv("filename,xmin,ymin,xmax,ymax\nimg1.jpg,2,3,8,9\n");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0], (Annotation{"img1.jpg", {2, 3, 8, 9}}));
}

TEST(CsvTest, InvertedBoxNamesTheLine) {
  const auto rows = ParseAnnotationsCsv(
      "filename,xmin,ymin,xmax,ymax\nok.jpg,0,0,1,1\nbad.jpg,9,3,8,9\n",
      "gt.csv");
  ASSERT_FALSE(rows.ok());
  EXPECT_THAT(std::string(rows.status().message()), HasSubstr("gt.csv:3:"));
  EXPECT_THAT(std::string(rows.status().message()), HasSubstr("xmin > xmax"));
}

TEST(CsvTest, MissingHeaderAndBadNumbers) {
  EXPECT_FALSE(ParseAnnotationsCsv("img1.jpg,2,3,8,9\n").ok());
  EXPECT_FALSE(ParseAnnotationsCsv("").ok());
  EXPECT_FALSE(
      ParseAnnotationsCsv("filename,xmin,ymin,xmax,ymax\na,1,x,3,4\n").ok());
  EXPECT_FALSE(
      ParseAnnotationsCsv("filename,xmin,ymin,xmax,ymax\na,1,2,3\n").ok());
}

TEST(CsvTest, DetectionScoreRange) {
  EXPECT_TRUE(ParseDetectionsCsv(
                  "filename,xmin,ymin,xmax,ymax,score\na,0,0,1,1,1.0\n")
                  .ok());
  EXPECT_FALSE(ParseDetectionsCsv(
                   "filename,xmin,ymin,xmax,ymax,score\na,0,0,1,1,1.5\n")
                   .ok());
}

TEST(CsvTest, AnnotationFilesMayCarryScores) {
  const auto rows = *ParseAnnotationsCsv(
      "filename,xmin,ymin,xmax,ymax,score\na,0,0,1,1,0.3\n");
  EXPECT_EQ(rows, (std::vector<Annotation>{{"a", {0, 0, 1, 1}}}));
}

TEST(CsvTest, RoundTripThroughFiles) {
  const fs::path dir = TempDir("roundtrip");
  const std::vector<Annotation> in = {{"a.jpg", {0.5, 1.25, 10, 20}},
                                      {"b.jpg", {3, 4, 5, 6}}};
  ASSERT_TRUE(SaveAnnotations(in, dir / "gt.csv").ok());
  EXPECT_EQ(*LoadAnnotations(dir / "gt.csv"), in);
  const std::vector<Detection> dets = {{"a.jpg", {0, 0, 1, 1}, 0.125}};
  ASSERT_TRUE(SaveDetections(dets, dir / "pred.csv").ok());
  EXPECT_EQ(*LoadDetections(dir / "pred.csv"), dets);
  fs::remove_all(dir);
}

TEST(CsvTest, RejectsUnwritableIds) {
  EXPECT_FALSE(FormatAnnotationsCsv(std::vector<Annotation>{{"a,b", {}}}).ok());
  EXPECT_FALSE(FormatAnnotationsCsv(std::vector<Annotation>{{"", {}}}).ok());
}

TEST(MetaTest, ParsesAndRejectsDuplicates) {
  const MetaIndex metas =
      *ParseImageMetasCsv("filename,width,height\na.jpg,640,480\n");
  EXPECT_EQ(metas.at("a.jpg").width, 640);
  EXPECT_FALSE(ParseImageMetasCsv(
                   "filename,width,height\na.jpg,640,480\na.jpg,1,1\n")
                   .ok());
  EXPECT_FALSE(
      ParseImageMetasCsv("filename,width,height\na.jpg,0,480\n").ok());
}

TEST(PairsTest, SelfPairIsAnError) {
  EXPECT_FALSE(ParseDuplicatePairsCsv("filename_a,filename_b\na,a\n").ok());
  EXPECT_EQ(ParseDuplicatePairsCsv("filename_a,filename_b\na,b\n")->size(), 1u);
}

TEST(YoloTest, CenteredBoxLine) {
  const ImageMeta meta{"a.jpg", 640, 480};
  const Box b{160, 120, 480, 360};
  const std::string line = "0 0.500000 0.500000 0.500000 0.500000\n";
  EXPECT_EQ(*FormatYoloLabels(std::vector<Annotation>{{"a.jpg", b}}, meta),
            line);
  const auto back = *ParseYoloLabels(line, meta);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].box, b);
}

TEST(YoloTest, EmptyImageGivesEmptyFile) {
  const fs::path dir = TempDir("yolo_empty");
  MetaIndex metas;
  metas["a.jpg"] = {"a.jpg", 100, 100};
  metas["b.jpg"] = {"b.jpg", 100, 100};
  const std::vector<Annotation> in = {{"a.jpg", {10, 10, 20, 30}}};
  ASSERT_TRUE(SaveYolo(in, metas, dir).ok());
  EXPECT_EQ(*ReadFile(dir / "b.txt"), "");
  const auto back = *LoadYolo(dir, metas);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_NEAR(back[0].box.ymax, 30, 1e-6 * 100);
  fs::remove_all(dir);
}

TEST(YoloTest, MissingMetaAndOutOfRange) {
  const fs::path dir = TempDir("yolo_err");
  EXPECT_FALSE(
      SaveYolo(std::vector<Annotation>{{"x.jpg", {0, 0, 1, 1}}}, {}, dir).ok());
  const ImageMeta meta{"a.jpg", 10, 10};
  EXPECT_FALSE(ParseYoloLabels("0 0.5 0.5 1.5 0.5\n", meta).ok());
  EXPECT_FALSE(ParseYoloLabels("1 0.5 0.5 0.5 0.5\n", meta).ok());
  EXPECT_FALSE(ParseYoloLabels("0 0.9 0.5 0.5 0.5\n", meta).ok());
  fs::remove_all(dir);
}

TEST(JoinDuplicatesTest, UnionGoesToSmallerId) {
  const std::vector<Annotation> in = {{"B", {5, 5, 6, 6}}, {"A", {1, 1, 2, 2}}};
  const JoinResult r = JoinDuplicates(in, std::vector<DuplicatePair>{{"A", "B"}});
  EXPECT_TRUE(r.warnings.empty());
  EXPECT_EQ(r.annotations, (std::vector<Annotation>{{"A", {1, 1, 2, 2}},
                                                    {"A", {5, 5, 6, 6}}}));
}

TEST(JoinDuplicatesTest, OneEmptySide) {
  const std::vector<Annotation> in = {{"B", {5, 5, 6, 6}}};
  const JoinResult r = JoinDuplicates(in, std::vector<DuplicatePair>{{"B", "A"}});
  EXPECT_EQ(r.annotations, (std::vector<Annotation>{{"A", {5, 5, 6, 6}}}));
  EXPECT_EQ(r.warnings.size(), 1u);
}

// 2000 images, 2496 boxes and 39 duplicate pairs whose boxes overlap, plus four
// singletons with two intersecting boxes each.
struct DuplicateScenario {
  std::vector<Annotation> annotations;
  std::vector<DuplicatePair> pairs;
};

DuplicateScenario MakeScenario() {
  DuplicateScenario s;
  auto id = [](int i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "train_%04d.jpg", i);
    return std::string(buf);
  };
  int image = 0;
  for (int p = 0; p < 39; ++p) {
    const std::string a = id(image++), b = id(image++);
    s.annotations.push_back({a, {100, 100, 200, 200}});
    s.annotations.push_back({b, {150, 150, 260, 240}});
    s.pairs.push_back({b, a});
  }
  for (int k = 0; k < 4; ++k) {
    const std::string a = id(image++);
    s.annotations.push_back({a, {2, 3, 8, 9}});
    s.annotations.push_back({a, {5, 1, 10, 7}});
  }
  for (int k = 0; k < 492; ++k) {
    const std::string a = id(image++);
    s.annotations.push_back({a, {10, 10, 50, 50}});
    s.annotations.push_back({a, {300, 300, 350, 380}});
  }
  while (image < 2000) s.annotations.push_back({id(image++), {40, 40, 90, 120}});
  return s;
}

TEST(JoinDuplicatesTest, CleansingScenarioCounts) {
  const DuplicateScenario s = MakeScenario();
  std::set<std::string> before;
  for (const Annotation& a : s.annotations) before.insert(a.image_id);
  ASSERT_EQ(before.size(), 2000u);
  ASSERT_EQ(s.annotations.size(), 2496u);

  const JoinResult joined = JoinDuplicates(s.annotations, s.pairs);
  EXPECT_EQ(joined.annotations.size(), 2496u);  // joining never loses boxes
  const std::vector<Annotation> merged = MergeIntersecting(joined.annotations);
  std::set<std::string> after;
  for (const Annotation& a : merged) after.insert(a.image_id);
  EXPECT_EQ(after.size(), 1961u);
  EXPECT_EQ(merged.size(), 2453u);
}

TEST(MergeIntersectingTest, WorkedExample) {
  const std::vector<Annotation> in = {{"a", {2, 3, 8, 9}}, {"a", {5, 1, 10, 7}}};
  EXPECT_EQ(MergeIntersecting(in),
            (std::vector<Annotation>{{"a", {2, 1, 10, 9}}}));
}

TEST(MergeIntersectingTest, DisjointUnchanged) {
  const std::vector<Annotation> in = {{"a", {0, 0, 1, 1}}, {"a", {5, 5, 6, 6}},
                                      {"b", {0, 0, 1, 1}}};
  EXPECT_EQ(MergeIntersecting(in), in);
}

TEST(MergeIntersectingTest, ChainMatchesFixpointOracle) {
  // a meets b, b meets c, a and c are apart.
  const std::vector<Box> boxes = {{0, 0, 4, 4}, {3, 3, 8, 8}, {7, 7, 12, 12}};
  std::vector<Annotation> in;
  for (const Box& b : boxes) in.push_back({"img", b});
  const std::vector<Box> expected = testing::OracleMergeFixpoint(boxes);
  ASSERT_EQ(expected.size(), 1u);
  EXPECT_EQ(expected[0], Merge(Merge(boxes[0], boxes[1]), boxes[2]));
  const auto out = MergeIntersecting(in);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].box, expected[0]);
}

TEST(ValidateTest, Issues) {
  MetaIndex metas;
  metas["a"] = {"a", 640, 480};
  EXPECT_TRUE(Validate(std::vector<Annotation>{{"a", {0, 0, 10, 10}}}, metas)
                  .empty());
  const auto oob = Validate(std::vector<Annotation>{{"a", {0, 0, 700, 10}}}, metas);
  ASSERT_EQ(oob.size(), 1u);
  EXPECT_EQ(oob[0].kind, IssueKind::kOutOfBounds);
  const auto dup = Validate(
      std::vector<Annotation>{{"a", {0, 0, 5, 5}}, {"a", {0, 0, 5, 5}}}, metas);
  ASSERT_EQ(dup.size(), 1u);
  EXPECT_EQ(dup[0].kind, IssueKind::kDuplicateRow);
  EXPECT_EQ(dup[0].index, 1u);
  const auto missing =
      Validate(std::vector<Annotation>{{"zz", {0, 0, 5, 5}}}, metas);
  ASSERT_EQ(missing.size(), 1u);
  EXPECT_EQ(missing[0].kind, IssueKind::kMissingMeta);
  const auto flat = Validate(std::vector<Annotation>{{"a", {3, 3, 3, 9}}}, metas);
  ASSERT_EQ(flat.size(), 1u);
  EXPECT_EQ(flat[0].kind, IssueKind::kZeroArea);
}

TEST(PseudoLabelTest, Threshold) {
  const std::vector<Detection> dets = {{"a", {0, 0, 1, 1}, 0.9},
                                       {"a", {2, 2, 3, 3}, 0.65}};
  EXPECT_EQ(PseudoLabel(dets, 0.70).size(), 1u);
  EXPECT_EQ(PseudoLabel(dets, 0.0).size(), 2u);
}

TEST(PseudoLabelTest, UnlabeledCorpusMatchesLinearScan) {
  std::vector<Detection> dets;
  uint64_t state = 12345;
  for (int image = 0; image < 2200; ++image) {
    const int n = static_cast<int>(state % 4);
    for (int k = 0; k < n; ++k) {
      state = state * 6364136223846793005ULL + 1442695040888963407ULL;
      const double score = static_cast<double>(state >> 11) / 9007199254740992.0;
      dets.push_back({"u" + std::to_string(image), {0, 0, 10.0 + k, 10}, score});
    }
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
  }
  size_t expected = 0;
  for (const Detection& d : dets) expected += d.score >= 0.70;
  EXPECT_EQ(PseudoLabel(dets, 0.70).size(), expected);
}

}  // namespace
}  // namespace detkit
