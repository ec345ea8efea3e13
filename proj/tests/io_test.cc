/* Copyright 2026 The Blinkscope Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "blinkscope/errors.h"
#include "blinkscope/json_io.h"
#include "blinkscope/synthetic.h"
#include "blinkscope/tensor_file.h"
#include "doctest.h"

namespace blinkscope {
namespace {

namespace fs = std::filesystem;

fs::path TempDir() {
  const char* env = std::getenv("BLINKSCOPE_TEST_TMP");
  fs::path dir = env ? fs::path(env) : fs::temp_directory_path() / "blinkscope_io_test";
  fs::create_directories(dir);
  return dir;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kMinimal = R"({"videos": [{"video_id": "v", "num_frames": 3, "fps": 25,
  "width": 200, "height": 100, "instances": [{"presence": [1, 1, 0],
  "boxes": [[10, 20, 50, 60], [12, 20, 52, 60], null],
  "blinks": [{"start": 0, "end": 1}]}]}]})";

std::string ErrorOf(const std::string& text) {
  try {
    ParseAnnotations(Json::parse(text));
  } catch (const DataError& e) {
    return e.path();
  }
  return "";
}

TEST_CASE("minimal annotation file") {
  const auto videos = ParseAnnotations(Json::parse(kMinimal));
  REQUIRE(videos.size() == 1);
  const auto& a = videos[0];
  CHECK(a.num_frames == 3);
  CHECK(a.fps == 25.0);
  REQUIRE(a.instances.size() == 1);
  CHECK(a.instances[0].presence == std::vector<std::uint8_t>{1, 1, 0});
  REQUIRE(a.instances[0].boxes[0].has_value());
  CHECK(*a.instances[0].boxes[0] == FrameBox{0.05, 0.2, 0.25, 0.6});
  CHECK(!a.instances[0].boxes[2].has_value());
  CHECK(a.instances[0].blinks[0] == BlinkInterval{0, 1, 1.0});
  CHECK(ParseAnnotations(AnnotationsToJson(videos)) == videos);
}

TEST_CASE("schema errors name the JSON path") {
  Json j = Json::parse(kMinimal);
  j["videos"][0]["instances"][0]["blinks"][0]["start"] = 2;
  CHECK(ErrorOf(j.dump()) == "$.videos[0].instances[0].blinks[0]");

  j = Json::parse(kMinimal);
  j["videos"][0]["instances"][0]["boxes"][2] = Json::array({1, 1, 2, 2});
  CHECK(ErrorOf(j.dump()) == "$.videos[0].instances[0].boxes[2]");

  j = Json::parse(kMinimal);
  j["videos"][0].erase("fps");
  CHECK(ErrorOf(j.dump()) == "$.videos[0].fps");

  j = Json::parse(kMinimal);
  j["videos"][0]["num_frames"] = "3";
  CHECK(ErrorOf(j.dump()) == "$.videos[0].num_frames");

  j = Json::parse(kMinimal);
  j["videos"][0]["extra"] = 1;
  CHECK(ErrorOf(j.dump()) == "$.videos[0].extra");

  j = Json::parse(kMinimal);
  j["videos"][0]["instances"][0]["presence"][1] = 2;
  CHECK(ErrorOf(j.dump()) == "$.videos[0].instances[0].presence[1]");

  j = Json::parse(kMinimal);
  j["videos"][0]["instances"][0]["boxes"][0] = Json::array({10, 20, 50});
  CHECK(ErrorOf(j.dump()) == "$.videos[0].instances[0].boxes[0]");
}

TEST_CASE("malformed JSON file is a data error") {
  const fs::path p = TempDir() / "broken.json";
  std::ofstream(p) << "{\"videos\": [";
  CHECK_THROWS_AS(ReadAnnotations(p), DataError);
  CHECK_THROWS_AS(ReadAnnotations(TempDir() / "does_not_exist.json"), DataError);
}

TEST_CASE("write-then-read round trip over generated scenarios") {
  const fs::path dir = TempDir();
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto s = GenerateScenario(SyntheticOptions{}, seed);
    WriteAnnotations(dir / "gt.json", s.annotations);
    CHECK(ReadAnnotations(dir / "gt.json") == s.annotations);
    for (const auto& v : s.variants) {
      WritePredictions(dir / "pred.json", v.videos);
      const auto back = ReadPredictions(dir / "pred.json");
      CHECK_MESSAGE(back == v.videos, "seed ", seed, " variant ", v.name);
      // Writing again yields the same bytes.
      const std::string first = Slurp(dir / "pred.json");
      WritePredictions(dir / "pred.json", back);
      CHECK(Slurp(dir / "pred.json") == first);
    }
  }
}

TEST_CASE("boxes below the presence score are written as null") {
  const auto s = GenerateScenario(SyntheticOptions{}, 3);
  VideoPrediction p = PerfectPrediction(s.annotations[0]);
  auto& h = p.hypotheses[0];
  int t = 0;
  while (!h.boxes[t]) ++t;
  h.face_scores[t] = 0.4;
  h.confidence = MeanScore(h.face_scores);
  const Json j = PredictionsToJson(std::vector<VideoPrediction>{p});
  CHECK(j["videos"][0]["hypotheses"][0]["boxes"][t].is_null());
  const auto back = ParsePredictions(j);
  CHECK(!back[0].hypotheses[0].boxes[t].has_value());
}

TEST_CASE("prediction confidence is validated") {
  const auto s = GenerateScenario(SyntheticOptions{}, 3);
  Json j = PredictionsToJson(std::vector<VideoPrediction>{PerfectPrediction(s.annotations[0])});
  j["videos"][0]["hypotheses"][0]["confidence"] = 0.123;
  try {
    ParsePredictions(j);
    FAIL("expected a DataError");
  } catch (const DataError& e) {
    CHECK(e.path() == "$.videos[0].hypotheses[0]");
  }
  j = PredictionsToJson(std::vector<VideoPrediction>{PerfectPrediction(s.annotations[0])});
  j["videos"][0]["hypotheses"][0]["blink_scores"][2] = 1.5;
  try {
    ParsePredictions(j);
    FAIL("expected a DataError");
  } catch (const DataError& e) {
    CHECK(e.path() == "$.videos[0].hypotheses[0].blink_scores[2]");
  }
}

TEST_CASE("config round trip and validation") {
  Config c;
  c.seed = 42;
  c.model.num_queries = 7;
  c.inference.blink_threshold = 0.25;
  c.synthetic.noise = 0.0;
  const Json j = ConfigToJson(c);
  const Config back = ConfigFromJson(j);
  CHECK(ConfigToJson(back) == j);
  CHECK(back.model.num_queries == 7);
  CHECK(back.seed == 42);

  const Config defaults = ConfigFromJson(Json::object());
  CHECK(defaults.model.num_queries == 50);
  CHECK(defaults.model.num_iterations == 4);
  CHECK(defaults.inference.clip_length == 36);
  CHECK(defaults.inference.stride == 18);
  CHECK(defaults.inference.blink_threshold == 0.3);
  CHECK(defaults.loss.blink_lambda == 5.0);

  CHECK_THROWS_AS(ConfigFromJson(Json{{"inference", {{"stride", 36}}}}), DataError);
  CHECK_THROWS_AS(ConfigFromJson(Json{{"model", {{"num_heads", 5}}}}), DataError);
  CHECK_THROWS_AS(ConfigFromJson(Json{{"model", {{"depth", 5}}}}), DataError);
  CHECK_THROWS_AS(ConfigFromJson(Json{{"seed", -1}}), DataError);
  CHECK_THROWS_AS(ConfigFromJson(Json{{"inference", {{"blink_threshold", 1.0}}}}),
                  DataError);
}

TEST_CASE("report JSON") {
  const auto s = GenerateScenario(SyntheticOptions{}, 1);
  const EvalReport r = Evaluate(s.annotations, s.FindVariant(kVariantShrink)->videos);
  const Json j = ReportToJson(r);
  CHECK_NOTHROW(CheckReportJson(j));
  CHECK(j["inst_ap"] == 0.3);
  CHECK(j["inst_ap_at"]["0.60"] == 1.0);
  CHECK(j["inst_ap_at"]["0.65"] == 0.0);
  CHECK(j["metadata"]["pooling"] == "across_videos");
  Json bad = j;
  bad["inst_ap"] = 1.5;
  CHECK_THROWS_AS(CheckReportJson(bad), DataError);
  bad = j;
  bad["inst_ap_at"].erase("0.95");
  CHECK_THROWS_AS(CheckReportJson(bad), DataError);
}

TEST_CASE("tensor file round trip and corruption") {
  TensorFile f;
  f.metadata["kind"] = "test";
  f.arrays.push_back(NamedArray{"a", {2, 3}, {1, 2, 3, 4, 5, -0.0}});
  f.arrays.push_back(NamedArray{"scalar", {}, {3.25}});
  const std::string bytes = EncodeTensorFile(f);
  CHECK(bytes.substr(0, 8) == "BLSCTNSR");
  const TensorFile g = DecodeTensorFile(bytes);
  CHECK(g.version == kTensorFileVersion);
  CHECK(g.metadata == f.metadata);
  REQUIRE(g.arrays.size() == 2);
  CHECK(g.arrays[0].shape == f.arrays[0].shape);
  CHECK(g.arrays[0].values == f.arrays[0].values);
  CHECK(std::signbit(g.arrays[0].values[5]));
  CHECK(g.arrays[1].values == std::vector<double>{3.25});
  CHECK_NOTHROW(g.Require("a", {2, 3}));
  CHECK_THROWS_AS(g.Require("a", {3, 2}), DataError);
  CHECK_THROWS_AS(g.Require("b", {1}), DataError);
  CHECK_THROWS_AS(g.RequireMeta("missing"), DataError);

  CHECK_THROWS_AS(DecodeTensorFile(bytes.substr(0, bytes.size() - 1)), DataError);
  CHECK_THROWS_AS(DecodeTensorFile(bytes + "x"), DataError);
  std::string wrong_magic = bytes;
  wrong_magic[0] = 'X';
  CHECK_THROWS_AS(DecodeTensorFile(wrong_magic), DataError);
  std::string wrong_version = bytes;
  wrong_version[8] = 9;
  CHECK_THROWS_AS(DecodeTensorFile(wrong_version), DataError);

  const fs::path p = TempDir() / "t.bin";
  WriteTensorFile(p, f);
  CHECK(EncodeTensorFile(ReadTensorFile(p)) == bytes);
}

TEST_CASE("synthetic features") {
  const auto s = GenerateScenario(SyntheticOptions{}, 2);
  const auto& a = s.annotations[0];
  const TensorFile f = SyntheticFeatures(a, 8, 4, 6, 1);
  const FeatureFile ff = FeatureFromTensorFile(DecodeTensorFile(EncodeTensorFile(f)));
  CHECK(ff.video_id == a.video_id);
  CHECK(ff.width == a.width);
  CHECK(ff.feature.frames() == a.num_frames);
  CHECK(ff.feature.channels() == 8);
  CHECK(ff.feature.height() == 4);
  CHECK(ff.feature.width() == 6);
  CHECK(SyntheticFeatures(a, 8, 4, 6, 1).arrays[0].values == f.arrays[0].values);

  TensorFile bad = f;
  bad.metadata["num_frames"] = "7x";
  CHECK_THROWS_AS(FeatureFromTensorFile(bad), DataError);
  bad = f;
  bad.metadata["kind"] = "weights";
  CHECK_THROWS_AS(FeatureFromTensorFile(bad), DataError);
}

TEST_CASE("scenario generation is deterministic and covers the phenomena") {
  const auto a = GenerateScenario(SyntheticOptions{}, 17);
  const auto b = GenerateScenario(SyntheticOptions{}, 17);
  CHECK(a.annotations == b.annotations);
  REQUIRE(a.variants.size() == b.variants.size());
  for (std::size_t k = 0; k < a.variants.size(); ++k) {
    CHECK(a.variants[k].videos == b.variants[k].videos);
  }
  CHECK(GenerateScenario(SyntheticOptions{}, 18).annotations != a.annotations);

  bool entry_gap = false, back_to_back = false;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = GenerateScenario(SyntheticOptions{}, seed);
    for (const auto& v : s.annotations) {
      CHECK(v.instances.size() >= 1);
      CHECK(v.instances.size() <= 8);
      for (const auto& t : v.instances) {
        CHECK(!t.blinks.empty());
        entry_gap = entry_gap || t.presence.front() == 0 || t.presence.back() == 0;
        for (std::size_t k = 1; k < t.blinks.size(); ++k) {
          back_to_back = back_to_back || t.blinks[k].start == t.blinks[k - 1].end + 2;
        }
        for (const auto& bl : t.blinks) {
          // 0.2-0.4 s at 30 fps.
          CHECK(bl.Length() >= 6);
          CHECK(bl.Length() <= 12);
        }
      }
    }
  }
  CHECK(entry_gap);
  CHECK(back_to_back);

  SyntheticOptions quiet;
  quiet.noise = 0.0;
  const auto q = GenerateScenario(quiet, 5);
  const auto* noisy = q.FindVariant(kVariantNoisy);
  REQUIRE(noisy != nullptr);
  REQUIRE(noisy->expected.has_value());
  CHECK(noisy->expected->inst_ap == 1.0);
  CHECK(noisy->expected->blink_ap_50 == 1.0);
  CHECK(noisy->expected->blink_ap_75 == 1.0);
}

}  // namespace
}  // namespace blinkscope
