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

#include "blinkscope/cli.h"

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "blinkscope/errors.h"
#include "blinkscope/json_io.h"
#include "blinkscope/losses.h"
#include "blinkscope/metrics.h"
#include "blinkscope/netcore.h"
#include "blinkscope/postprocess.h"
#include "blinkscope/synthetic.h"
#include "blinkscope/tensor_file.h"

namespace blinkscope {

namespace {

namespace fs = std::filesystem;

std::string ThresholdKey(int percent) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%.2f", PercentToThreshold(percent));
  return buf;
}

// Writes to `path`, or to `out` when the path is empty.
void Emit(const Json& j, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << j.dump(2) << "\n";
  } else {
    WriteJsonFile(path, j);
  }
}

int Eval(const std::string& gt_path, const std::string& pred_path,
         const std::string& report_path, std::ostream& out) {
  const auto gts = ReadAnnotations(gt_path);
  const auto preds = ReadPredictions(pred_path);
  const EvalReport report = Evaluate(gts, preds);
  const Json j = ReportToJson(report);
  CheckReportJson(j);
  if (report_path.empty()) {
    out << j.dump(2) << "\n";
    return kExitOk;
  }
  WriteJsonFile(report_path, j);
  out << std::setprecision(6) << std::fixed << "inst_ap " << report.inst_ap
      << "  blink_ap_50 " << report.blink_ap_50 << "  blink_ap_75 "
      << report.blink_ap_75 << "\n";
  return kExitOk;
}

int Merge(const std::string& scores_path, double threshold,
          const std::string& out_path, std::ostream& out) {
  const Json j = ReadJsonFile(scores_path);
  const Json* list = &j;
  std::string path = "$";
  if (j.is_object()) {
    if (j.size() != 1 || !j.contains("scores")) {
      throw DataError("$", "expected an array or {\"scores\": [...]}");
    }
    list = &j["scores"];
    path = "$.scores";
  }
  if (!list->is_array()) throw DataError(path, "expected array of scores");
  std::vector<double> scores;
  for (std::size_t t = 0; t < list->size(); ++t) {
    const Json& s = (*list)[t];
    const std::string p = path + "[" + std::to_string(t) + "]";
    if (!s.is_number()) throw DataError(p, "expected number");
    const double v = s.get<double>();
    if (!(v >= 0.0 && v <= 1.0)) throw DataError(p, "score must be in [0, 1]");
    scores.push_back(v);
  }
  Json intervals = Json::array();
  for (const auto& b : MergeBlinks(scores, threshold)) {
    intervals.push_back(
        {{"start", b.start}, {"end", b.end}, {"confidence", b.confidence}});
  }
  Emit(Json{{"intervals", intervals}}, out_path, out);
  return kExitOk;
}

VideoPrediction PredictVideo(const FeatureFile& ff, const ModelParams& params,
                             const InferenceOptions& opt) {
  std::vector<ClipPrediction> clips;
  for (const ClipRange& r :
       PlanClips(ff.feature.frames(), opt.clip_length, opt.stride)) {
    const ModelOutput out = ForwardClip(ff.feature.Slice(r.start, r.length), params);
    ClipPrediction clip = Finalize(out, r.start, opt.keep_top, opt.blink_threshold);
    clip.video_id = ff.video_id;
    clips.push_back(std::move(clip));
  }
  VideoPrediction p = LinkClips(clips, opt.link_iou_threshold, opt.blink_threshold);
  p.video_id = ff.video_id;
  p.width = ff.width;
  p.height = ff.height;
  return p;
}

int Forward(const std::vector<std::string>& feature_paths,
            const std::string& weights_path, const std::string& config_path,
            const std::string& out_path, std::ostream& out) {
  const Config config = config_path.empty() ? Config{} : ReadConfig(config_path);
  const ModelParams params = ParamsFromTensorFile(ReadTensorFile(weights_path));
  std::vector<VideoPrediction> videos;
  for (const auto& path : feature_paths) {
    const FeatureFile ff = FeatureFromTensorFile(ReadTensorFile(path));
    if (ff.feature.channels() != params.config.channels) {
      throw DataError(path, "feature channels " +
                                std::to_string(ff.feature.channels()) +
                                " do not match the weights (" +
                                std::to_string(params.config.channels) + ")");
    }
    videos.push_back(PredictVideo(ff, params, config.inference));
  }
  if (out_path.empty()) {
    const Json j = PredictionsToJson(videos);
    ParsePredictions(j);
    out << j.dump(2) << "\n";
  } else {
    WritePredictions(out_path, videos);
  }
  return kExitOk;
}

Json ExpectedToJson(const std::optional<ExpectedMetrics>& e) {
  if (!e) return nullptr;
  Json at = Json::object();
  for (std::size_t k = 0; k < kInstIouPercents.size(); ++k) {
    at[ThresholdKey(kInstIouPercents[k])] = e->inst_ap_at[k];
  }
  return Json{{"oracle", e->oracle},
              {"inst_ap", e->inst_ap},
              {"inst_ap_at", at},
              {"blink_ap_50", e->blink_ap_50},
              {"blink_ap_75", e->blink_ap_75}};
}

int Synth(std::uint64_t seed, const std::string& out_dir,
          const std::string& config_path, std::ostream& out) {
  Config config = config_path.empty() ? Config{} : ReadConfig(config_path);
  config.seed = seed;
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError(out_dir, "cannot create directory: " + ec.message());

  const SyntheticScenario s = GenerateScenario(config.synthetic, seed);
  WriteAnnotations(dir / "gt.json", s.annotations);
  Json expected = Json::object();
  for (const auto& v : s.variants) {
    WritePredictions(dir / ("pred_" + v.name + ".json"), v.videos);
    expected[v.name] = ExpectedToJson(v.expected);
  }
  WriteJsonFile(dir / "expected.json", Json{{"seed", seed}, {"variants", expected}});
  WriteJsonFile(dir / "config.json", ConfigToJson(config));
  WriteTensorFile(dir / "weights.bin",
                  ParamsToTensorFile(InitParams(config.model, seed)));
  for (std::size_t v = 0; v < s.annotations.size(); ++v) {
    const auto& a = s.annotations[v];
    WriteTensorFile(dir / ("features_" + a.video_id + ".bin"),
                    SyntheticFeatures(a, config.model.channels,
                                      config.synthetic.feature_height,
                                      config.synthetic.feature_width, seed + v + 1));
  }
  out << "wrote " << s.annotations.size() << " videos and " << s.variants.size()
      << " prediction variants to " << dir.string() << "\n";
  return kExitOk;
}

int GradCheck(std::uint64_t seed, int samples, std::ostream& out,
              std::ostream& err) {
  if (samples < 1) throw std::invalid_argument("--samples must be >= 1");
  const GradCheckReport r = RunGradientCheck(seed, samples);
  out << std::scientific << std::setprecision(3) << "focal: " << r.samples
      << " samples, max rel error " << r.max_focal_rel_error << ", failures "
      << r.focal_failures << "\n"
      << "giou:  " << r.samples << " samples, max rel error "
      << r.max_giou_rel_error << ", failures " << r.giou_failures << "\n";
  if (!r.ok()) {
    err << "gradient check failed\n";
    return kExitInternal;
  }
  return kExitOk;
}

int Validate(const std::string& gt_path, std::ostream& out, std::ostream& err) {
  const auto videos = ParseAnnotations(ReadJsonFile(gt_path), /*validate=*/false);
  int count = 0;
  for (std::size_t v = 0; v < videos.size(); ++v) {
    for (const Violation& violation : ValidateAnnotation(videos[v])) {
      err << AnnotationViolationPath(v, violation) << ": " << ToString(violation)
          << "\n";
      ++count;
    }
  }
  if (count > 0) {
    err << count << " violation(s)\n";
    return kExitData;
  }
  out << "ok: " << videos.size() << " videos\n";
  return kExitOk;
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Instance-level multi-person blink detection tools", "blinkscope"};
  app.require_subcommand(1);

  std::string gt, pred, report;
  auto* eval = app.add_subcommand("eval", "Evaluate predictions (Inst-AP, Blink-AP)");
  eval->add_option("--gt", gt, "Annotation file")->required();
  eval->add_option("--pred", pred, "Prediction file")->required();
  eval->add_option("--report", report, "Report output (default: stdout)");

  std::string scores, merge_out;
  double threshold = kDefaultBlinkThreshold;
  auto* merge = app.add_subcommand("merge", "Merge frame blink scores into intervals");
  merge->add_option("--scores", scores, "JSON array of scores")->required();
  merge->add_option("--threshold", threshold, "Score threshold")
      ->capture_default_str();
  merge->add_option("--out", merge_out, "Output file (default: stdout)");

  std::vector<std::string> features;
  std::string weights, config, forward_out;
  auto* forward = app.add_subcommand("forward", "Run the detector on feature files");
  forward->add_option("--features", features, "Feature file(s)")->required();
  forward->add_option("--weights", weights, "Weight file")->required();
  forward->add_option("--config", config, "Config file (inference options)");
  forward->add_option("--out", forward_out, "Prediction output (default: stdout)");

  std::uint64_t seed = 0;
  std::string synth_out, synth_config;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic scenario");
  synth->add_option("--seed", seed, "Random seed")->capture_default_str();
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--config", synth_config, "Config file");

  std::uint64_t grad_seed = 0;
  int samples = 1000;
  auto* gradcheck =
      app.add_subcommand("gradcheck", "Check loss gradients by finite differences");
  gradcheck->add_option("--seed", grad_seed, "Random seed")->capture_default_str();
  gradcheck->add_option("--samples", samples, "Samples per loss")
      ->capture_default_str();

  std::string validate_gt;
  auto* validate = app.add_subcommand("validate", "Check an annotation file");
  validate->add_option("--gt", validate_gt, "Annotation file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*eval) return Eval(gt, pred, report, out);
    if (*merge) return Merge(scores, threshold, merge_out, out);
    if (*forward) return Forward(features, weights, config, forward_out, out);
    if (*synth) return Synth(seed, synth_out, synth_config, out);
    if (*gradcheck) return GradCheck(grad_seed, samples, out, err);
    if (*validate) return Validate(validate_gt, out, err);
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const InvariantError& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace blinkscope
