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

#include "blinkscope/json_io.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <string_view>

#include "blinkscope/errors.h"

namespace blinkscope {

namespace {

// --- strict accessors ------------------------------------------------------

std::string At(const std::string& path, std::string_view key) {
  return path + "." + std::string(key);
}

std::string At(const std::string& path, std::size_t index) {
  return path + "[" + std::to_string(index) + "]";
}

const char* TypeName(const Json& j) { return j.type_name(); }

void ExpectObject(const Json& j, const std::string& path,
                  std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) {
    throw DataError(path, std::string("expected object, got ") + TypeName(j));
  }
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw DataError(At(path, key), "unknown field");
  }
}

const Json& Member(const Json& obj, std::string_view key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw DataError(At(path, key), "missing field");
  return *it;
}

const Json& ExpectArray(const Json& j, const std::string& path) {
  if (!j.is_array()) {
    throw DataError(path, std::string("expected array, got ") + TypeName(j));
  }
  return j;
}

long long ToInteger(const Json& j, const std::string& path) {
  if (j.is_number_unsigned()) {
    const auto v = j.get<std::uint64_t>();
    if (v > static_cast<std::uint64_t>(std::numeric_limits<long long>::max())) {
      throw DataError(path, "integer out of range");
    }
    return static_cast<long long>(v);
  }
  if (j.is_number_integer()) return j.get<long long>();
  throw DataError(path, std::string("expected integer, got ") + TypeName(j));
}

int ToInt(const Json& j, const std::string& path) {
  const long long v = ToInteger(j, path);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw DataError(path, "integer out of range");
  }
  return static_cast<int>(v);
}

double ToDouble(const Json& j, const std::string& path) {
  if (!j.is_number()) {
    throw DataError(path, std::string("expected number, got ") + TypeName(j));
  }
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw DataError(path, "non-finite number");
  return v;
}

std::string ToString(const Json& j, const std::string& path) {
  if (!j.is_string()) {
    throw DataError(path, std::string("expected string, got ") + TypeName(j));
  }
  return j.get<std::string>();
}

std::vector<double> ToDoubles(const Json& j, const std::string& path) {
  ExpectArray(j, path);
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(ToDouble(j[i], At(path, i)));
  return out;
}

// --- boxes -----------------------------------------------------------------

std::optional<FrameBox> ParseBox(const Json& j, const std::string& path,
                                 int width, int height) {
  if (j.is_null()) return std::nullopt;
  ExpectArray(j, path);
  if (j.size() != 4) throw DataError(path, "box must have 4 coordinates");
  return FrameBox{ToDouble(j[0], At(path, 0)) / width,
                  ToDouble(j[1], At(path, 1)) / height,
                  ToDouble(j[2], At(path, 2)) / width,
                  ToDouble(j[3], At(path, 3)) / height};
}

Json BoxToJson(const FrameBox& b, int width, int height) {
  return Json::array({b.x1 * width, b.y1 * height, b.x2 * width, b.y2 * height});
}

Tube ParseBoxes(const Json& j, const std::string& path, int width, int height) {
  ExpectArray(j, path);
  Tube out;
  out.reserve(j.size());
  for (std::size_t t = 0; t < j.size(); ++t) {
    out.push_back(ParseBox(j[t], At(path, t), width, height));
  }
  return out;
}

std::vector<BlinkInterval> ParseIntervals(const Json& j, const std::string& path,
                                          bool with_confidence) {
  ExpectArray(j, path);
  std::vector<BlinkInterval> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const std::string p = At(path, k);
    if (with_confidence) {
      ExpectObject(j[k], p, {"start", "end", "confidence"});
    } else {
      ExpectObject(j[k], p, {"start", "end"});
    }
    BlinkInterval b;
    b.start = ToInt(Member(j[k], "start", p), At(p, "start"));
    b.end = ToInt(Member(j[k], "end", p), At(p, "end"));
    if (with_confidence) {
      b.confidence = ToDouble(Member(j[k], "confidence", p), At(p, "confidence"));
    }
    out.push_back(b);
  }
  return out;
}

void ParseResolution(const Json& v, const std::string& path, int* width,
                     int* height) {
  *width = ToInt(Member(v, "width", path), At(path, "width"));
  *height = ToInt(Member(v, "height", path), At(path, "height"));
  if (*width <= 0) throw DataError(At(path, "width"), "must be positive");
  if (*height <= 0) throw DataError(At(path, "height"), "must be positive");
}

// JSON path of the element a violation points at.
std::string ViolationPath(const std::string& video_path, const char* list,
                          const Violation& v) {
  if (v.instance < 0) return video_path;
  std::string p = At(At(video_path, list), static_cast<std::size_t>(v.instance));
  if (v.interval >= 0) return At(At(p, "blinks"), static_cast<std::size_t>(v.interval));
  if (v.frame < 0) return p;
  const auto frame = static_cast<std::size_t>(v.frame);
  if (v.rule == kRuleScoreRange) {
    return At(At(p, v.detail == "blink score" ? "blink_scores" : "face_scores"),
              frame);
  }
  if (v.detail == "presence flag not 0/1") return At(At(p, "presence"), frame);
  return At(At(p, "boxes"), frame);
}

std::string ThresholdKey(int percent) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%.2f", percent / 100.0);
  return buf;
}

void CheckUnit(const Json& j, const std::string& path) {
  const double v = ToDouble(j, path);
  if (v < 0.0 || v > 1.0) throw DataError(path, "must be in [0, 1]");
}

}  // namespace

Json ReadJsonFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string(), "cannot open for reading");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw DataError(path.string(), "invalid JSON at byte " +
                                       std::to_string(e.byte) + ": " + e.what());
  }
}

void WriteJsonFile(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError(path.string(), "cannot open for writing");
  out << j.dump(2) << "\n";
  if (!out) throw DataError(path.string(), "write failed");
}

// --- annotations -----------------------------------------------------------

std::vector<VideoAnnotation> ParseAnnotations(const Json& j, bool validate) {
  const std::string root = "$";
  ExpectObject(j, root, {"videos"});
  const Json& videos = ExpectArray(Member(j, "videos", root), At(root, "videos"));

  std::vector<VideoAnnotation> out;
  for (std::size_t v = 0; v < videos.size(); ++v) {
    const std::string vp = At(At(root, "videos"), v);
    const Json& jv = videos[v];
    ExpectObject(jv, vp,
                 {"video_id", "num_frames", "fps", "width", "height", "instances"});
    VideoAnnotation a;
    a.video_id = ToString(Member(jv, "video_id", vp), At(vp, "video_id"));
    a.num_frames = ToInt(Member(jv, "num_frames", vp), At(vp, "num_frames"));
    a.fps = ToDouble(Member(jv, "fps", vp), At(vp, "fps"));
    ParseResolution(jv, vp, &a.width, &a.height);

    const std::string ip = At(vp, "instances");
    const Json& instances = ExpectArray(Member(jv, "instances", vp), ip);
    for (std::size_t i = 0; i < instances.size(); ++i) {
      const std::string p = At(ip, i);
      const Json& ji = instances[i];
      ExpectObject(ji, p, {"presence", "boxes", "blinks"});
      InstanceTrack track;
      const Json& presence =
          ExpectArray(Member(ji, "presence", p), At(p, "presence"));
      for (std::size_t t = 0; t < presence.size(); ++t) {
        const std::string fp = At(At(p, "presence"), t);
        const int flag = ToInt(presence[t], fp);
        if (flag != 0 && flag != 1) throw DataError(fp, "presence must be 0 or 1");
        track.presence.push_back(static_cast<std::uint8_t>(flag));
      }
      track.boxes = ParseBoxes(Member(ji, "boxes", p), At(p, "boxes"), a.width,
                               a.height);
      track.blinks = ParseIntervals(Member(ji, "blinks", p), At(p, "blinks"), false);
      a.instances.push_back(std::move(track));
    }
    if (validate) {
      const auto violations = ValidateAnnotation(a);
      if (!violations.empty()) {
        throw DataError(ViolationPath(vp, "instances", violations.front()),
                        ToString(violations.front()));
      }
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::string AnnotationViolationPath(std::size_t video, const Violation& v) {
  return ViolationPath(At(std::string("$.videos"), video), "instances", v);
}

Json AnnotationsToJson(std::span<const VideoAnnotation> videos) {
  Json list = Json::array();
  for (const VideoAnnotation& a : videos) {
    Json instances = Json::array();
    for (const InstanceTrack& track : a.instances) {
      Json presence = Json::array();
      for (auto f : track.presence) presence.push_back(static_cast<int>(f));
      Json boxes = Json::array();
      for (const auto& b : track.boxes) {
        boxes.push_back(b ? BoxToJson(*b, a.width, a.height) : Json(nullptr));
      }
      Json blinks = Json::array();
      for (const auto& b : track.blinks) {
        blinks.push_back({{"start", b.start}, {"end", b.end}});
      }
      instances.push_back(
          {{"presence", presence}, {"boxes", boxes}, {"blinks", blinks}});
    }
    list.push_back({{"video_id", a.video_id},
                    {"num_frames", a.num_frames},
                    {"fps", a.fps},
                    {"width", a.width},
                    {"height", a.height},
                    {"instances", instances}});
  }
  return Json{{"videos", list}};
}

// --- predictions -----------------------------------------------------------

std::vector<VideoPrediction> ParsePredictions(const Json& j) {
  const std::string root = "$";
  ExpectObject(j, root, {"videos"});
  const Json& videos = ExpectArray(Member(j, "videos", root), At(root, "videos"));

  std::vector<VideoPrediction> out;
  for (std::size_t v = 0; v < videos.size(); ++v) {
    const std::string vp = At(At(root, "videos"), v);
    const Json& jv = videos[v];
    ExpectObject(jv, vp, {"video_id", "num_frames", "width", "height", "hypotheses"});
    VideoPrediction p;
    p.video_id = ToString(Member(jv, "video_id", vp), At(vp, "video_id"));
    p.num_frames = ToInt(Member(jv, "num_frames", vp), At(vp, "num_frames"));
    ParseResolution(jv, vp, &p.width, &p.height);

    const std::string hp = At(vp, "hypotheses");
    const Json& hyps = ExpectArray(Member(jv, "hypotheses", vp), hp);
    for (std::size_t i = 0; i < hyps.size(); ++i) {
      const std::string path = At(hp, i);
      const Json& jh = hyps[i];
      ExpectObject(jh, path,
                   {"confidence", "face_scores", "boxes", "blink_scores", "blinks"});
      InstancePrediction h;
      h.confidence =
          ToDouble(Member(jh, "confidence", path), At(path, "confidence"));
      h.face_scores =
          ToDoubles(Member(jh, "face_scores", path), At(path, "face_scores"));
      h.boxes = ParseBoxes(Member(jh, "boxes", path), At(path, "boxes"), p.width,
                           p.height);
      h.blink_scores =
          ToDoubles(Member(jh, "blink_scores", path), At(path, "blink_scores"));
      h.blink_intervals =
          ParseIntervals(Member(jh, "blinks", path), At(path, "blinks"), true);
      p.hypotheses.push_back(std::move(h));
    }
    const auto violations = ValidatePrediction(p);
    if (!violations.empty()) {
      throw DataError(ViolationPath(vp, "hypotheses", violations.front()),
                      ToString(violations.front()));
    }
    out.push_back(std::move(p));
  }
  return out;
}

Json PredictionsToJson(std::span<const VideoPrediction> videos) {
  Json list = Json::array();
  for (const VideoPrediction& p : videos) {
    Json hyps = Json::array();
    for (const InstancePrediction& h : p.hypotheses) {
      Json boxes = Json::array();
      for (std::size_t t = 0; t < h.boxes.size(); ++t) {
        const bool shown = h.boxes[t] && t < h.face_scores.size() &&
                           h.face_scores[t] >= kPresenceScore;
        boxes.push_back(shown ? BoxToJson(*h.boxes[t], p.width, p.height)
                              : Json(nullptr));
      }
      Json blinks = Json::array();
      for (const auto& b : h.blink_intervals) {
        blinks.push_back(
            {{"start", b.start}, {"end", b.end}, {"confidence", b.confidence}});
      }
      hyps.push_back({{"confidence", h.confidence},
                      {"face_scores", h.face_scores},
                      {"boxes", boxes},
                      {"blink_scores", h.blink_scores},
                      {"blinks", blinks}});
    }
    list.push_back({{"video_id", p.video_id},
                    {"num_frames", p.num_frames},
                    {"width", p.width},
                    {"height", p.height},
                    {"hypotheses", hyps}});
  }
  return Json{{"videos", list}};
}

std::vector<VideoAnnotation> ReadAnnotations(const std::filesystem::path& path) {
  return ParseAnnotations(ReadJsonFile(path));
}

std::vector<VideoPrediction> ReadPredictions(const std::filesystem::path& path) {
  return ParsePredictions(ReadJsonFile(path));
}

void WriteAnnotations(const std::filesystem::path& path,
                      std::span<const VideoAnnotation> videos) {
  const Json j = AnnotationsToJson(videos);
  try {
    ParseAnnotations(j);
  } catch (const DataError& e) {
    throw InvariantError(std::string("refusing to write invalid annotations: ") +
                         e.what());
  }
  WriteJsonFile(path, j);
}

void WritePredictions(const std::filesystem::path& path,
                      std::span<const VideoPrediction> videos) {
  const Json j = PredictionsToJson(videos);
  try {
    ParsePredictions(j);
  } catch (const DataError& e) {
    throw InvariantError(std::string("refusing to write invalid predictions: ") +
                         e.what());
  }
  WriteJsonFile(path, j);
}

// --- report ----------------------------------------------------------------

Json ReportToJson(const EvalReport& report) {
  Json at = Json::object();
  for (std::size_t k = 0; k < kInstIouPercents.size(); ++k) {
    at[ThresholdKey(kInstIouPercents[k])] = report.inst_ap_at[k];
  }
  Json per_video = Json::array();
  for (const VideoDiagnostics& d : report.per_video) {
    per_video.push_back({{"video_id", d.video_id},
                         {"num_gt_instances", d.num_gt_instances},
                         {"num_hypotheses", d.num_hypotheses},
                         {"num_tp_at_50", d.num_tp_at_50},
                         {"num_gt_blinks_matched", d.num_gt_blinks_matched},
                         {"num_pred_blinks_matched", d.num_pred_blinks_matched}});
  }
  return Json{{"inst_ap", report.inst_ap},
              {"inst_ap_at", at},
              {"blink_ap_50", report.blink_ap_50},
              {"blink_ap_75", report.blink_ap_75},
              {"per_video", per_video},
              {"diagnostics", report.diagnostics},
              {"metadata",
               {{"pooling", "across_videos"},
                {"ranking_score", "mean_face_score"},
                {"tube_iou", "volumetric"},
                {"ap_interpolation", "all_point"}}}};
}

void CheckReportJson(const Json& j) {
  const std::string root = "$";
  ExpectObject(j, root,
               {"inst_ap", "inst_ap_at", "blink_ap_50", "blink_ap_75", "per_video",
                "diagnostics", "metadata"});
  CheckUnit(Member(j, "inst_ap", root), At(root, "inst_ap"));
  CheckUnit(Member(j, "blink_ap_50", root), At(root, "blink_ap_50"));
  CheckUnit(Member(j, "blink_ap_75", root), At(root, "blink_ap_75"));

  const std::string ap = At(root, "inst_ap_at");
  const Json& at = Member(j, "inst_ap_at", root);
  if (!at.is_object() || at.size() != kInstIouPercents.size()) {
    throw DataError(ap, "expected one entry per IoU threshold");
  }
  for (int percent : kInstIouPercents) {
    const std::string key = ThresholdKey(percent);
    CheckUnit(Member(at, key, ap), At(ap, key));
  }

  const std::string pv = At(root, "per_video");
  const Json& per_video = ExpectArray(Member(j, "per_video", root), pv);
  for (std::size_t v = 0; v < per_video.size(); ++v) {
    const std::string p = At(pv, v);
    ExpectObject(per_video[v], p,
                 {"video_id", "num_gt_instances", "num_hypotheses", "num_tp_at_50",
                  "num_gt_blinks_matched", "num_pred_blinks_matched"});
    ToString(Member(per_video[v], "video_id", p), At(p, "video_id"));
    for (const char* key : {"num_gt_instances", "num_hypotheses", "num_tp_at_50",
                            "num_gt_blinks_matched", "num_pred_blinks_matched"}) {
      if (ToInt(Member(per_video[v], key, p), At(p, key)) < 0) {
        throw DataError(At(p, key), "must be >= 0");
      }
    }
  }

  const std::string dp = At(root, "diagnostics");
  const Json& diags = ExpectArray(Member(j, "diagnostics", root), dp);
  for (std::size_t i = 0; i < diags.size(); ++i) ToString(diags[i], At(dp, i));

  const std::string mp = At(root, "metadata");
  const Json& meta = Member(j, "metadata", root);
  ExpectObject(meta, mp, {"pooling", "ranking_score", "tube_iou", "ap_interpolation"});
  for (const char* key : {"pooling", "ranking_score", "tube_iou", "ap_interpolation"}) {
    ToString(Member(meta, key, mp), At(mp, key));
  }
}

// --- config ----------------------------------------------------------------

Json ConfigToJson(const Config& c) {
  return Json{
      {"model",
       {{"num_queries", c.model.num_queries},
        {"num_iterations", c.model.num_iterations},
        {"channels", c.model.channels},
        {"num_heads", c.model.num_heads},
        {"roi_grid", c.model.roi_grid}}},
      {"inference",
       {{"clip_length", c.inference.clip_length},
        {"stride", c.inference.stride},
        {"blink_threshold", c.inference.blink_threshold},
        {"link_iou_threshold", c.inference.link_iou_threshold},
        {"keep_top", c.inference.keep_top}}},
      {"loss",
       {{"cls_weight", c.loss.cls},
        {"l1_weight", c.loss.l1},
        {"giou_weight", c.loss.giou},
        {"blink_lambda", c.loss.blink_lambda},
        {"focal_alpha", c.loss.focal_alpha},
        {"focal_gamma", c.loss.focal_gamma}}},
      {"synthetic",
       {{"num_videos", c.synthetic.num_videos},
        {"min_frames", c.synthetic.min_frames},
        {"max_frames", c.synthetic.max_frames},
        {"fps", c.synthetic.fps},
        {"min_instances", c.synthetic.min_instances},
        {"max_instances", c.synthetic.max_instances},
        {"noise", c.synthetic.noise},
        {"feature_height", c.synthetic.feature_height},
        {"feature_width", c.synthetic.feature_width}}},
      {"seed", c.seed}};
}

Config ConfigFromJson(const Json& j) {
  const std::string root = "$";
  ExpectObject(j, root, {"model", "inference", "loss", "synthetic", "seed"});
  Config c;

  auto section = [&](const char* name, std::initializer_list<std::string_view> keys)
      -> const Json* {
    auto it = j.find(name);
    if (it == j.end()) return nullptr;
    ExpectObject(*it, At(root, name), keys);
    return &*it;
  };
  auto get_int = [](const Json* s, const std::string& path, const char* key,
                    int* dst) {
    if (s == nullptr) return;
    if (auto it = s->find(key); it != s->end()) *dst = ToInt(*it, At(path, key));
  };
  auto get_double = [](const Json* s, const std::string& path, const char* key,
                       double* dst) {
    if (s == nullptr) return;
    if (auto it = s->find(key); it != s->end()) *dst = ToDouble(*it, At(path, key));
  };

  const std::string mp = At(root, "model");
  const Json* model = section(
      "model", {"num_queries", "num_iterations", "channels", "num_heads", "roi_grid"});
  get_int(model, mp, "num_queries", &c.model.num_queries);
  get_int(model, mp, "num_iterations", &c.model.num_iterations);
  get_int(model, mp, "channels", &c.model.channels);
  get_int(model, mp, "num_heads", &c.model.num_heads);
  get_int(model, mp, "roi_grid", &c.model.roi_grid);

  const std::string ip = At(root, "inference");
  const Json* inference = section("inference", {"clip_length", "stride",
                                                "blink_threshold",
                                                "link_iou_threshold", "keep_top"});
  get_int(inference, ip, "clip_length", &c.inference.clip_length);
  get_int(inference, ip, "stride", &c.inference.stride);
  get_double(inference, ip, "blink_threshold", &c.inference.blink_threshold);
  get_double(inference, ip, "link_iou_threshold", &c.inference.link_iou_threshold);
  get_int(inference, ip, "keep_top", &c.inference.keep_top);

  const std::string lp = At(root, "loss");
  const Json* loss = section("loss", {"cls_weight", "l1_weight", "giou_weight",
                                      "blink_lambda", "focal_alpha", "focal_gamma"});
  get_double(loss, lp, "cls_weight", &c.loss.cls);
  get_double(loss, lp, "l1_weight", &c.loss.l1);
  get_double(loss, lp, "giou_weight", &c.loss.giou);
  get_double(loss, lp, "blink_lambda", &c.loss.blink_lambda);
  get_double(loss, lp, "focal_alpha", &c.loss.focal_alpha);
  get_double(loss, lp, "focal_gamma", &c.loss.focal_gamma);

  const std::string sp = At(root, "synthetic");
  const Json* synth = section(
      "synthetic", {"num_videos", "min_frames", "max_frames", "fps", "min_instances",
                    "max_instances", "noise", "feature_height", "feature_width"});
  get_int(synth, sp, "num_videos", &c.synthetic.num_videos);
  get_int(synth, sp, "min_frames", &c.synthetic.min_frames);
  get_int(synth, sp, "max_frames", &c.synthetic.max_frames);
  get_double(synth, sp, "fps", &c.synthetic.fps);
  get_int(synth, sp, "min_instances", &c.synthetic.min_instances);
  get_int(synth, sp, "max_instances", &c.synthetic.max_instances);
  get_double(synth, sp, "noise", &c.synthetic.noise);
  get_int(synth, sp, "feature_height", &c.synthetic.feature_height);
  get_int(synth, sp, "feature_width", &c.synthetic.feature_width);

  if (auto it = j.find("seed"); it != j.end()) {
    const std::string p = At(root, "seed");
    if (!it->is_number_unsigned()) {
      if (!it->is_number_integer() || it->get<long long>() < 0) {
        throw DataError(p, "expected non-negative integer");
      }
    }
    c.seed = it->get<std::uint64_t>();
  }

  try {
    c.Validate();
  } catch (const std::invalid_argument& e) {
    throw DataError("$", e.what());
  }
  return c;
}

Config ReadConfig(const std::filesystem::path& path) {
  return ConfigFromJson(ReadJsonFile(path));
}

}  // namespace blinkscope
