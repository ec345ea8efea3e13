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

#include "blinkscope/synthetic.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <utility>

#include "blinkscope/errors.h"
#include "blinkscope/postprocess.h"

namespace blinkscope {

namespace {

// Portable draws; the standard distributions are implementation defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  bool Bernoulli(double p) { return Uniform() < p; }
  // Inclusive range; hi < lo yields lo.
  int Int(int lo, int hi) {
    if (hi <= lo) return lo;
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(engine_() % span);
  }

 private:
  std::mt19937_64 engine_;
};

struct PixelBox {
  int x1, y1, x2, y2;
  long long Area() const {
    return static_cast<long long>(x2 - x1) * (y2 - y1);
  }
};

FrameBox Normalize(const PixelBox& b) {
  return FrameBox{static_cast<double>(b.x1) / kSyntheticWidth,
                  static_cast<double>(b.y1) / kSyntheticHeight,
                  static_cast<double>(b.x2) / kSyntheticWidth,
                  static_cast<double>(b.y2) / kSyntheticHeight};
}

// Exact for synthetic boxes: normalized corners are k / 2^n.
PixelBox ToPixels(const FrameBox& b) {
  return PixelBox{static_cast<int>(std::lround(b.x1 * kSyntheticWidth)),
                  static_cast<int>(std::lround(b.y1 * kSyntheticHeight)),
                  static_cast<int>(std::lround(b.x2 * kSyntheticWidth)),
                  static_cast<int>(std::lround(b.y2 * kSyntheticHeight))};
}

std::vector<BlinkInterval> DrawBlinks(Rng& rng, int num_frames, double fps,
                                      bool force_back_to_back) {
  const int max_len = std::max(2, (num_frames - 2) / 3);
  auto draw_len = [&] {
    const double seconds = 0.2 + 0.2 * rng.Uniform();
    return std::clamp(static_cast<int>(std::lround(fps * seconds)), 2, max_len);
  };
  std::vector<BlinkInterval> blinks;
  int cursor = rng.Int(0, num_frames / 4);
  while (true) {
    const int len = draw_len();
    if (cursor + len - 1 > num_frames - 2) break;
    blinks.push_back(BlinkInterval{cursor, cursor + len - 1, 1.0});
    const bool back_to_back =
        (blinks.size() == 1 && force_back_to_back) || rng.Bernoulli(0.3);
    cursor = blinks.back().end + (back_to_back ? 2 : 1 + rng.Int(3, std::max(3, static_cast<int>(fps))));
  }
  if (blinks.empty()) blinks.push_back(BlinkInterval{0, draw_len() - 1, 1.0});
  return blinks;
}

InstanceTrack DrawInstance(Rng& rng, int slot, int num_frames, double fps,
                           bool force_back_to_back) {
  InstanceTrack track;
  const int enter = rng.Bernoulli(0.5) ? 0 : rng.Int(1, num_frames / 4);
  const int exit = rng.Bernoulli(0.5) ? num_frames - 1
                                      : rng.Int(3 * num_frames / 4, num_frames - 2);
  int gap_start = -1;
  int gap_end = -1;
  if (rng.Bernoulli(0.3)) {
    gap_start = rng.Int(enter + 2, exit - 6);
    gap_end = gap_start + rng.Int(1, 3);
  }

  const int slot_x = slot * kSyntheticSlotWidth;
  int dx = rng.Int(-8, 8);
  int y1 = rng.Int(64, 352);
  track.presence.assign(num_frames, 0);
  track.boxes.assign(num_frames, std::nullopt);
  for (int t = 0; t < num_frames; ++t) {
    dx = std::clamp(dx + rng.Int(-2, 2), -16, 16);
    y1 = std::clamp(y1 + rng.Int(-2, 2), 64, 352);
    const bool visible =
        t >= enter && t <= exit && !(t >= gap_start && t <= gap_end);
    if (!visible) continue;
    const int x1 = slot_x + 24 + dx;
    track.presence[t] = 1;
    track.boxes[t] = Normalize(
        PixelBox{x1, y1, x1 + kSyntheticBoxWidth, y1 + kSyntheticBoxHeight});
  }
  track.blinks = DrawBlinks(rng, num_frames, fps, force_back_to_back);
  return track;
}

InstancePrediction PerfectHypothesis(const InstanceTrack& track, int num_frames) {
  InstancePrediction h;
  h.face_scores.assign(num_frames, 0.0);
  h.boxes = track.boxes;
  for (int t = 0; t < num_frames; ++t) {
    if (track.presence[t]) h.face_scores[t] = 1.0;
  }
  const auto labels = BlinkFrameLabels(track, num_frames);
  h.blink_scores.assign(labels.begin(), labels.end());
  h.blink_intervals = MergeBlinks(h.blink_scores);
  h.confidence = MeanScore(h.face_scores);
  return h;
}

VideoPrediction EmptyPrediction(const VideoAnnotation& a) {
  VideoPrediction p;
  p.video_id = a.video_id;
  p.num_frames = a.num_frames;
  p.width = a.width;
  p.height = a.height;
  return p;
}

VideoPrediction ShrinkPrediction(const VideoAnnotation& a) {
  VideoPrediction p = PerfectPrediction(a);
  const int inset = (kSyntheticBoxWidth - kSyntheticShrunkWidth) / 2;
  for (auto& h : p.hypotheses) {
    for (auto& b : h.boxes) {
      if (!b) continue;
      PixelBox px = ToPixels(*b);
      px.x1 += inset;
      px.x2 -= inset;
      b = Normalize(px);
    }
  }
  return p;
}

VideoPrediction BlinkShiftPrediction(const VideoAnnotation& a) {
  VideoPrediction p = PerfectPrediction(a);
  for (auto& h : p.hypotheses) {
    std::vector<double> shifted(a.num_frames, 0.0);
    for (int t = 0; t + 1 < a.num_frames; ++t) shifted[t + 1] = h.blink_scores[t];
    h.blink_scores = std::move(shifted);
    for (auto& b : h.blink_intervals) {
      // Delaying a length-L interval by one frame leaves L - 1 of L + 1
      // frames in common.
      const int len = b.Length();
      ++b.start;
      ++b.end;
      b.confidence = static_cast<double>(len - 1) / (len + 1);
    }
  }
  return p;
}

PixelBox Jitter(Rng& rng, PixelBox b, int amount) {
  b.x1 += rng.Int(-amount, amount);
  b.x2 += rng.Int(-amount, amount);
  b.y1 += rng.Int(-amount, amount);
  b.y2 += rng.Int(-amount, amount);
  b.x1 = std::clamp(b.x1, 0, kSyntheticWidth - 2);
  b.x2 = std::clamp(b.x2, b.x1 + 1, kSyntheticWidth);
  b.y1 = std::clamp(b.y1, 0, kSyntheticHeight - 2);
  b.y2 = std::clamp(b.y2, b.y1 + 1, kSyntheticHeight);
  return b;
}

// Face score drawn in [0.5, 1] where the box is kept and below 0.5 where it
// is dropped, so the box/score pairing survives serialization.
double FaceScore(Rng& rng, bool present, double noise) {
  return present ? 1.0 - 0.5 * noise * rng.Uniform()
                 : 0.49 * noise * rng.Uniform();
}

void FillBlinkScores(Rng& rng, const std::vector<std::uint8_t>& labels,
                     double noise, InstancePrediction* h) {
  h->blink_scores.resize(labels.size());
  for (std::size_t t = 0; t < labels.size(); ++t) {
    bool on = labels[t] != 0;
    if (rng.Bernoulli(0.02 * noise)) on = !on;
    h->blink_scores[t] = on ? 1.0 - 0.6 * noise * rng.Uniform()
                            : 0.25 * noise * rng.Uniform();
  }
  h->blink_intervals = MergeBlinks(h->blink_scores);
}

InstancePrediction NoisyHypothesis(Rng& rng, const InstanceTrack& track,
                                   int num_frames, double noise, int shift_x) {
  const int amount = static_cast<int>(std::lround(8.0 * noise));
  InstancePrediction h;
  h.face_scores.resize(num_frames);
  h.boxes.assign(num_frames, std::nullopt);
  for (int t = 0; t < num_frames; ++t) {
    const bool present = track.presence[t] && !rng.Bernoulli(0.05 * noise);
    h.face_scores[t] = FaceScore(rng, present, noise);
    if (!present) continue;
    PixelBox b = ToPixels(*track.boxes[t]);
    b.x1 += shift_x;
    b.x2 += shift_x;
    h.boxes[t] = Normalize(Jitter(rng, b, amount));
  }
  FillBlinkScores(rng, BlinkFrameLabels(track, num_frames), noise, &h);
  h.confidence = MeanScore(h.face_scores);
  return h;
}

InstancePrediction FalsePositive(Rng& rng, int slot, int num_frames, double noise) {
  InstancePrediction h;
  h.face_scores.resize(num_frames);
  h.boxes.assign(num_frames, std::nullopt);
  const int start = rng.Int(0, num_frames / 2);
  const int end = rng.Int(start + 1, num_frames - 1);
  int y1 = rng.Int(64, 352);
  const int x1 = slot * kSyntheticSlotWidth + 24;
  for (int t = 0; t < num_frames; ++t) {
    y1 = std::clamp(y1 + rng.Int(-2, 2), 64, 352);
    const bool present = t >= start && t <= end;
    h.face_scores[t] = present ? 0.5 + 0.2 * rng.Uniform()
                               : 0.49 * noise * rng.Uniform();
    if (present) {
      h.boxes[t] = Normalize(
          PixelBox{x1, y1, x1 + kSyntheticBoxWidth, y1 + kSyntheticBoxHeight});
    }
  }
  FillBlinkScores(rng, std::vector<std::uint8_t>(num_frames, 0), noise, &h);
  h.confidence = MeanScore(h.face_scores);
  return h;
}

VideoPrediction NoisyPrediction(Rng& rng, const VideoAnnotation& a,
                                const std::vector<int>& slots, double noise) {
  if (noise == 0.0) return PerfectPrediction(a);
  VideoPrediction p = EmptyPrediction(a);
  for (const InstanceTrack& track : a.instances) {
    if (rng.Bernoulli(0.1 * noise)) continue;
    p.hypotheses.push_back(NoisyHypothesis(rng, track, a.num_frames, noise, 0));
    if (rng.Bernoulli(0.2 * noise)) {
      p.hypotheses.push_back(NoisyHypothesis(rng, track, a.num_frames, noise, 24));
    }
  }
  std::vector<int> free_slots;
  for (int s = 0; s < kSyntheticSlots; ++s) {
    if (std::find(slots.begin(), slots.end(), s) == slots.end()) {
      free_slots.push_back(s);
    }
  }
  if (!free_slots.empty() && rng.Bernoulli(0.5 * noise)) {
    const int slot = free_slots[rng.Int(0, static_cast<int>(free_slots.size()) - 1)];
    p.hypotheses.push_back(FalsePositive(rng, slot, a.num_frames, noise));
  }
  return p;
}

// Frame-sum tube overlap in integer pixel areas.
std::pair<long long, long long> TubeAreas(const Tube& pred, const Tube& gt) {
  long long inter = 0;
  long long uni = 0;
  for (std::size_t t = 0; t < gt.size(); ++t) {
    const long long ap = pred[t] ? ToPixels(*pred[t]).Area() : 0;
    const long long ag = gt[t] ? ToPixels(*gt[t]).Area() : 0;
    long long i = 0;
    if (pred[t] && gt[t]) {
      const PixelBox p = ToPixels(*pred[t]);
      const PixelBox g = ToPixels(*gt[t]);
      const long long w = std::max(0, std::min(p.x2, g.x2) - std::max(p.x1, g.x1));
      const long long h = std::max(0, std::min(p.y2, g.y2) - std::max(p.y1, g.y1));
      i = w * h;
    }
    inter += i;
    uni += ap + ag - i;
  }
  return {inter, uni};
}

bool ReachesPercent(long long inter, long long uni, int percent) {
  return uni > 0 && 100 * inter >= percent * uni;
}

// Expected metrics for variants where hypothesis k of every video is the
// k-th ground-truth instance, instances never overlap each other, every
// tube has the same overlap ratio with its ground truth, and predicted
// blink k is confined to ground-truth blink k with confidence equal to the
// pair's temporal IoU. Under those conditions a threshold is either passed
// by every tube or by none, and true-positive blinks outrank all others, so
// each AP is the fraction of true positives.
std::optional<ExpectedMetrics> CorrespondenceOracle(
    const std::vector<VideoAnnotation>& gts,
    const std::vector<VideoPrediction>& preds) {
  std::optional<std::pair<long long, long long>> ratio;
  for (std::size_t v = 0; v < gts.size(); ++v) {
    if (preds[v].hypotheses.size() != gts[v].instances.size()) return std::nullopt;
    for (std::size_t k = 0; k < gts[v].instances.size(); ++k) {
      const auto areas =
          TubeAreas(preds[v].hypotheses[k].boxes, gts[v].instances[k].boxes);
      if (ratio && areas.first * ratio->second != ratio->first * areas.second) {
        return std::nullopt;
      }
      if (!ratio) ratio = areas;
    }
  }
  if (!ratio) return std::nullopt;

  ExpectedMetrics e;
  e.oracle = "pixel_area_threshold_sweep";
  double sum = 0.0;
  for (std::size_t k = 0; k < kInstIouPercents.size(); ++k) {
    e.inst_ap_at[k] = ReachesPercent(ratio->first, ratio->second,
                                     kInstIouPercents[k]) ? 1.0 : 0.0;
    sum += e.inst_ap_at[k];
  }
  e.inst_ap = sum / static_cast<double>(kInstIouPercents.size());
  if (!ReachesPercent(ratio->first, ratio->second, 50)) return e;

  long long num_gt = 0;
  long long tp50 = 0;
  long long tp75 = 0;
  for (std::size_t v = 0; v < gts.size(); ++v) {
    for (std::size_t k = 0; k < gts[v].instances.size(); ++k) {
      const auto& gb = gts[v].instances[k].blinks;
      const auto& pb = preds[v].hypotheses[k].blink_intervals;
      if (gb.size() != pb.size()) return std::nullopt;
      num_gt += static_cast<long long>(gb.size());
      for (std::size_t j = 0; j < gb.size(); ++j) {
        const long long inter = std::max(
            0, std::min(gb[j].end, pb[j].end) - std::max(gb[j].start, pb[j].start) + 1);
        const long long uni = gb[j].Length() + pb[j].Length() - inter;
        const double tiou = static_cast<double>(inter) / static_cast<double>(uni);
        if (pb[j].confidence != tiou) return std::nullopt;
        // Neighbouring ground-truth blinks must stay out of reach.
        if (j + 1 < gb.size() && pb[j].end >= gb[j + 1].start) return std::nullopt;
        if (j > 0 && pb[j].start <= gb[j - 1].end) return std::nullopt;
        tp50 += ReachesPercent(inter, uni, 50) ? 1 : 0;
        tp75 += ReachesPercent(inter, uni, 75) ? 1 : 0;
      }
    }
  }
  if (num_gt > 0) {
    e.blink_ap_50 = static_cast<double>(tp50) / static_cast<double>(num_gt);
    e.blink_ap_75 = static_cast<double>(tp75) / static_cast<double>(num_gt);
  }
  return e;
}

PredictionVariant MakeVariant(const char* name, std::vector<VideoPrediction> videos,
                              const std::vector<VideoAnnotation>& gts,
                              bool with_expected) {
  PredictionVariant v;
  v.name = name;
  if (with_expected) v.expected = CorrespondenceOracle(gts, videos);
  v.videos = std::move(videos);
  return v;
}

}  // namespace

const PredictionVariant* SyntheticScenario::FindVariant(
    const std::string& name) const {
  for (const auto& v : variants) {
    if (v.name == name) return &v;
  }
  return nullptr;
}

VideoPrediction PerfectPrediction(const VideoAnnotation& a) {
  VideoPrediction p = EmptyPrediction(a);
  for (const InstanceTrack& track : a.instances) {
    p.hypotheses.push_back(PerfectHypothesis(track, a.num_frames));
  }
  return p;
}

SyntheticScenario GenerateScenario(const SyntheticOptions& options,
                                   std::uint64_t seed) {
  Rng rng(seed);
  SyntheticScenario s;
  s.seed = seed;
  std::vector<std::vector<int>> slots_per_video;
  for (int v = 0; v < options.num_videos; ++v) {
    VideoAnnotation a;
    char id[32];
    std::snprintf(id, sizeof(id), "video_%03d", v);
    a.video_id = id;
    a.num_frames = rng.Int(options.min_frames, options.max_frames);
    a.fps = options.fps;
    a.width = kSyntheticWidth;
    a.height = kSyntheticHeight;

    std::vector<int> slots(kSyntheticSlots);
    for (int i = 0; i < kSyntheticSlots; ++i) slots[i] = i;
    for (int i = kSyntheticSlots - 1; i > 0; --i) std::swap(slots[i], slots[rng.Int(0, i)]);
    slots.resize(rng.Int(options.min_instances, options.max_instances));

    for (std::size_t k = 0; k < slots.size(); ++k) {
      const bool force = v == 0 && k == 0;
      a.instances.push_back(DrawInstance(rng, slots[k], a.num_frames, a.fps, force));
    }
    s.annotations.push_back(std::move(a));
    slots_per_video.push_back(std::move(slots));
  }

  std::vector<VideoPrediction> perfect, shrink, shifted, noisy;
  for (std::size_t v = 0; v < s.annotations.size(); ++v) {
    const VideoAnnotation& a = s.annotations[v];
    perfect.push_back(PerfectPrediction(a));
    shrink.push_back(ShrinkPrediction(a));
    shifted.push_back(BlinkShiftPrediction(a));
    noisy.push_back(NoisyPrediction(rng, a, slots_per_video[v], options.noise));
  }
  s.variants.push_back(MakeVariant(kVariantPerfect, std::move(perfect),
                                   s.annotations, true));
  s.variants.push_back(MakeVariant(kVariantShrink, std::move(shrink),
                                   s.annotations, true));
  s.variants.push_back(MakeVariant(kVariantBlinkShift, std::move(shifted),
                                   s.annotations, true));
  s.variants.push_back(MakeVariant(kVariantNoisy, std::move(noisy), s.annotations,
                                   options.noise == 0.0));
  return s;
}

TensorFile SyntheticFeatures(const VideoAnnotation& a, int channels, int height,
                             int width, std::uint64_t seed) {
  if (channels < 1 || height < 1 || width < 1) {
    throw std::invalid_argument("SyntheticFeatures: dimensions must be >= 1");
  }
  Rng rng(seed);
  const int frames = a.num_frames;
  std::vector<double> values(static_cast<std::size_t>(frames) * channels *
                             height * width);
  for (double& x : values) x = 0.05 * (rng.Uniform() - 0.5);

  auto index = [&](int t, int c, int y, int x) {
    return ((static_cast<std::size_t>(t) * channels + c) * height + y) * width + x;
  };
  for (std::size_t k = 0; k < a.instances.size(); ++k) {
    const InstanceTrack& track = a.instances[k];
    const auto labels = BlinkFrameLabels(track, frames);
    for (int t = 0; t < frames; ++t) {
      if (!track.boxes[t]) continue;
      const FrameBox& b = *track.boxes[t];
      const double eye = labels[t] ? 0.25 : 1.0;
      for (int y = 0; y < height; ++y) {
        const double cy = (y + 0.5) / height;
        if (cy < b.y1 || cy > b.y2) continue;
        for (int x = 0; x < width; ++x) {
          const double cx = (x + 0.5) / width;
          if (cx < b.x1 || cx > b.x2) continue;
          for (int c = 0; c < channels; ++c) {
            const double signature = std::sin(1.3 * (c + 1) * (k + 1));
            values[index(t, c, y, x)] += c % 2 == 0 ? signature : eye * signature;
          }
        }
      }
    }
  }

  TensorFile file;
  file.metadata["kind"] = "features";
  file.metadata["video_id"] = a.video_id;
  file.metadata["width"] = std::to_string(a.width);
  file.metadata["height"] = std::to_string(a.height);
  file.metadata["fps"] = std::to_string(a.fps);
  file.metadata["num_frames"] = std::to_string(frames);
  file.arrays.push_back(NamedArray{"features", {frames, channels, height, width},
                                   std::move(values)});
  return file;
}

FeatureFile FeatureFromTensorFile(const TensorFile& file) {
  if (file.RequireMeta("kind") != "features") {
    throw DataError("metadata.kind", "expected \"features\"");
  }
  auto to_int = [&](const char* key) {
    const std::string& s = file.RequireMeta(key);
    try {
      std::size_t used = 0;
      const int v = std::stoi(s, &used);
      if (used != s.size() || v <= 0) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw DataError(std::string("metadata.") + key,
                      "expected a positive integer, got \"" + s + "\"");
    }
  };
  FeatureFile out;
  out.video_id = file.RequireMeta("video_id");
  out.width = to_int("width");
  out.height = to_int("height");
  const int frames = to_int("num_frames");

  const NamedArray* a = file.Find("features");
  if (a == nullptr) throw DataError("features", "missing array");
  if (a->shape.size() != 4 || a->shape[0] != frames) {
    throw DataError("features", "expected shape [num_frames, C, H, W]");
  }
  for (double x : a->values) {
    if (!std::isfinite(x)) throw DataError("features", "non-finite value");
  }
  out.feature = VideoFeature(frames, static_cast<int>(a->shape[1]),
                             static_cast<int>(a->shape[2]),
                             static_cast<int>(a->shape[3]), a->values);
  return out;
}

}  // namespace blinkscope
