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

#ifndef BLINKSCOPE_ANNOTATION_H_
#define BLINKSCOPE_ANNOTATION_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace blinkscope {

// Axis-aligned box in corner form. Files carry absolute pixels; every
// in-memory box is normalized to [0,1] by the frame width/height.
struct FrameBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double Width() const { return x2 - x1; }
  double Height() const { return y2 - y1; }
  double Area() const { return Width() * Height(); }
  bool IsValid() const;

  friend bool operator==(const FrameBox&, const FrameBox&) = default;
};

// Closed frame interval [start, end], 0-based. Ground-truth intervals carry
// confidence 1.
struct BlinkInterval {
  int start = 0;
  int end = 0;
  double confidence = 1.0;

  int Length() const { return end - start + 1; }

  friend bool operator==(const BlinkInterval&, const BlinkInterval&) = default;
};

using Tube = std::vector<std::optional<FrameBox>>;

// One ground-truth person: per-frame face visibility, boxes where visible,
// and the blink events of that person.
struct InstanceTrack {
  std::vector<std::uint8_t> presence;
  Tube boxes;
  std::vector<BlinkInterval> blinks;

  int NumFrames() const { return static_cast<int>(presence.size()); }
  int NumVisible() const;

  friend bool operator==(const InstanceTrack&, const InstanceTrack&) = default;
};

struct VideoAnnotation {
  std::string video_id;
  int num_frames = 0;
  double fps = 30.0;
  int width = 0;
  int height = 0;
  std::vector<InstanceTrack> instances;

  friend bool operator==(const VideoAnnotation&,
                         const VideoAnnotation&) = default;
};

// One instance hypothesis. Boxes are optional per frame: clip linking pads
// frames outside a hypothesis' clips with absent boxes, and serialized
// predictions drop boxes whose face score is below 0.5.
struct InstancePrediction {
  std::vector<double> face_scores;
  Tube boxes;
  std::vector<double> blink_scores;
  std::vector<BlinkInterval> blink_intervals;
  double confidence = 0.0;

  int NumFrames() const { return static_cast<int>(face_scores.size()); }

  friend bool operator==(const InstancePrediction&,
                         const InstancePrediction&) = default;
};

struct VideoPrediction {
  std::string video_id;
  int num_frames = 0;
  int width = 0;
  int height = 0;
  std::vector<InstancePrediction> hypotheses;

  friend bool operator==(const VideoPrediction&,
                         const VideoPrediction&) = default;
};

struct Violation {
  int instance = -1;  // -1 when the rule concerns the whole video
  int frame = -1;     // -1 when no single frame is at fault
  int interval = -1;  // blink interval index for interval rules
  std::string rule;
  std::string detail;
};

std::string ToString(const Violation& v);

// Rule names used in violations.
inline constexpr char kRuleFrameCount[] = "num_frames > 0";
inline constexpr char kRuleFps[] = "fps > 0";
inline constexpr char kRuleResolution[] = "width, height > 0";
inline constexpr char kRuleSequenceLength[] = "sequence length = T";
inline constexpr char kRuleBoxPresence[] = "box/presence mismatch";
inline constexpr char kRuleBoxOrder[] = "x2 >= x1, y2 >= y1";
inline constexpr char kRuleIntervalOrder[] = "start <= end";
inline constexpr char kRuleIntervalRange[] = "interval within [0, T-1]";
inline constexpr char kRuleIntervalSorted[] = "intervals sorted, disjoint";
inline constexpr char kRuleScoreRange[] = "score in [0,1]";
inline constexpr char kRuleConfidence[] = "confidence = mean face score";

std::vector<Violation> ValidateAnnotation(const VideoAnnotation& a);
std::vector<Violation> ValidatePrediction(const VideoPrediction& p);

// Interval checks shared by annotations and predictions.
void ValidateIntervals(std::span<const BlinkInterval> intervals, int num_frames,
                       int instance, std::vector<Violation>* out);

// b_t = 1 iff frame t lies inside one of the intervals.
std::vector<std::uint8_t> BlinkFrameLabels(
    std::span<const BlinkInterval> intervals, int num_frames);
inline std::vector<std::uint8_t> BlinkFrameLabels(const InstanceTrack& track,
                                                  int num_frames) {
  return BlinkFrameLabels(track.blinks, num_frames);
}

// Ranking score of a hypothesis: arithmetic mean of its face scores.
double MeanScore(std::span<const double> scores);

}  // namespace blinkscope

#endif  // BLINKSCOPE_ANNOTATION_H_
