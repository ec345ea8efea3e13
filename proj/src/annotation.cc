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

#include "blinkscope/annotation.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace blinkscope {

namespace {

// Confidence may pass through decimal text; allow for the round trip.
constexpr double kConfidenceTolerance = 1e-9;

void Add(std::vector<Violation>* out, int instance, int frame,
         const char* rule, std::string detail = {}) {
  out->push_back(Violation{instance, frame, -1, rule, std::move(detail)});
}

void AddInterval(std::vector<Violation>* out, int instance, int frame,
                 std::size_t interval, const char* rule, std::string detail) {
  out->push_back(Violation{instance, frame, static_cast<int>(interval), rule,
                           std::move(detail)});
}

bool IsFinite(const FrameBox& b) {
  return std::isfinite(b.x1) && std::isfinite(b.y1) && std::isfinite(b.x2) &&
         std::isfinite(b.y2);
}

}  // namespace

bool FrameBox::IsValid() const { return IsFinite(*this) && x2 >= x1 && y2 >= y1; }

int InstanceTrack::NumVisible() const {
  return static_cast<int>(std::count(presence.begin(), presence.end(), 1));
}

std::string ToString(const Violation& v) {
  std::ostringstream os;
  if (v.instance >= 0) os << "instance " << v.instance << ": ";
  if (v.frame >= 0) os << "frame " << v.frame << ": ";
  os << v.rule;
  if (!v.detail.empty()) os << " (" << v.detail << ")";
  return os.str();
}

void ValidateIntervals(std::span<const BlinkInterval> intervals, int num_frames,
                       int instance, std::vector<Violation>* out) {
  for (std::size_t k = 0; k < intervals.size(); ++k) {
    const BlinkInterval& b = intervals[k];
    std::ostringstream detail;
    detail << "interval " << k << " = [" << b.start << ", " << b.end << "]";
    if (b.start > b.end) {
      AddInterval(out, instance, b.start, k, kRuleIntervalOrder, detail.str());
      continue;
    }
    if (b.start < 0 || b.end >= num_frames) {
      AddInterval(out, instance, b.start < 0 ? b.start : b.end, k,
                  kRuleIntervalRange, detail.str());
    }
    if (!(b.confidence >= 0.0 && b.confidence <= 1.0)) {
      AddInterval(out, instance, b.start, k, kRuleScoreRange, detail.str());
    }
    if (k > 0 && intervals[k - 1].start <= intervals[k - 1].end &&
        b.start <= intervals[k - 1].end) {
      AddInterval(out, instance, b.start, k, kRuleIntervalSorted, detail.str());
    }
  }
}

std::vector<Violation> ValidateAnnotation(const VideoAnnotation& a) {
  std::vector<Violation> out;
  if (a.num_frames <= 0) Add(&out, -1, -1, kRuleFrameCount);
  if (!(a.fps > 0.0)) Add(&out, -1, -1, kRuleFps);
  if (a.width <= 0 || a.height <= 0) Add(&out, -1, -1, kRuleResolution);

  for (std::size_t i = 0; i < a.instances.size(); ++i) {
    const InstanceTrack& track = a.instances[i];
    const int inst = static_cast<int>(i);
    if (track.NumFrames() != a.num_frames ||
        static_cast<int>(track.boxes.size()) != a.num_frames) {
      std::ostringstream d;
      d << "presence " << track.presence.size() << ", boxes "
        << track.boxes.size() << ", T " << a.num_frames;
      Add(&out, inst, -1, kRuleSequenceLength, d.str());
    }
    const std::size_t n = std::min(track.presence.size(), track.boxes.size());
    for (std::size_t t = 0; t < n; ++t) {
      const int frame = static_cast<int>(t);
      const bool present = track.presence[t] != 0;
      if (track.presence[t] > 1) {
        Add(&out, inst, frame, kRuleBoxPresence, "presence flag not 0/1");
      }
      if (present != track.boxes[t].has_value()) {
        Add(&out, inst, frame, kRuleBoxPresence);
      } else if (present && !track.boxes[t]->IsValid()) {
        Add(&out, inst, frame, kRuleBoxOrder);
      }
    }
    ValidateIntervals(track.blinks, a.num_frames, inst, &out);
  }
  return out;
}

std::vector<Violation> ValidatePrediction(const VideoPrediction& p) {
  std::vector<Violation> out;
  if (p.num_frames <= 0) Add(&out, -1, -1, kRuleFrameCount);
  if (p.width <= 0 || p.height <= 0) Add(&out, -1, -1, kRuleResolution);

  for (std::size_t i = 0; i < p.hypotheses.size(); ++i) {
    const InstancePrediction& h = p.hypotheses[i];
    const int inst = static_cast<int>(i);
    if (h.NumFrames() != p.num_frames ||
        static_cast<int>(h.boxes.size()) != p.num_frames ||
        static_cast<int>(h.blink_scores.size()) != p.num_frames) {
      Add(&out, inst, -1, kRuleSequenceLength);
      continue;
    }
    for (int t = 0; t < p.num_frames; ++t) {
      if (!(h.face_scores[t] >= 0.0 && h.face_scores[t] <= 1.0)) {
        Add(&out, inst, t, kRuleScoreRange, "face score");
      }
      if (!(h.blink_scores[t] >= 0.0 && h.blink_scores[t] <= 1.0)) {
        Add(&out, inst, t, kRuleScoreRange, "blink score");
      }
      if (h.boxes[t] && !h.boxes[t]->IsValid()) {
        Add(&out, inst, t, kRuleBoxOrder);
      }
    }
    ValidateIntervals(h.blink_intervals, p.num_frames, inst, &out);
    if (std::abs(h.confidence - MeanScore(h.face_scores)) >
        kConfidenceTolerance) {
      Add(&out, inst, -1, kRuleConfidence);
    }
  }
  return out;
}

std::vector<std::uint8_t> BlinkFrameLabels(
    std::span<const BlinkInterval> intervals, int num_frames) {
  std::vector<std::uint8_t> labels(std::max(num_frames, 0), 0);
  for (const BlinkInterval& b : intervals) {
    const int lo = std::max(b.start, 0);
    const int hi = std::min(b.end, num_frames - 1);
    for (int t = lo; t <= hi; ++t) labels[t] = 1;
  }
  return labels;
}

double MeanScore(std::span<const double> scores) {
  if (scores.empty()) return 0.0;
  return std::accumulate(scores.begin(), scores.end(), 0.0) /
         static_cast<double>(scores.size());
}

}  // namespace blinkscope
