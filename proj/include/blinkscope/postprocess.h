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

#ifndef BLINKSCOPE_POSTPROCESS_H_
#define BLINKSCOPE_POSTPROCESS_H_

#include <span>
#include <string>
#include <vector>

#include "blinkscope/annotation.h"
#include "blinkscope/netcore.h"

namespace blinkscope {

inline constexpr double kDefaultBlinkThreshold = 0.3;
inline constexpr double kDefaultLinkIouThreshold = 0.5;

// Maximal runs of frames with score strictly above `threshold`, each with
// the run's mean score as confidence. Throws std::invalid_argument unless
// threshold is in (0, 1).
std::vector<BlinkInterval> MergeBlinks(std::span<const double> scores,
                                       double threshold = kDefaultBlinkThreshold);

// Hypotheses of one clip, frames indexed from clip_start.
struct ClipPrediction {
  std::string video_id;
  int clip_start = 0;
  int length = 0;
  std::vector<InstancePrediction> hypotheses;
};

// Converts the last iteration of a forward pass into clip hypotheses ranked
// by mean face score (stable: ties keep query order), keeping the first
// keep_top. Throws std::invalid_argument if keep_top < 1.
ClipPrediction Finalize(const ModelOutput& out, int clip_start, int keep_top,
                        double blink_threshold = kDefaultBlinkThreshold);

// Frame ranges [start, start + length) covering num_frames with the given
// clip length and stride; the last clip is truncated at the video end.
struct ClipRange {
  int start = 0;
  int length = 0;
};
std::vector<ClipRange> PlanClips(int num_frames, int clip_length, int stride);

// Mean per-frame box IoU over the frames both hypotheses cover. Frames where
// either box is absent count as IoU 0.
double OverlapIou(const ClipPrediction& a, int ha, const ClipPrediction& b,
                  int hb);

// Stitches adjacent overlapping clips into whole-video hypotheses. Pairs of
// hypotheses in adjacent clips are linked greedily by descending OverlapIou
// (ties: lower index in the earlier clip, then in the later clip), one to
// one, only when the IoU exceeds iou_threshold. Scores and boxes are averaged
// on frames covered by two clips; blinks are re-merged on the stitched
// scores. Throws DataError on mixed video ids or non-overlapping neighbours.
VideoPrediction LinkClips(std::span<const ClipPrediction> clips,
                          double iou_threshold = kDefaultLinkIouThreshold,
                          double blink_threshold = kDefaultBlinkThreshold);

}  // namespace blinkscope

#endif  // BLINKSCOPE_POSTPROCESS_H_
