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

#ifndef BLINKSCOPE_METRICS_H_
#define BLINKSCOPE_METRICS_H_

#include <array>
#include <span>
#include <string>
#include <vector>

#include "blinkscope/annotation.h"

namespace blinkscope {

// Instance-level evaluation: Inst-AP ranks whole-video face tubes by
// confidence and matches them to ground-truth tubes by volumetric 3D IoU;
// Blink-AP ranks the blink intervals of the instances that were true
// positives at 3D IoU 0.50 and matches them by temporal IoU within the
// matched ground-truth instance. Detections are pooled across videos, ties
// in confidence are broken by video_id and then hypothesis index, and
// ground-truth instances with no visible frame are ignored.

struct Detection {
  double confidence = 0.0;
  bool is_tp = false;
};

struct ApResult {
  double ap = 0.0;
  bool undefined = false;  // num_gt == 0; ap is reported as 0
};

// All-point interpolated AP: detections are stably sorted by descending
// confidence, precision is replaced by its running maximum from the right,
// and AP sums delta-recall x envelope precision.
// Throws std::invalid_argument if num_gt < 0.
ApResult AveragePrecision(std::span<const Detection> detections, int num_gt);

// IoU thresholds 0.50:0.05:0.95, kept as integer percents so that e.g. 0.60
// is exactly the double nearest to 0.6.
inline constexpr std::array<int, 10> kInstIouPercents = {50, 55, 60, 65, 70,
                                                         75, 80, 85, 90, 95};
inline double PercentToThreshold(int percent) { return percent / 100.0; }

struct TpMatch {
  int video = 0;       // index into the ground-truth list
  int hypothesis = 0;  // index into that video's hypotheses
  int instance = 0;    // matched ground-truth instance
  double iou = 0.0;
};

struct InstApResult {
  double mean_ap = 0.0;
  std::array<double, kInstIouPercents.size()> ap_at{};
  std::vector<TpMatch> tp_at_50;  // sorted by (video, hypothesis)
  int num_gt = 0;
  bool undefined = false;
};

// Throws DataError if a prediction names an unknown or duplicate video, or
// disagrees with its ground truth on the frame count.
InstApResult InstAp(std::span<const VideoAnnotation> gts,
                    std::span<const VideoPrediction> preds);

struct BlinkApResult {
  double ap = 0.0;
  bool undefined = false;
  int num_gt = 0;
  int num_detections = 0;
};

// `preds` must be aligned with `gts` (AlignPredictions), as InstAp uses.
BlinkApResult BlinkAp(std::span<const VideoAnnotation> gts,
                      std::span<const VideoPrediction> aligned_preds,
                      std::span<const TpMatch> tp_matches,
                      double tiou_threshold);

// Reorders predictions to follow gts; videos without predictions get an
// empty hypothesis list.
std::vector<VideoPrediction> AlignPredictions(
    std::span<const VideoAnnotation> gts, std::span<const VideoPrediction> preds);

struct VideoDiagnostics {
  std::string video_id;
  int num_gt_instances = 0;
  int num_hypotheses = 0;
  int num_tp_at_50 = 0;
  int num_gt_blinks_matched = 0;
  int num_pred_blinks_matched = 0;
};

struct EvalReport {
  double inst_ap = 0.0;
  std::array<double, kInstIouPercents.size()> inst_ap_at{};
  double blink_ap_50 = 0.0;
  double blink_ap_75 = 0.0;
  std::vector<VideoDiagnostics> per_video;
  std::vector<std::string> diagnostics;

  double InstApAt(int percent) const;
};

EvalReport Evaluate(std::span<const VideoAnnotation> gts,
                    std::span<const VideoPrediction> preds);

}  // namespace blinkscope

#endif  // BLINKSCOPE_METRICS_H_
