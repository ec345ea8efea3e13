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

#ifndef BLINKSCOPE_LOSSES_H_
#define BLINKSCOPE_LOSSES_H_

#include <array>
#include <cstdint>

#include "blinkscope/annotation.h"

namespace blinkscope {

// Weights shared by the matching cost and the training loss.
struct LossWeights {
  double cls = 2.0;
  double l1 = 5.0;
  double giou = 2.0;
  double blink_lambda = 5.0;
  double focal_alpha = 0.25;
  double focal_gamma = 2.0;
};

// Scores are clamped to [kScoreEps, 1 - kScoreEps] before any logarithm.
inline constexpr double kScoreEps = 1e-7;

struct ScalarLoss {
  double loss = 0.0;
  double grad = 0.0;  // d loss / d p of the clamped function
};

// Binary focal loss of score p against label y (0 or 1).
//   y = 1: -alpha (1-p)^gamma log p
//   y = 0: -(1-alpha) p^gamma log(1-p)
ScalarLoss FocalLoss(double p, int y, double alpha, double gamma);

struct BoxLoss {
  double loss = 0.0;
  std::array<double, 4> grad{};  // w.r.t. pred (x1, y1, x2, y2)
};

// 1 - GIoU(pred, gt) with its analytic gradient. At the measure-zero kinks
// (coinciding edges) the one-sided derivative from the max/min branch taken
// is returned. Throws std::invalid_argument if gt has zero area.
BoxLoss GiouLoss(const FrameBox& pred, const FrameBox& gt);

// Mean absolute difference over the four coordinates.
double L1BoxDistance(const FrameBox& a, const FrameBox& b);

struct LossBreakdown {
  double face_cls = 0.0;
  double face_box = 0.0;
  double blink = 0.0;
  double lambda = 5.0;
  double total = 0.0;
};

// Face classification plus box terms of a matched pair; this is also the
// Hungarian matching cost. Box terms only count on frames where the ground
// truth face is visible, and the prediction must carry a box there.
LossBreakdown FaceLoss(const InstancePrediction& pred, const InstanceTrack& gt,
                       const LossWeights& w);

// Full loss of a matched pair: face terms + lambda * blink focal terms, with
// blink labels derived from the ground-truth intervals.
LossBreakdown InstanceLosses(const InstancePrediction& pred,
                             const InstanceTrack& gt, const LossWeights& w);

// Loss of a prediction left unmatched: sum_t focal(c_t, 0).
double UnmatchedLoss(const InstancePrediction& pred, const LossWeights& w);

struct GradCheckReport {
  int samples = 0;
  double max_focal_rel_error = 0.0;
  double max_giou_rel_error = 0.0;
  int focal_failures = 0;
  int giou_failures = 0;

  bool ok() const { return focal_failures == 0 && giou_failures == 0; }
};

// Compares the analytic focal/GIoU gradients with central differences on
// `samples` random points each, away from clamps and kinks.
GradCheckReport RunGradientCheck(std::uint64_t seed, int samples,
                                 double step = 1e-5, double tolerance = 1e-4);

}  // namespace blinkscope

#endif  // BLINKSCOPE_LOSSES_H_
