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

#include "blinkscope/losses.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "blinkscope/geometry.h"

namespace blinkscope {

namespace {

void CheckLengths(const InstancePrediction& pred, int num_frames) {
  if (pred.NumFrames() != num_frames ||
      static_cast<int>(pred.boxes.size()) != num_frames ||
      static_cast<int>(pred.blink_scores.size()) != num_frames) {
    throw std::invalid_argument("prediction and ground truth differ in length");
  }
}

double RelativeError(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / scale;
}

}  // namespace

ScalarLoss FocalLoss(double p, int y, double alpha, double gamma) {
  const double pc = std::clamp(p, kScoreEps, 1.0 - kScoreEps);
  const bool clamped = pc != p;
  ScalarLoss out;
  if (y != 0) {
    const double q = 1.0 - pc;
    const double log_p = std::log(pc);
    out.loss = -alpha * std::pow(q, gamma) * log_p;
    out.grad = alpha * gamma * std::pow(q, gamma - 1.0) * log_p -
               alpha * std::pow(q, gamma) / pc;
  } else {
    const double q = 1.0 - pc;
    const double log_q = std::log(q);
    out.loss = -(1.0 - alpha) * std::pow(pc, gamma) * log_q;
    out.grad = -(1.0 - alpha) * (gamma * std::pow(pc, gamma - 1.0) * log_q -
                                 std::pow(pc, gamma) / q);
  }
  if (clamped) out.grad = 0.0;
  return out;
}

BoxLoss GiouLoss(const FrameBox& pred, const FrameBox& gt) {
  if (!(gt.Area() > 0.0)) {
    throw std::invalid_argument("GiouLoss: degenerate ground-truth box");
  }
  // Index order of all gradient arrays: x1, y1, x2, y2.
  const double pw = pred.x2 - pred.x1;
  const double ph = pred.y2 - pred.y1;
  const double area_p = pw * ph;
  const std::array<double, 4> d_area_p{-ph, -pw, ph, pw};

  const double iw = std::min(pred.x2, gt.x2) - std::max(pred.x1, gt.x1);
  const double ih = std::min(pred.y2, gt.y2) - std::max(pred.y1, gt.y1);
  double inter = 0.0;
  std::array<double, 4> d_inter{};
  if (iw > 0.0 && ih > 0.0) {
    inter = iw * ih;
    d_inter[0] = pred.x1 > gt.x1 ? -ih : 0.0;
    d_inter[1] = pred.y1 > gt.y1 ? -iw : 0.0;
    d_inter[2] = pred.x2 < gt.x2 ? ih : 0.0;
    d_inter[3] = pred.y2 < gt.y2 ? iw : 0.0;
  }

  const double ew = std::max(pred.x2, gt.x2) - std::min(pred.x1, gt.x1);
  const double eh = std::max(pred.y2, gt.y2) - std::min(pred.y1, gt.y1);
  const double enclosing = ew * eh;
  const std::array<double, 4> d_enclosing{
      pred.x1 < gt.x1 ? -eh : 0.0, pred.y1 < gt.y1 ? -ew : 0.0,
      pred.x2 > gt.x2 ? eh : 0.0, pred.y2 > gt.y2 ? ew : 0.0};

  const double uni = area_p + gt.Area() - inter;
  // giou = I/U - 1 + U/E
  BoxLoss out;
  out.loss = 1.0 - (inter / uni - 1.0 + uni / enclosing);
  for (int k = 0; k < 4; ++k) {
    const double d_uni = d_area_p[k] - d_inter[k];
    const double d_giou = (d_inter[k] * uni - inter * d_uni) / (uni * uni) +
                          (d_uni * enclosing - uni * d_enclosing[k]) /
                              (enclosing * enclosing);
    out.grad[k] = -d_giou;
  }
  return out;
}

double L1BoxDistance(const FrameBox& a, const FrameBox& b) {
  return (std::abs(a.x1 - b.x1) + std::abs(a.y1 - b.y1) +
          std::abs(a.x2 - b.x2) + std::abs(a.y2 - b.y2)) /
         4.0;
}

LossBreakdown FaceLoss(const InstancePrediction& pred, const InstanceTrack& gt,
                       const LossWeights& w) {
  const int num_frames = gt.NumFrames();
  CheckLengths(pred, num_frames);
  LossBreakdown out;
  out.lambda = w.blink_lambda;
  for (int t = 0; t < num_frames; ++t) {
    const int visible = gt.presence[t] != 0 ? 1 : 0;
    out.face_cls += w.cls * FocalLoss(pred.face_scores[t], visible,
                                      w.focal_alpha, w.focal_gamma)
                                .loss;
    if (!visible) continue;
    if (!pred.boxes[t]) {
      // Absent box: charge the largest value either term can take.
      out.face_box += w.l1 * 1.0 + w.giou * 2.0;
      continue;
    }
    const FrameBox& p = *pred.boxes[t];
    const FrameBox& g = *gt.boxes[t];
    out.face_box +=
        w.l1 * L1BoxDistance(p, g) + w.giou * (1.0 - BoxGiou(p, g));
  }
  out.total = out.face_cls + out.face_box;
  return out;
}

LossBreakdown InstanceLosses(const InstancePrediction& pred,
                             const InstanceTrack& gt, const LossWeights& w) {
  LossBreakdown out = FaceLoss(pred, gt, w);
  const int num_frames = gt.NumFrames();
  const std::vector<std::uint8_t> labels = BlinkFrameLabels(gt, num_frames);
  for (int t = 0; t < num_frames; ++t) {
    out.blink += FocalLoss(pred.blink_scores[t], labels[t], w.focal_alpha,
                           w.focal_gamma)
                     .loss;
  }
  out.total = out.face_cls + out.face_box + out.lambda * out.blink;
  return out;
}

double UnmatchedLoss(const InstancePrediction& pred, const LossWeights& w) {
  double sum = 0.0;
  for (double c : pred.face_scores) {
    sum += FocalLoss(c, 0, w.focal_alpha, w.focal_gamma).loss;
  }
  return sum;
}

GradCheckReport RunGradientCheck(std::uint64_t seed, int samples, double step,
                                 double tolerance) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  GradCheckReport report;
  report.samples = samples;

  for (int s = 0; s < samples; ++s) {
    const double p = uniform(0.02, 0.98);
    const int y = unit(rng) < 0.5 ? 0 : 1;
    const double alpha = uniform(0.05, 0.95);
    const double gamma = uniform(0.0, 3.0);
    const double analytic = FocalLoss(p, y, alpha, gamma).grad;
    const double numeric = (FocalLoss(p + step, y, alpha, gamma).loss -
                            FocalLoss(p - step, y, alpha, gamma).loss) /
                           (2.0 * step);
    const double err = RelativeError(analytic, numeric);
    report.max_focal_rel_error = std::max(report.max_focal_rel_error, err);
    if (!(err < tolerance)) ++report.focal_failures;
  }

  constexpr double kKinkMargin = 1e-3;
  auto random_box = [&]() {
    FrameBox b;
    b.x1 = uniform(0.0, 0.7);
    b.y1 = uniform(0.0, 0.7);
    b.x2 = b.x1 + uniform(0.05, 0.3);
    b.y2 = b.y1 + uniform(0.05, 0.3);
    return b;
  };
  int accepted = 0;
  while (accepted < samples) {
    const FrameBox gt = random_box();
    const FrameBox pred = random_box();
    const double iw = std::min(pred.x2, gt.x2) - std::max(pred.x1, gt.x1);
    const double ih = std::min(pred.y2, gt.y2) - std::max(pred.y1, gt.y1);
    if (std::min({std::abs(pred.x1 - gt.x1), std::abs(pred.y1 - gt.y1),
                  std::abs(pred.x2 - gt.x2), std::abs(pred.y2 - gt.y2),
                  std::abs(iw), std::abs(ih)}) < kKinkMargin) {
      continue;
    }
    ++accepted;
    const BoxLoss analytic = GiouLoss(pred, gt);
    for (int k = 0; k < 4; ++k) {
      FrameBox plus = pred;
      FrameBox minus = pred;
      double* plus_coord[] = {&plus.x1, &plus.y1, &plus.x2, &plus.y2};
      double* minus_coord[] = {&minus.x1, &minus.y1, &minus.x2, &minus.y2};
      *plus_coord[k] += step;
      *minus_coord[k] -= step;
      const double numeric =
          (GiouLoss(plus, gt).loss - GiouLoss(minus, gt).loss) / (2.0 * step);
      const double err = RelativeError(analytic.grad[k], numeric);
      report.max_giou_rel_error = std::max(report.max_giou_rel_error, err);
      if (!(err < tolerance)) ++report.giou_failures;
    }
  }
  return report;
}

}  // namespace blinkscope
