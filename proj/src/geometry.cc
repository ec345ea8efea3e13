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

#include "blinkscope/geometry.h"

#include <algorithm>
#include <stdexcept>

namespace blinkscope {

double IntersectionArea(const FrameBox& a, const FrameBox& b) {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  return iw * ih;
}

double BoxIou(const FrameBox& a, const FrameBox& b) {
  const double inter = IntersectionArea(a, b);
  const double uni = a.Area() + b.Area() - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

double BoxGiou(const FrameBox& a, const FrameBox& b) {
  const double inter = IntersectionArea(a, b);
  const double uni = a.Area() + b.Area() - inter;
  const double enclosing = (std::max(a.x2, b.x2) - std::min(a.x1, b.x1)) *
                           (std::max(a.y2, b.y2) - std::min(a.y1, b.y1));
  const double iou = uni > 0.0 ? inter / uni : 0.0;
  if (enclosing <= 0.0) return iou;
  return iou - (enclosing - uni) / enclosing;
}

double IntervalTiou(const BlinkInterval& a, const BlinkInterval& b) {
  const int inter = std::min(a.end, b.end) - std::max(a.start, b.start) + 1;
  if (inter <= 0) return 0.0;
  const int uni = a.Length() + b.Length() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double TubeIou(const TubePair& p) {
  if (p.pred.size() != p.gt.size()) {
    throw std::invalid_argument("TubeIou: tubes differ in length");
  }
  double inter_sum = 0.0;
  double union_sum = 0.0;
  for (std::size_t t = 0; t < p.pred.size(); ++t) {
    const auto& a = p.pred[t];
    const auto& b = p.gt[t];
    if (a && b) {
      const double inter = IntersectionArea(*a, *b);
      inter_sum += inter;
      union_sum += a->Area() + b->Area() - inter;
    } else if (a) {
      union_sum += a->Area();
    } else if (b) {
      union_sum += b->Area();
    }
  }
  if (union_sum <= 0.0) return 0.0;
  return inter_sum / union_sum;
}

}  // namespace blinkscope
