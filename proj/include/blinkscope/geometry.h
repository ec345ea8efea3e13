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

#ifndef BLINKSCOPE_GEOMETRY_H_
#define BLINKSCOPE_GEOMETRY_H_

#include <optional>
#include <span>

#include "blinkscope/annotation.h"

namespace blinkscope {

// Spatial and temporal overlap measures. None of these return NaN: an empty
// union (or empty enclosing box) yields 0.

double IntersectionArea(const FrameBox& a, const FrameBox& b);

// Intersection over union; 0 when the union area is 0.
double BoxIou(const FrameBox& a, const FrameBox& b);

// Generalized IoU: IoU - (enclosing - union) / enclosing, in [-1, 1].
double BoxGiou(const FrameBox& a, const FrameBox& b);

// Frame-set IoU of two closed integer intervals.
double IntervalTiou(const BlinkInterval& a, const BlinkInterval& b);

// Two tubes over the same frames; a frame's box is absent when the face is
// not visible (or not predicted) there.
struct TubePair {
  std::span<const std::optional<FrameBox>> pred;
  std::span<const std::optional<FrameBox>> gt;
};

// Volumetric tube IoU: sum of per-frame intersection areas over sum of
// per-frame union areas. A frame where only one side is present adds that
// box's area to the union. Throws std::invalid_argument on length mismatch.
double TubeIou(const TubePair& p);
inline double TubeIou(std::span<const std::optional<FrameBox>> pred,
                      std::span<const std::optional<FrameBox>> gt) {
  return TubeIou(TubePair{pred, gt});
}

}  // namespace blinkscope

#endif  // BLINKSCOPE_GEOMETRY_H_
