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

#ifndef BLINKSCOPE_SYNTHETIC_H_
#define BLINKSCOPE_SYNTHETIC_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "blinkscope/annotation.h"
#include "blinkscope/config.h"
#include "blinkscope/metrics.h"
#include "blinkscope/tensor_file.h"

namespace blinkscope {

// Synthetic videos are 1024 x 512 pixels and split into eight 128-pixel
// columns, one per instance, so instances never overlap. All box corners
// are integer pixels, which makes normalized coordinates exact binary
// fractions: areas, IoUs and JSON round trips carry no rounding error.
inline constexpr int kSyntheticWidth = 1024;
inline constexpr int kSyntheticHeight = 512;
inline constexpr int kSyntheticSlots = 8;
inline constexpr int kSyntheticSlotWidth = kSyntheticWidth / kSyntheticSlots;
inline constexpr int kSyntheticBoxWidth = 80;
inline constexpr int kSyntheticBoxHeight = 96;
// Shrunk boxes keep the height and are centred inside the original, so every
// frame has IoU 48 / 80 = 0.6.
inline constexpr int kSyntheticShrunkWidth = 48;

struct ExpectedMetrics {
  std::string oracle;  // identifies how the values were derived
  double inst_ap = 0.0;
  std::array<double, kInstIouPercents.size()> inst_ap_at{};
  double blink_ap_50 = 0.0;
  double blink_ap_75 = 0.0;
};

struct PredictionVariant {
  std::string name;
  std::vector<VideoPrediction> videos;
  std::optional<ExpectedMetrics> expected;
};

struct SyntheticScenario {
  std::uint64_t seed = 0;
  std::vector<VideoAnnotation> annotations;
  std::vector<PredictionVariant> variants;

  const PredictionVariant* FindVariant(const std::string& name) const;
};

// Variant names.
inline constexpr char kVariantPerfect[] = "perfect";
inline constexpr char kVariantShrink[] = "shrink_iou_0.6";
inline constexpr char kVariantBlinkShift[] = "blink_shift";
inline constexpr char kVariantNoisy[] = "noisy";

// Deterministic in (options, seed). Each video has 1-8 instances with entry
// and exit gaps, occasional occlusions and blinks of 0.2-0.4 s, some of them
// back to back with a single open frame in between. Variants:
//   perfect         predictions equal to the ground truth
//   shrink_iou_0.6  every box narrowed to 48 px: tube IoU exactly 0.6
//   blink_shift     perfect tubes, every blink delayed by one frame
//   noisy           jittered boxes and scores, dropped instances, false
//                   positives and duplicates; expected values are only
//                   attached when options.noise is 0
SyntheticScenario GenerateScenario(const SyntheticOptions& options,
                                   std::uint64_t seed);

// The ground truth as a prediction: face score 1 on visible frames and 0
// elsewhere, blink score 1 inside blinks and 0 elsewhere.
VideoPrediction PerfectPrediction(const VideoAnnotation& a);

// T x C x H x W feature tensor with a per-instance channel signature painted
// under each visible face box on a low-amplitude noise floor. Metadata holds
// kind=features, video_id, width, height, fps and num_frames.
TensorFile SyntheticFeatures(const VideoAnnotation& a, int channels, int height,
                             int width, std::uint64_t seed);

// Reads a feature file back; throws DataError on missing metadata or an
// inconsistent shape.
struct FeatureFile {
  std::string video_id;
  int width = 0;
  int height = 0;
  VideoFeature feature;
};
FeatureFile FeatureFromTensorFile(const TensorFile& file);

}  // namespace blinkscope

#endif  // BLINKSCOPE_SYNTHETIC_H_
