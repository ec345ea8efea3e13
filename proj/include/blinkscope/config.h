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

#ifndef BLINKSCOPE_CONFIG_H_
#define BLINKSCOPE_CONFIG_H_

#include <cstdint>

#include "blinkscope/losses.h"
#include "blinkscope/netcore.h"

namespace blinkscope {

struct InferenceOptions {
  int clip_length = 36;
  int stride = 18;
  double blink_threshold = 0.3;
  double link_iou_threshold = 0.5;
  int keep_top = 50;
};

struct SyntheticOptions {
  int num_videos = 3;
  int min_frames = 60;
  int max_frames = 120;
  double fps = 30.0;
  int min_instances = 1;
  int max_instances = 8;
  // Scales every perturbation of the "noisy" prediction variant; 0 makes it
  // an exact copy of the ground truth.
  double noise = 1.0;
  int feature_height = 8;
  int feature_width = 8;
};

struct Config {
  NetConfig model;
  InferenceOptions inference;
  LossWeights loss;
  SyntheticOptions synthetic;
  std::uint64_t seed = 0;

  // Throws std::invalid_argument naming the first out-of-range field.
  void Validate() const;
};

}  // namespace blinkscope

#endif  // BLINKSCOPE_CONFIG_H_
