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

#include "blinkscope/config.h"

#include <stdexcept>
#include <string>

namespace blinkscope {

namespace {

void Require(bool ok, const char* field, const char* rule) {
  if (!ok) throw std::invalid_argument(std::string(field) + ": " + rule);
}

bool OpenUnit(double v) { return v > 0.0 && v < 1.0; }

}  // namespace

void Config::Validate() const {
  model.Validate();

  Require(inference.clip_length >= 2, "inference.clip_length", "must be >= 2");
  Require(inference.stride >= 1 && inference.stride < inference.clip_length,
          "inference.stride", "must be in [1, clip_length)");
  Require(OpenUnit(inference.blink_threshold), "inference.blink_threshold",
          "must be in (0, 1)");
  Require(inference.link_iou_threshold >= 0.0 &&
              inference.link_iou_threshold < 1.0,
          "inference.link_iou_threshold", "must be in [0, 1)");
  Require(inference.keep_top >= 1, "inference.keep_top", "must be >= 1");

  Require(loss.cls >= 0.0, "loss.cls_weight", "must be >= 0");
  Require(loss.l1 >= 0.0, "loss.l1_weight", "must be >= 0");
  Require(loss.giou >= 0.0, "loss.giou_weight", "must be >= 0");
  Require(loss.blink_lambda >= 0.0, "loss.blink_lambda", "must be >= 0");
  Require(OpenUnit(loss.focal_alpha), "loss.focal_alpha", "must be in (0, 1)");
  Require(loss.focal_gamma >= 0.0, "loss.focal_gamma", "must be >= 0");

  const SyntheticOptions& s = synthetic;
  Require(s.num_videos >= 1, "synthetic.num_videos", "must be >= 1");
  Require(s.min_frames >= 30, "synthetic.min_frames", "must be >= 30");
  Require(s.max_frames >= s.min_frames, "synthetic.max_frames",
          "must be >= min_frames");
  Require(s.fps >= 10.0 && s.fps <= 240.0, "synthetic.fps",
          "must be in [10, 240]");
  Require(s.min_instances >= 1, "synthetic.min_instances", "must be >= 1");
  Require(s.max_instances >= s.min_instances && s.max_instances <= 8,
          "synthetic.max_instances", "must be in [min_instances, 8]");
  Require(s.noise >= 0.0 && s.noise <= 1.0, "synthetic.noise",
          "must be in [0, 1]");
  Require(s.feature_height >= 1 && s.feature_width >= 1,
          "synthetic.feature_height/width", "must be >= 1");
}

}  // namespace blinkscope
