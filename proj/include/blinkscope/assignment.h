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

#ifndef BLINKSCOPE_ASSIGNMENT_H_
#define BLINKSCOPE_ASSIGNMENT_H_

#include <span>
#include <utility>
#include <vector>

#include "blinkscope/annotation.h"
#include "blinkscope/losses.h"

namespace blinkscope {

// Dense row-major cost matrix; rows are predictions, columns ground truths.
class CostMatrix {
 public:
  CostMatrix(int rows, int cols, double fill = 0.0);
  CostMatrix(int rows, int cols, std::vector<double> values);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double& at(int r, int c) { return values_[r * cols_ + c]; }
  double at(int r, int c) const { return values_[r * cols_ + c]; }
  std::span<const double> values() const { return values_; }

 private:
  int rows_;
  int cols_;
  std::vector<double> values_;
};

struct Assignment {
  // (prediction, ground truth), sorted by prediction index.
  std::vector<std::pair<int, int>> pairs;
  double total_cost = 0.0;
  std::vector<int> unmatched_predictions;
  std::vector<int> unmatched_ground_truths;
};

// Exact minimum-cost one-to-one assignment (shortest augmenting path with
// potentials, O(n^3)). Rectangular inputs are padded to square with a
// constant larger than every entry; padded pairs are reported as unmatched.
// total_cost sums the chosen real entries in prediction order.
// Throws std::invalid_argument on an empty matrix or non-finite entries.
Assignment Hungarian(const CostMatrix& cost);

// Matching cost between one hypothesis and one ground-truth track.
double MatchingCost(const InstancePrediction& pred, const InstanceTrack& gt,
                    const LossWeights& w);

Assignment MatchInstances(std::span<const InstancePrediction> preds,
                          std::span<const InstanceTrack> gts,
                          const LossWeights& w);

struct SetLoss {
  Assignment assignment;
  std::vector<LossBreakdown> matched;  // parallel to assignment.pairs
  double unmatched = 0.0;
  double total = 0.0;
};

// Training objective for one clip: match, then sum matched instance losses
// and the no-face loss of every unmatched prediction.
SetLoss ComputeSetLoss(std::span<const InstancePrediction> preds,
                       std::span<const InstanceTrack> gts,
                       const LossWeights& w);

}  // namespace blinkscope

#endif  // BLINKSCOPE_ASSIGNMENT_H_
