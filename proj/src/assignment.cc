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

#include "blinkscope/assignment.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace blinkscope {

CostMatrix::CostMatrix(int rows, int cols, double fill)
    : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) {
    throw std::invalid_argument("CostMatrix: negative dimension");
  }
  values_.assign(static_cast<std::size_t>(rows) * cols, fill);
}

CostMatrix::CostMatrix(int rows, int cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (rows < 0 || cols < 0 ||
      values_.size() != static_cast<std::size_t>(rows) * cols) {
    throw std::invalid_argument("CostMatrix: size does not match shape");
  }
}

Assignment Hungarian(const CostMatrix& cost) {
  if (cost.rows() == 0 || cost.cols() == 0) {
    throw std::invalid_argument("Hungarian: empty cost matrix");
  }
  double max_entry = -std::numeric_limits<double>::infinity();
  for (double v : cost.values()) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("Hungarian: non-finite cost entry");
    }
    max_entry = std::max(max_entry, v);
  }
  const double pad = max_entry + 1.0;
  const int n = std::max(cost.rows(), cost.cols());
  auto entry = [&](int r, int c) {
    return r < cost.rows() && c < cost.cols() ? cost.at(r, c) : pad;
  };

  // 1-based potentials; column 0 is the virtual root of each search.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> row_of_col(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    row_of_col[0] = i;
    int j0 = 0;
    std::vector<double> min_slack(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = row_of_col[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = entry(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < min_slack[j]) {
          min_slack[j] = cur;
          way[j] = j0;
        }
        if (min_slack[j] < delta) {
          delta = min_slack[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[row_of_col[j]] += delta;
          v[j] -= delta;
        } else {
          min_slack[j] -= delta;
        }
      }
      j0 = j1;
    } while (row_of_col[j0] != 0);
    do {
      const int j1 = way[j0];
      row_of_col[j0] = row_of_col[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> col_of_row(cost.rows(), -1);
  for (int j = 1; j <= n; ++j) {
    const int r = row_of_col[j] - 1;
    const int c = j - 1;
    if (r < cost.rows() && c < cost.cols()) col_of_row[r] = c;
  }

  Assignment out;
  std::vector<char> gt_used(cost.cols(), 0);
  for (int r = 0; r < cost.rows(); ++r) {
    if (col_of_row[r] < 0) {
      out.unmatched_predictions.push_back(r);
      continue;
    }
    out.pairs.emplace_back(r, col_of_row[r]);
    out.total_cost += cost.at(r, col_of_row[r]);
    gt_used[col_of_row[r]] = 1;
  }
  for (int c = 0; c < cost.cols(); ++c) {
    if (!gt_used[c]) out.unmatched_ground_truths.push_back(c);
  }
  return out;
}

double MatchingCost(const InstancePrediction& pred, const InstanceTrack& gt,
                    const LossWeights& w) {
  return FaceLoss(pred, gt, w).total;
}

Assignment MatchInstances(std::span<const InstancePrediction> preds,
                          std::span<const InstanceTrack> gts,
                          const LossWeights& w) {
  const int rows = static_cast<int>(preds.size());
  const int cols = static_cast<int>(gts.size());
  if (rows == 0 || cols == 0) {
    Assignment out;
    for (int r = 0; r < rows; ++r) out.unmatched_predictions.push_back(r);
    for (int c = 0; c < cols; ++c) out.unmatched_ground_truths.push_back(c);
    return out;
  }
  CostMatrix cost(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      cost.at(r, c) = MatchingCost(preds[r], gts[c], w);
    }
  }
  return Hungarian(cost);
}

SetLoss ComputeSetLoss(std::span<const InstancePrediction> preds,
                       std::span<const InstanceTrack> gts,
                       const LossWeights& w) {
  SetLoss out;
  out.assignment = MatchInstances(preds, gts, w);
  for (const auto& [r, c] : out.assignment.pairs) {
    out.matched.push_back(InstanceLosses(preds[r], gts[c], w));
    out.total += out.matched.back().total;
  }
  for (int r : out.assignment.unmatched_predictions) {
    out.unmatched += UnmatchedLoss(preds[r], w);
  }
  out.total += out.unmatched;
  return out;
}

}  // namespace blinkscope
