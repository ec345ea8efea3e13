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

#ifndef BLINKSCOPE_NETCORE_H_
#define BLINKSCOPE_NETCORE_H_

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "blinkscope/annotation.h"
#include "blinkscope/tensor_file.h"

namespace blinkscope {

// Forward pass of the query-based detector: instance queries refined M times
// by query interaction (spatial then temporal self-attention), video
// interaction (RoI align + query-conditioned dynamic filtering) and the
// face/blink heads. Forward only, double precision, no hidden state.

using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::RowVectorXd;

struct NetConfig {
  int num_queries = 50;
  int num_iterations = 4;
  int channels = 64;
  int num_heads = 8;
  int roi_grid = 7;

  int filter_channels() const { return channels / 4; }
  // Throws std::invalid_argument on inconsistent dimensions.
  void Validate() const;
};

// Backbone output for one clip, shape T x C x H x W, row-major.
class VideoFeature {
 public:
  VideoFeature() = default;
  VideoFeature(int frames, int channels, int height, int width,
               double fill = 0.0);
  VideoFeature(int frames, int channels, int height, int width,
               std::vector<double> values);

  int frames() const { return frames_; }
  int channels() const { return channels_; }
  int height() const { return height_; }
  int width() const { return width_; }

  double& at(int t, int c, int y, int x) { return values_[Index(t, c, y, x)]; }
  double at(int t, int c, int y, int x) const {
    return values_[Index(t, c, y, x)];
  }
  const std::vector<double>& values() const { return values_; }

  // Frames [start, start + count).
  VideoFeature Slice(int start, int count) const;

 private:
  std::size_t Index(int t, int c, int y, int x) const {
    return ((static_cast<std::size_t>(t) * channels_ + c) * height_ + y) *
               width_ +
           x;
  }

  int frames_ = 0;
  int channels_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<double> values_;
};

// y = x * weight + bias, weight is (in x out).
struct Linear {
  Matrix weight;
  RowVector bias;

  Matrix Apply(const Matrix& x) const;
};

struct AttentionParams {
  Linear query;
  Linear key;
  Linear value;
  Linear output;
};

struct DynamicFilterParams {
  // Maps a query embedding (1 x C) to both filter banks, laid out as
  // [C x C/4 | C/4 x C], each row-major. No bias.
  Matrix generator;
  // Flattened (S*S*C) filtered RoI feature -> updated query (C).
  Linear projection;
};

struct Mlp {
  Linear hidden;
  Linear output;

  Matrix Apply(const Matrix& x) const;  // ReLU between the layers
};

struct StageParams {
  AttentionParams spatial;
  AttentionParams temporal;
  DynamicFilterParams filters;
  Mlp face_cls;
  Mlp face_box;
  Mlp blink;
};

struct ModelParams {
  NetConfig config;
  Matrix query_seeds;     // N x C
  Matrix proposal_seeds;  // N x 4, normalized corner boxes
  std::vector<StageParams> stages;
  std::uint64_t init_seed = 0;
};

// Seeded uniform [-0.05, 0.05] weights; proposal seeds are random valid
// boxes inside the unit square.
ModelParams InitParams(const NetConfig& config, std::uint64_t seed);

TensorFile ParamsToTensorFile(const ModelParams& params);
// Throws DataError naming the offending array on any mismatch.
ModelParams ParamsFromTensorFile(const TensorFile& file);

struct QueryState {
  std::vector<Matrix> queries;    // N x (T x C)
  std::vector<Matrix> proposals;  // N x (T x 4)

  int num_queries() const { return static_cast<int>(queries.size()); }
};

QueryState InitQueries(const ModelParams& params, int num_frames);

// Multi-head scaled dot-product self-attention over the L rows of x, with a
// residual connection. If `attention` is non-null it receives one L x L
// weight matrix per head.
Matrix Mhsa(const Matrix& x, const AttentionParams& p, int num_heads,
            std::vector<Matrix>* attention = nullptr);

// Spatial attention across queries per frame, then temporal attention across
// frames per query.
QueryState QimForward(const QueryState& qs, const StageParams& p,
                      const NetConfig& config);

// Bilinear RoI align on frame t: one sample at each of the S x S bin centres,
// edge-clamped. Returns (S*S) x C with bins in row-major (y, x) order.
Matrix RoiAlign(const VideoFeature& f, const FrameBox& box, int t, int grid);

// Updated query features, N x (T x C).
std::vector<Matrix> VimForward(const QueryState& qs, const VideoFeature& f,
                               const StageParams& p, const NetConfig& config);

struct HeadOutput {
  Matrix face_scores;          // N x T
  std::vector<Matrix> boxes;   // N x (T x 4)
  Matrix blink_scores;         // N x T
};

HeadOutput HeadsForward(const std::vector<Matrix>& updated,
                        const StageParams& p);

struct ModelOutput {
  std::vector<HeadOutput> iterations;

  const HeadOutput& final_output() const { return iterations.back(); }
};

ModelOutput ForwardClip(const VideoFeature& f, const ModelParams& params);

// Logistic function clamped to (0, 1) so that scores never saturate to an
// exact 0 or 1.
double Sigmoid(double x);

}  // namespace blinkscope

#endif  // BLINKSCOPE_NETCORE_H_
