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

#include "blinkscope/netcore.h"

#include <cmath>

#include "blinkscope/errors.h"
#include "doctest.h"
#include "oracles.h"

namespace blinkscope {
namespace {

NetConfig SmallConfig() {
  NetConfig c;
  c.num_queries = 5;
  c.num_iterations = 2;
  c.channels = 16;
  c.num_heads = 4;
  c.roi_grid = 3;
  return c;
}

Matrix RandomMatrix(oracle::Rng& rng, int rows, int cols, double scale) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.Uniform(-scale, scale);
  return m;
}

Linear RandomLinear(oracle::Rng& rng, int in, int out, double scale) {
  Linear l;
  l.weight = RandomMatrix(rng, in, out, scale);
  l.bias = RandomMatrix(rng, 1, out, scale);
  return l;
}

AttentionParams RandomAttention(oracle::Rng& rng, int c) {
  return {RandomLinear(rng, c, c, 0.5), RandomLinear(rng, c, c, 0.5),
          RandomLinear(rng, c, c, 0.5), RandomLinear(rng, c, c, 0.5)};
}

VideoFeature RandomFeature(oracle::Rng& rng, int t, int c, int h, int w) {
  VideoFeature f(t, c, h, w);
  for (int a = 0; a < t; ++a)
    for (int b = 0; b < c; ++b)
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) f.at(a, b, y, x) = rng.Uniform(-1, 1);
  return f;
}

FrameBox RandomBox(oracle::Rng& rng) {
  const double x1 = rng.Uniform(0, 0.8);
  const double y1 = rng.Uniform(0, 0.8);
  return FrameBox{x1, y1, rng.Uniform(x1 + 0.01, 1.0), rng.Uniform(y1 + 0.01, 1.0)};
}

TEST_CASE("config validation") {
  NetConfig c = SmallConfig();
  CHECK_NOTHROW(c.Validate());
  c.num_heads = 3;
  CHECK_THROWS_AS(c.Validate(), std::invalid_argument);
  c = SmallConfig();
  c.channels = 18;
  c.num_heads = 2;
  CHECK_THROWS_AS(c.Validate(), std::invalid_argument);
}

TEST_CASE("init queries tiles the seeds") {
  const ModelParams p = InitParams(SmallConfig(), 1);
  for (int frames : {1, 3}) {
    const QueryState qs = InitQueries(p, frames);
    REQUIRE(qs.num_queries() == 5);
    for (int i = 0; i < 5; ++i) {
      CHECK(qs.queries[i].rows() == frames);
      for (int t = 0; t < frames; ++t) {
        CHECK(qs.queries[i].row(t) == p.query_seeds.row(i));
        CHECK(qs.proposals[i].row(t) == p.proposal_seeds.row(i));
      }
    }
    CHECK(qs.queries[0].row(0) != qs.queries[1].row(0));
  }
  CHECK_THROWS_AS(InitQueries(p, 0), std::invalid_argument);
}

TEST_CASE("mhsa matches the loop implementation and is row-stochastic") {
  oracle::Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const int len = rng.Int(1, 7);
    const AttentionParams p = RandomAttention(rng, 16);
    const Matrix x = RandomMatrix(rng, len, 16, 1.0);
    std::vector<Matrix> weights;
    const Matrix y = Mhsa(x, p, 4, &weights);
    CHECK((y - oracle::NaiveMhsa(x, p, 4)).cwiseAbs().maxCoeff() < 1e-9);
    REQUIRE(weights.size() == 4);
    for (const Matrix& w : weights) {
      for (Eigen::Index r = 0; r < w.rows(); ++r) {
        CHECK(std::abs(w.row(r).sum() - 1.0) < 1e-6);
        CHECK(w.row(r).minCoeff() >= 0.0);
      }
    }
  }
  CHECK_THROWS_AS(Mhsa(Matrix::Zero(2, 16), RandomAttention(rng, 16), 3),
                  std::invalid_argument);
}

TEST_CASE("mhsa on a single row") {
  oracle::Rng rng(3);
  const AttentionParams p = RandomAttention(rng, 16);
  const Matrix x = RandomMatrix(rng, 1, 16, 1.0);
  std::vector<Matrix> weights;
  const Matrix y = Mhsa(x, p, 4, &weights);
  for (const Matrix& w : weights) CHECK(w(0, 0) == 1.0);
  const Matrix expected = x + p.output.Apply(p.value.Apply(x));
  CHECK((y - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("mhsa is permutation equivariant") {
  oracle::Rng rng(4);
  const AttentionParams p = RandomAttention(rng, 16);
  const Matrix x = RandomMatrix(rng, 6, 16, 1.0);
  const std::vector<int> perm = {3, 0, 5, 1, 4, 2};
  Matrix xp(6, 16);
  for (int i = 0; i < 6; ++i) xp.row(i) = x.row(perm[i]);
  const Matrix y = Mhsa(x, p, 4);
  const Matrix yp = Mhsa(xp, p, 4);
  for (int i = 0; i < 6; ++i) {
    CHECK((yp.row(i) - y.row(perm[i])).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("qim with identical queries keeps them identical") {
  ModelParams p = InitParams(SmallConfig(), 5);
  for (int i = 1; i < 5; ++i) p.query_seeds.row(i) = p.query_seeds.row(0);
  const QueryState qs = QimForward(InitQueries(p, 3), p.stages[0], p.config);
  for (int i = 1; i < 5; ++i) {
    CHECK((qs.queries[i] - qs.queries[0]).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("qim with one query and one frame is two singleton attentions") {
  NetConfig c = SmallConfig();
  c.num_queries = 1;
  const ModelParams p = InitParams(c, 6);
  const QueryState qs = QimForward(InitQueries(p, 1), p.stages[0], c);
  const Matrix x = p.query_seeds;
  const Matrix s = x + p.stages[0].spatial.output.Apply(p.stages[0].spatial.value.Apply(x));
  const Matrix t = s + p.stages[0].temporal.output.Apply(p.stages[0].temporal.value.Apply(s));
  CHECK((qs.queries[0] - t).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("roi align") {
  VideoFeature constant(2, 3, 5, 6, 0.75);
  const Matrix r = RoiAlign(constant, FrameBox{0.1, 0.2, 0.7, 0.9}, 1, 4);
  CHECK(r.rows() == 16);
  CHECK(r.cols() == 3);
  CHECK((r.array() - 0.75).abs().maxCoeff() < 1e-15);

  // Horizontal ramp: value = column index.
  VideoFeature ramp(1, 1, 4, 8);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 8; ++x) ramp.at(0, 0, y, x) = x;
  const FrameBox box{0.25, 0.0, 0.75, 1.0};
  const Matrix s = RoiAlign(ramp, box, 0, 4);
  for (int by = 0; by < 4; ++by) {
    for (int bx = 0; bx < 4; ++bx) {
      // Bin centres at x = 2 + (bx + 0.5), minus the half-pixel offset.
      CHECK(s(by * 4 + bx, 0) == doctest::Approx(2.0 + bx + 0.5 - 0.5));
    }
  }

  // Box around the centre of cell (2, 3) only.
  VideoFeature f(1, 1, 4, 8);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 8; ++x) f.at(0, 0, y, x) = 10 * y + x;
  const FrameBox cell{3.5 / 8 - 1e-9, 2.5 / 4 - 1e-9, 3.5 / 8 + 1e-9, 2.5 / 4 + 1e-9};
  const Matrix c = RoiAlign(f, cell, 0, 2);
  for (Eigen::Index i = 0; i < c.rows(); ++i) CHECK(c(i, 0) == doctest::Approx(23.0));
}

TEST_CASE("vim matches the naive reference") {
  oracle::Rng rng(7);
  const NetConfig config = SmallConfig();
  for (int trial = 0; trial < 100; ++trial) {
    const int frames = rng.Int(1, 3);
    const int n = rng.Int(1, 4);
    VideoFeature f = RandomFeature(rng, frames, 16, rng.Int(3, 7), rng.Int(3, 7));
    StageParams stage;
    stage.filters.generator = RandomMatrix(rng, 16, 2 * 16 * 4, 0.5);
    stage.filters.projection = RandomLinear(rng, 9 * 16, 16, 0.2);
    QueryState qs;
    for (int i = 0; i < n; ++i) {
      qs.queries.push_back(RandomMatrix(rng, frames, 16, 1.0));
      Matrix prop(frames, 4);
      for (int t = 0; t < frames; ++t) {
        const FrameBox b = RandomBox(rng);
        prop.row(t) << b.x1, b.y1, b.x2, b.y2;
      }
      qs.proposals.push_back(prop);
    }
    const std::vector<Matrix> out = VimForward(qs, f, stage, config);
    REQUIRE(static_cast<int>(out.size()) == n);
    for (int i = 0; i < n; ++i) {
      REQUIRE(out[i].rows() == frames);
      REQUIRE(out[i].cols() == 16);
      for (int t = 0; t < frames; ++t) {
        const auto& pr = qs.proposals[i];
        const std::vector<double> q(qs.queries[i].row(t).data(),
                                    qs.queries[i].row(t).data() + 16);
        const auto ref = oracle::NaiveVimRow(
            f, t, q, FrameBox{pr(t, 0), pr(t, 1), pr(t, 2), pr(t, 3)},
            stage.filters, 3);
        for (int ch = 0; ch < 16; ++ch) CHECK(std::abs(out[i](t, ch) - ref[ch]) < 1e-9);
      }
    }
  }
}

TEST_CASE("vim with a zero query returns the projection bias") {
  oracle::Rng rng(8);
  const NetConfig config = SmallConfig();
  const ModelParams p = InitParams(config, 8);
  QueryState qs = InitQueries(p, 2);
  for (auto& q : qs.queries) q.setZero();
  const VideoFeature f = RandomFeature(rng, 2, 16, 5, 5);
  const auto out = VimForward(qs, f, p.stages[0], config);
  for (const Matrix& m : out) {
    for (int t = 0; t < 2; ++t) CHECK(m.row(t) == p.stages[0].filters.projection.bias);
  }
  const VideoFeature wrong = RandomFeature(rng, 3, 16, 5, 5);
  CHECK_THROWS_AS(VimForward(qs, wrong, p.stages[0], config), std::invalid_argument);
}

TEST_CASE("heads with zero weights give one half") {
  ModelParams p = InitParams(SmallConfig(), 9);
  StageParams& s = p.stages[0];
  for (Mlp* m : {&s.face_cls, &s.blink}) {
    m->hidden.weight.setZero();
    m->hidden.bias.setZero();
    m->output.weight.setZero();
    m->output.bias.setZero();
  }
  oracle::Rng rng(9);
  const std::vector<Matrix> q = {RandomMatrix(rng, 3, 16, 1.0), RandomMatrix(rng, 3, 16, 1.0)};
  const HeadOutput h = HeadsForward(q, s);
  CHECK((h.face_scores.array() - 0.5).abs().maxCoeff() == 0.0);
  CHECK((h.blink_scores.array() - 0.5).abs().maxCoeff() == 0.0);
}

TEST_CASE("sigmoid is monotone and stays inside (0, 1)") {
  CHECK(Sigmoid(0.0) == 0.5);
  CHECK(Sigmoid(1.0) > Sigmoid(0.5));
  CHECK(Sigmoid(-1000.0) > 0.0);
  CHECK(Sigmoid(1000.0) < 1.0);
  CHECK(Sigmoid(-30.0) < Sigmoid(-29.0));
  CHECK(Sigmoid(-40.0) <= Sigmoid(-39.0));
}

TEST_CASE("single iteration equals a manual composition") {
  NetConfig c = SmallConfig();
  c.num_iterations = 1;
  const ModelParams p = InitParams(c, 10);
  oracle::Rng rng(10);
  const VideoFeature f = RandomFeature(rng, 3, 16, 6, 6);
  const ModelOutput out = ForwardClip(f, p);
  const QueryState qs = QimForward(InitQueries(p, 3), p.stages[0], c);
  const HeadOutput h = HeadsForward(VimForward(qs, f, p.stages[0], c), p.stages[0]);
  CHECK(out.final_output().face_scores == h.face_scores);
  CHECK(out.final_output().blink_scores == h.blink_scores);
}

TEST_CASE("forward is deterministic with valid outputs") {
  const NetConfig c = SmallConfig();
  const ModelParams p = InitParams(c, 11);
  oracle::Rng rng(11);
  const VideoFeature f = RandomFeature(rng, 4, 16, 6, 6);
  const ModelOutput a = ForwardClip(f, p);
  const ModelOutput b = ForwardClip(f, p);
  REQUIRE(a.iterations.size() == 2);
  for (std::size_t m = 0; m < a.iterations.size(); ++m) {
    const HeadOutput& h = a.iterations[m];
    CHECK(h.face_scores == b.iterations[m].face_scores);
    CHECK(h.blink_scores == b.iterations[m].blink_scores);
    CHECK(h.face_scores.minCoeff() > 0.0);
    CHECK(h.face_scores.maxCoeff() < 1.0);
    for (std::size_t i = 0; i < h.boxes.size(); ++i) {
      CHECK(h.boxes[i] == b.iterations[m].boxes[i]);
      for (Eigen::Index t = 0; t < h.boxes[i].rows(); ++t) {
        const auto r = h.boxes[i].row(t);
        CHECK(r(0) >= 0.0);
        CHECK(r(1) >= 0.0);
        CHECK(r(2) <= 1.0);
        CHECK(r(3) <= 1.0);
        CHECK(r(0) <= r(2));
        CHECK(r(1) <= r(3));
      }
    }
  }
}

TEST_CASE("weights round-trip through the tensor container") {
  const ModelParams p = InitParams(SmallConfig(), 12);
  const TensorFile file = ParamsToTensorFile(p);
  const ModelParams q = ParamsFromTensorFile(DecodeTensorFile(EncodeTensorFile(file)));
  CHECK(q.init_seed == 12);
  CHECK(q.query_seeds == p.query_seeds);
  CHECK(q.proposal_seeds == p.proposal_seeds);
  REQUIRE(q.stages.size() == p.stages.size());
  CHECK(q.stages[1].filters.generator == p.stages[1].filters.generator);
  CHECK(q.stages[1].blink.output.bias == p.stages[1].blink.output.bias);

  TensorFile bad = file;
  for (auto& a : bad.arrays) {
    if (a.name == "stage0.filters.generator") {
      a.shape = {1, static_cast<std::int64_t>(a.values.size())};
    }
  }
  CHECK_THROWS_AS(ParamsFromTensorFile(bad), DataError);
  bad = file;
  bad.arrays.pop_back();
  CHECK_THROWS_AS(ParamsFromTensorFile(bad), DataError);
}

}  // namespace
}  // namespace blinkscope
