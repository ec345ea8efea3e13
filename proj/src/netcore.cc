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

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "blinkscope/errors.h"

namespace blinkscope {

namespace {

constexpr double kInitRange = 0.05;
constexpr double kScoreFloor = 1e-15;

// Platform-independent uniform draw in [0, 1).
double Uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Matrix RandomMatrix(int rows, int cols, std::mt19937_64& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = (2.0 * Uniform01(rng) - 1.0) * kInitRange;
  }
  return m;
}

Linear RandomLinear(int in, int out, std::mt19937_64& rng) {
  Linear l;
  l.weight = RandomMatrix(in, out, rng);
  l.bias = RandomMatrix(1, out, rng);
  return l;
}

AttentionParams RandomAttention(int c, std::mt19937_64& rng) {
  AttentionParams a;
  a.query = RandomLinear(c, c, rng);
  a.key = RandomLinear(c, c, rng);
  a.value = RandomLinear(c, c, rng);
  a.output = RandomLinear(c, c, rng);
  return a;
}

Mlp RandomMlp(int in, int hidden, int out, std::mt19937_64& rng) {
  return Mlp{RandomLinear(in, hidden, rng), RandomLinear(hidden, out, rng)};
}

Matrix Relu(Matrix m) { return m.cwiseMax(0.0); }

void SoftmaxRows(Matrix* m) {
  for (Eigen::Index r = 0; r < m->rows(); ++r) {
    auto row = m->row(r);
    const double max = row.maxCoeff();
    row = (row.array() - max).exp();
    row /= row.sum();
  }
}

// Boxes head output: clamp to the unit square and order the corners.
Matrix ToValidBoxes(const Matrix& raw) {
  Matrix out(raw.rows(), 4);
  for (Eigen::Index r = 0; r < raw.rows(); ++r) {
    const double ax = std::clamp(raw(r, 0), 0.0, 1.0);
    const double ay = std::clamp(raw(r, 1), 0.0, 1.0);
    const double bx = std::clamp(raw(r, 2), 0.0, 1.0);
    const double by = std::clamp(raw(r, 3), 0.0, 1.0);
    out(r, 0) = std::min(ax, bx);
    out(r, 1) = std::min(ay, by);
    out(r, 2) = std::max(ax, bx);
    out(r, 3) = std::max(ay, by);
  }
  return out;
}

// --- weights container mapping ---------------------------------------------

NamedArray ToArray(const std::string& name, const Matrix& m) {
  NamedArray a;
  a.name = name;
  a.shape = {m.rows(), m.cols()};
  a.values.assign(m.data(), m.data() + m.size());
  return a;
}

NamedArray ToArray(const std::string& name, const RowVector& v) {
  NamedArray a;
  a.name = name;
  a.shape = {v.size()};
  a.values.assign(v.data(), v.data() + v.size());
  return a;
}

void AppendLinear(const std::string& prefix, const Linear& l,
                  std::vector<NamedArray>* out) {
  out->push_back(ToArray(prefix + ".weight", l.weight));
  out->push_back(ToArray(prefix + ".bias", l.bias));
}

void AppendAttention(const std::string& prefix, const AttentionParams& a,
                     std::vector<NamedArray>* out) {
  AppendLinear(prefix + ".query", a.query, out);
  AppendLinear(prefix + ".key", a.key, out);
  AppendLinear(prefix + ".value", a.value, out);
  AppendLinear(prefix + ".output", a.output, out);
}

void AppendMlp(const std::string& prefix, const Mlp& m,
               std::vector<NamedArray>* out) {
  AppendLinear(prefix + ".hidden", m.hidden, out);
  AppendLinear(prefix + ".output", m.output, out);
}

Matrix LoadMatrix(const TensorFile& f, const std::string& name, int rows,
                  int cols) {
  const NamedArray& a = f.Require(name, {rows, cols});
  Matrix m(rows, cols);
  std::copy(a.values.begin(), a.values.end(), m.data());
  if (!m.allFinite()) throw DataError(name, "non-finite weight");
  return m;
}

RowVector LoadVector(const TensorFile& f, const std::string& name, int size) {
  const NamedArray& a = f.Require(name, {size});
  RowVector v(size);
  std::copy(a.values.begin(), a.values.end(), v.data());
  if (!v.allFinite()) throw DataError(name, "non-finite weight");
  return v;
}

Linear LoadLinear(const TensorFile& f, const std::string& prefix, int in,
                  int out) {
  return Linear{LoadMatrix(f, prefix + ".weight", in, out),
                LoadVector(f, prefix + ".bias", out)};
}

AttentionParams LoadAttention(const TensorFile& f, const std::string& prefix,
                              int c) {
  return AttentionParams{LoadLinear(f, prefix + ".query", c, c),
                         LoadLinear(f, prefix + ".key", c, c),
                         LoadLinear(f, prefix + ".value", c, c),
                         LoadLinear(f, prefix + ".output", c, c)};
}

Mlp LoadMlp(const TensorFile& f, const std::string& prefix, int in, int hidden,
            int out) {
  return Mlp{LoadLinear(f, prefix + ".hidden", in, hidden),
             LoadLinear(f, prefix + ".output", hidden, out)};
}

int MetaInt(const TensorFile& f, const char* key) {
  const std::string& s = f.RequireMeta(key);
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return static_cast<int>(v);
  } catch (const std::exception&) {
    throw DataError(std::string("meta.") + key, "not an integer: '" + s + "'");
  }
}

std::string StagePrefix(int m) { return "stage" + std::to_string(m); }

}  // namespace

// --- configuration and data ------------------------------------------------

void NetConfig::Validate() const {
  if (num_queries < 1) throw std::invalid_argument("num_queries must be >= 1");
  if (num_iterations < 1) {
    throw std::invalid_argument("num_iterations must be >= 1");
  }
  if (num_heads < 1 || channels < 1 || channels % num_heads != 0) {
    throw std::invalid_argument("channels must be divisible by num_heads");
  }
  if (channels % 4 != 0) {
    throw std::invalid_argument("channels must be divisible by 4");
  }
  if (roi_grid < 1) throw std::invalid_argument("roi_grid must be >= 1");
}

VideoFeature::VideoFeature(int frames, int channels, int height, int width,
                           double fill)
    : frames_(frames), channels_(channels), height_(height), width_(width) {
  if (frames < 1 || channels < 1 || height < 1 || width < 1) {
    throw std::invalid_argument("VideoFeature: dimensions must be positive");
  }
  values_.assign(static_cast<std::size_t>(frames) * channels * height * width,
                 fill);
}

VideoFeature::VideoFeature(int frames, int channels, int height, int width,
                           std::vector<double> values)
    : VideoFeature(frames, channels, height, width) {
  if (values.size() != values_.size()) {
    throw std::invalid_argument("VideoFeature: value count does not match shape");
  }
  values_ = std::move(values);
}

VideoFeature VideoFeature::Slice(int start, int count) const {
  if (start < 0 || count < 1 || start + count > frames_) {
    throw std::out_of_range("VideoFeature::Slice: frame range out of bounds");
  }
  const std::size_t frame_size =
      static_cast<std::size_t>(channels_) * height_ * width_;
  std::vector<double> values(values_.begin() + start * frame_size,
                             values_.begin() + (start + count) * frame_size);
  return VideoFeature(count, channels_, height_, width_, std::move(values));
}

Matrix Linear::Apply(const Matrix& x) const {
  Matrix y = x * weight;
  y.rowwise() += bias;
  return y;
}

Matrix Mlp::Apply(const Matrix& x) const {
  return output.Apply(Relu(hidden.Apply(x)));
}

double Sigmoid(double x) {
  const double s =
      x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  return std::clamp(s, kScoreFloor, 1.0 - kScoreFloor);
}

// --- parameters ------------------------------------------------------------

ModelParams InitParams(const NetConfig& config, std::uint64_t seed) {
  config.Validate();
  std::mt19937_64 rng(seed);
  const int n = config.num_queries;
  const int c = config.channels;
  const int hid = config.filter_channels();
  const int s2 = config.roi_grid * config.roi_grid;

  ModelParams p;
  p.config = config;
  p.init_seed = seed;
  p.query_seeds = RandomMatrix(n, c, rng);
  p.proposal_seeds.resize(n, 4);
  for (int i = 0; i < n; ++i) {
    const double cx = 0.2 + 0.6 * Uniform01(rng);
    const double cy = 0.2 + 0.6 * Uniform01(rng);
    const double w = 0.1 + 0.3 * Uniform01(rng);
    const double h = 0.1 + 0.3 * Uniform01(rng);
    p.proposal_seeds.row(i) << std::max(cx - w / 2, 0.0),
        std::max(cy - h / 2, 0.0), std::min(cx + w / 2, 1.0),
        std::min(cy + h / 2, 1.0);
  }
  for (int m = 0; m < config.num_iterations; ++m) {
    StageParams st;
    st.spatial = RandomAttention(c, rng);
    st.temporal = RandomAttention(c, rng);
    st.filters.generator = RandomMatrix(c, 2 * c * hid, rng);
    st.filters.projection = RandomLinear(s2 * c, c, rng);
    st.face_cls = RandomMlp(c, c, 1, rng);
    st.face_box = RandomMlp(c, c, 4, rng);
    st.blink = RandomMlp(c, c, 1, rng);
    p.stages.push_back(std::move(st));
  }
  return p;
}

TensorFile ParamsToTensorFile(const ModelParams& params) {
  const NetConfig& cfg = params.config;
  TensorFile f;
  f.metadata["format"] = "blinkscope-weights";
  f.metadata["num_queries"] = std::to_string(cfg.num_queries);
  f.metadata["num_iterations"] = std::to_string(cfg.num_iterations);
  f.metadata["channels"] = std::to_string(cfg.channels);
  f.metadata["num_heads"] = std::to_string(cfg.num_heads);
  f.metadata["roi_grid"] = std::to_string(cfg.roi_grid);
  f.metadata["init_seed"] = std::to_string(params.init_seed);
  f.arrays.push_back(ToArray("query_seeds", params.query_seeds));
  f.arrays.push_back(ToArray("proposal_seeds", params.proposal_seeds));
  for (std::size_t m = 0; m < params.stages.size(); ++m) {
    const StageParams& st = params.stages[m];
    const std::string prefix = StagePrefix(static_cast<int>(m));
    AppendAttention(prefix + ".spatial", st.spatial, &f.arrays);
    AppendAttention(prefix + ".temporal", st.temporal, &f.arrays);
    f.arrays.push_back(ToArray(prefix + ".filters.generator", st.filters.generator));
    AppendLinear(prefix + ".filters.projection", st.filters.projection, &f.arrays);
    AppendMlp(prefix + ".face_cls", st.face_cls, &f.arrays);
    AppendMlp(prefix + ".face_box", st.face_box, &f.arrays);
    AppendMlp(prefix + ".blink", st.blink, &f.arrays);
  }
  return f;
}

ModelParams ParamsFromTensorFile(const TensorFile& f) {
  if (f.RequireMeta("format") != "blinkscope-weights") {
    throw DataError("meta.format", "not a weights file");
  }
  ModelParams p;
  NetConfig& cfg = p.config;
  cfg.num_queries = MetaInt(f, "num_queries");
  cfg.num_iterations = MetaInt(f, "num_iterations");
  cfg.channels = MetaInt(f, "channels");
  cfg.num_heads = MetaInt(f, "num_heads");
  cfg.roi_grid = MetaInt(f, "roi_grid");
  try {
    cfg.Validate();
  } catch (const std::invalid_argument& e) {
    throw DataError("meta", e.what());
  }
  try {
    p.init_seed = std::stoull(f.RequireMeta("init_seed"));
  } catch (const std::logic_error&) {
    throw DataError("meta.init_seed", "not an unsigned integer");
  }
  const int n = cfg.num_queries;
  const int c = cfg.channels;
  const int hid = cfg.filter_channels();
  const int s2 = cfg.roi_grid * cfg.roi_grid;

  p.query_seeds = LoadMatrix(f, "query_seeds", n, c);
  p.proposal_seeds = LoadMatrix(f, "proposal_seeds", n, 4);
  for (int i = 0; i < n; ++i) {
    const FrameBox b{p.proposal_seeds(i, 0), p.proposal_seeds(i, 1),
                     p.proposal_seeds(i, 2), p.proposal_seeds(i, 3)};
    if (!b.IsValid() || b.x1 < 0.0 || b.y1 < 0.0 || b.x2 > 1.0 || b.y2 > 1.0) {
      throw DataError("proposal_seeds[" + std::to_string(i) + "]",
                      "not a normalized box");
    }
  }
  for (int m = 0; m < cfg.num_iterations; ++m) {
    const std::string prefix = StagePrefix(m);
    StageParams st;
    st.spatial = LoadAttention(f, prefix + ".spatial", c);
    st.temporal = LoadAttention(f, prefix + ".temporal", c);
    st.filters.generator =
        LoadMatrix(f, prefix + ".filters.generator", c, 2 * c * hid);
    st.filters.projection =
        LoadLinear(f, prefix + ".filters.projection", s2 * c, c);
    st.face_cls = LoadMlp(f, prefix + ".face_cls", c, c, 1);
    st.face_box = LoadMlp(f, prefix + ".face_box", c, c, 4);
    st.blink = LoadMlp(f, prefix + ".blink", c, c, 1);
    p.stages.push_back(std::move(st));
  }
  return p;
}

// --- forward ---------------------------------------------------------------

QueryState InitQueries(const ModelParams& params, int num_frames) {
  if (num_frames < 1) throw std::invalid_argument("InitQueries: T must be >= 1");
  QueryState qs;
  const int n = static_cast<int>(params.query_seeds.rows());
  for (int i = 0; i < n; ++i) {
    qs.queries.push_back(params.query_seeds.row(i).replicate(num_frames, 1));
    qs.proposals.push_back(params.proposal_seeds.row(i).replicate(num_frames, 1));
  }
  return qs;
}

Matrix Mhsa(const Matrix& x, const AttentionParams& p, int num_heads,
            std::vector<Matrix>* attention) {
  const int c = static_cast<int>(x.cols());
  if (num_heads < 1 || c % num_heads != 0) {
    throw std::invalid_argument("Mhsa: channels not divisible by heads");
  }
  if (x.rows() < 1) throw std::invalid_argument("Mhsa: empty sequence");
  const int dk = c / num_heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dk));

  const Matrix q = p.query.Apply(x);
  const Matrix k = p.key.Apply(x);
  const Matrix v = p.value.Apply(x);
  Matrix heads(x.rows(), c);
  if (attention != nullptr) attention->clear();
  for (int h = 0; h < num_heads; ++h) {
    Matrix w = q.middleCols(h * dk, dk) * k.middleCols(h * dk, dk).transpose();
    w *= scale;
    SoftmaxRows(&w);
    heads.middleCols(h * dk, dk) = w * v.middleCols(h * dk, dk);
    if (attention != nullptr) attention->push_back(std::move(w));
  }
  return x + p.output.Apply(heads);
}

QueryState QimForward(const QueryState& qs, const StageParams& p,
                      const NetConfig& config) {
  QueryState out = qs;
  const int n = qs.num_queries();
  if (n == 0) return out;
  const int frames = static_cast<int>(qs.queries[0].rows());
  const int c = static_cast<int>(qs.queries[0].cols());

  Matrix per_frame(n, c);
  for (int t = 0; t < frames; ++t) {
    for (int i = 0; i < n; ++i) per_frame.row(i) = out.queries[i].row(t);
    const Matrix mixed = Mhsa(per_frame, p.spatial, config.num_heads);
    for (int i = 0; i < n; ++i) out.queries[i].row(t) = mixed.row(i);
  }
  for (int i = 0; i < n; ++i) {
    out.queries[i] = Mhsa(out.queries[i], p.temporal, config.num_heads);
  }
  return out;
}

Matrix RoiAlign(const VideoFeature& f, const FrameBox& box, int t, int grid) {
  const int h = f.height();
  const int w = f.width();
  const double x0 = box.x1 * w;
  const double y0 = box.y1 * h;
  const double bin_w = (box.x2 - box.x1) * w / grid;
  const double bin_h = (box.y2 - box.y1) * h / grid;

  Matrix out(grid * grid, f.channels());
  for (int by = 0; by < grid; ++by) {
    // Pixel centres sit at integer + 0.5 in continuous coordinates.
    const double v = std::clamp(y0 + (by + 0.5) * bin_h - 0.5, 0.0, h - 1.0);
    const int ylo = static_cast<int>(std::floor(v));
    const int yhi = std::min(ylo + 1, h - 1);
    const double ly = v - ylo;
    for (int bx = 0; bx < grid; ++bx) {
      const double u = std::clamp(x0 + (bx + 0.5) * bin_w - 0.5, 0.0, w - 1.0);
      const int xlo = static_cast<int>(std::floor(u));
      const int xhi = std::min(xlo + 1, w - 1);
      const double lx = u - xlo;
      auto row = out.row(by * grid + bx);
      for (int c = 0; c < f.channels(); ++c) {
        row(c) = (1 - ly) * ((1 - lx) * f.at(t, c, ylo, xlo) +
                             lx * f.at(t, c, ylo, xhi)) +
                 ly * ((1 - lx) * f.at(t, c, yhi, xlo) +
                       lx * f.at(t, c, yhi, xhi));
      }
    }
  }
  return out;
}

std::vector<Matrix> VimForward(const QueryState& qs, const VideoFeature& f,
                               const StageParams& p, const NetConfig& config) {
  const int n = qs.num_queries();
  const int c = config.channels;
  const int hid = config.filter_channels();
  const int grid = config.roi_grid;
  const int s2 = grid * grid;
  if (f.channels() != c) {
    throw std::invalid_argument("VimForward: feature channels != model channels");
  }
  if (n == 0) return {};
  const int frames = static_cast<int>(qs.queries[0].rows());
  if (f.frames() != frames) {
    throw std::invalid_argument("VimForward: feature frames != query frames");
  }
  for (int i = 0; i < n; ++i) {
    if (qs.queries[i].rows() != frames || qs.queries[i].cols() != c ||
        qs.proposals[i].rows() != frames || qs.proposals[i].cols() != 4) {
      throw std::invalid_argument("VimForward: query state shape mismatch");
    }
  }
  if (p.filters.generator.rows() != c ||
      p.filters.generator.cols() != 2 * c * hid ||
      p.filters.projection.weight.rows() != s2 * c) {
    throw std::invalid_argument("VimForward: filter parameter shape mismatch");
  }

  // Rows ordered query-major, frame-minor.
  const int rows = n * frames;
  Matrix stacked(rows, c);
  for (int i = 0; i < n; ++i) stacked.middleRows(i * frames, frames) = qs.queries[i];
  const Matrix filters = stacked * p.filters.generator;

  Matrix flat(rows, s2 * c);
  for (int i = 0; i < n; ++i) {
    for (int t = 0; t < frames; ++t) {
      const int r = i * frames + t;
      const auto& prop = qs.proposals[i];
      const FrameBox box{prop(t, 0), prop(t, 1), prop(t, 2), prop(t, 3)};
      const Matrix roi = RoiAlign(f, box, t, grid);
      Eigen::Map<const Matrix> reduce(filters.row(r).data(), c, hid);
      Eigen::Map<const Matrix> expand(filters.row(r).data() + c * hid, hid, c);
      const Matrix filtered = Relu(Relu(roi * reduce) * expand);
      flat.row(r) = Eigen::Map<const RowVector>(filtered.data(), s2 * c);
    }
  }
  const Matrix updated = p.filters.projection.Apply(flat);

  std::vector<Matrix> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(updated.middleRows(i * frames, frames));
  return out;
}

HeadOutput HeadsForward(const std::vector<Matrix>& updated,
                        const StageParams& p) {
  HeadOutput out;
  const int n = static_cast<int>(updated.size());
  if (n == 0) return out;
  const int frames = static_cast<int>(updated[0].rows());
  Matrix stacked(n * frames, updated[0].cols());
  for (int i = 0; i < n; ++i) stacked.middleRows(i * frames, frames) = updated[i];

  const Matrix cls = p.face_cls.Apply(stacked);
  const Matrix boxes = ToValidBoxes(p.face_box.Apply(stacked));
  const Matrix blink = p.blink.Apply(stacked);

  out.face_scores.resize(n, frames);
  out.blink_scores.resize(n, frames);
  for (int i = 0; i < n; ++i) {
    for (int t = 0; t < frames; ++t) {
      out.face_scores(i, t) = Sigmoid(cls(i * frames + t, 0));
      out.blink_scores(i, t) = Sigmoid(blink(i * frames + t, 0));
    }
    out.boxes.push_back(boxes.middleRows(i * frames, frames));
  }
  return out;
}

ModelOutput ForwardClip(const VideoFeature& f, const ModelParams& params) {
  params.config.Validate();
  if (static_cast<int>(params.stages.size()) != params.config.num_iterations) {
    throw std::invalid_argument("ForwardClip: stage count != num_iterations");
  }
  ModelOutput out;
  QueryState qs = InitQueries(params, f.frames());
  for (const StageParams& stage : params.stages) {
    qs = QimForward(qs, stage, params.config);
    std::vector<Matrix> updated = VimForward(qs, f, stage, params.config);
    HeadOutput heads = HeadsForward(updated, stage);
    qs.queries = std::move(updated);
    qs.proposals = heads.boxes;
    out.iterations.push_back(std::move(heads));
  }
  return out;
}

}  // namespace blinkscope
