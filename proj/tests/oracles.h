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

#ifndef BLINKSCOPE_TESTS_ORACLES_H_
#define BLINKSCOPE_TESTS_ORACLES_H_

// Deliberately naive reference implementations used to cross-check the
// library. They share no code with it beyond the plain data types.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "blinkscope/annotation.h"
#include "blinkscope/netcore.h"

namespace blinkscope::oracle {

// Portable test RNG.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double Uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  int Int(int lo, int hi) {
    if (hi <= lo) return lo;
    return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  bool Bernoulli(double p) { return Uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

// --- assignment ------------------------------------------------------------

// Minimum over every injection of the smaller side into the larger one.
inline double EnumerateAssignmentCost(int rows, int cols,
                                      const std::vector<double>& cost) {
  const bool transpose = rows > cols;
  const int small = transpose ? cols : rows;
  const int large = transpose ? rows : cols;
  auto at = [&](int s, int l) {
    return transpose ? cost[l * cols + s] : cost[s * cols + l];
  };
  std::vector<int> perm(large);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double sum = 0.0;
    for (int s = 0; s < small; ++s) sum += at(s, perm[s]);
    best = std::min(best, sum);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// --- geometry --------------------------------------------------------------

// Counts the cells of a res x res grid covered by the box. Exact when the
// corners lie on the grid.
inline long long RasterCells(const FrameBox& b, int res) {
  long long n = 0;
  for (int y = 0; y < res; ++y) {
    const double cy = (y + 0.5) / res;
    if (cy < b.y1 || cy > b.y2) continue;
    for (int x = 0; x < res; ++x) {
      const double cx = (x + 0.5) / res;
      if (cx >= b.x1 && cx <= b.x2) ++n;
    }
  }
  return n;
}

inline long long RasterOverlapCells(const FrameBox& a, const FrameBox& b, int res) {
  long long n = 0;
  for (int y = 0; y < res; ++y) {
    const double cy = (y + 0.5) / res;
    if (cy < a.y1 || cy > a.y2 || cy < b.y1 || cy > b.y2) continue;
    for (int x = 0; x < res; ++x) {
      const double cx = (x + 0.5) / res;
      if (cx >= a.x1 && cx <= a.x2 && cx >= b.x1 && cx <= b.x2) ++n;
    }
  }
  return n;
}

inline double RasterTubeIou(const Tube& p, const Tube& g, int res) {
  long long inter = 0;
  long long uni = 0;
  for (std::size_t t = 0; t < p.size(); ++t) {
    const long long ap = p[t] ? RasterCells(*p[t], res) : 0;
    const long long ag = g[t] ? RasterCells(*g[t], res) : 0;
    const long long i = p[t] && g[t] ? RasterOverlapCells(*p[t], *g[t], res) : 0;
    inter += i;
    uni += ap + ag - i;
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

inline double EnumerateTiou(const BlinkInterval& a, const BlinkInterval& b) {
  std::set<int> sa, sb, all;
  for (int t = a.start; t <= a.end; ++t) sa.insert(t), all.insert(t);
  for (int t = b.start; t <= b.end; ++t) sb.insert(t), all.insert(t);
  int inter = 0;
  for (int t : sa) inter += sb.count(t) ? 1 : 0;
  return all.empty() ? 0.0 : static_cast<double>(inter) / all.size();
}

// Box on the res grid, corners at multiples of 1 / res.
inline FrameBox GridBox(Rng& rng, int res, int min_side = 1) {
  const int x1 = rng.Int(0, res - min_side);
  const int y1 = rng.Int(0, res - min_side);
  const int x2 = rng.Int(x1 + min_side, res);
  const int y2 = rng.Int(y1 + min_side, res);
  return FrameBox{static_cast<double>(x1) / res, static_cast<double>(y1) / res,
                  static_cast<double>(x2) / res, static_cast<double>(y2) / res};
}

// --- metrics ---------------------------------------------------------------

inline double PlainBoxArea(const FrameBox& b) {
  return std::max(0.0, b.x2 - b.x1) * std::max(0.0, b.y2 - b.y1);
}

inline double PlainTubeIou(const Tube& p, const Tube& g) {
  double inter = 0.0;
  double uni = 0.0;
  for (std::size_t t = 0; t < p.size(); ++t) {
    double i = 0.0;
    if (p[t] && g[t]) {
      const double w = std::min(p[t]->x2, g[t]->x2) - std::max(p[t]->x1, g[t]->x1);
      const double h = std::min(p[t]->y2, g[t]->y2) - std::max(p[t]->y1, g[t]->y1);
      if (w > 0 && h > 0) i = w * h;
    }
    inter += i;
    uni += (p[t] ? PlainBoxArea(*p[t]) : 0.0) + (g[t] ? PlainBoxArea(*g[t]) : 0.0) - i;
  }
  return uni > 0 ? inter / uni : 0.0;
}

// Direct integration of the interpolated PR curve: at each ranked position
// recall steps by 1/num_gt on a hit, weighted by the best precision at that
// or any later rank.
inline double IntegratePr(const std::vector<bool>& hits, int num_gt) {
  if (num_gt == 0) return 0.0;
  const std::size_t n = hits.size();
  std::vector<double> precision(n), recall(n);
  int tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    tp += hits[i] ? 1 : 0;
    precision[i] = static_cast<double>(tp) / (i + 1);
    recall[i] = static_cast<double>(tp) / num_gt;
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double best = 0.0;
    for (std::size_t j = i; j < n; ++j) best = std::max(best, precision[j]);
    ap += (recall[i] - prev_recall) * best;
    prev_recall = recall[i];
  }
  return ap;
}

struct NaiveReport {
  std::array<double, 10> inst_ap_at{};
  double inst_ap = 0.0;
  double blink_ap_50 = 0.0;
  double blink_ap_75 = 0.0;
};

// Brute-force evaluation. Hypotheses are ranked by (confidence desc,
// video_id, index); each takes the best-overlapping free ground truth of its
// video (lowest index on ties) and is a hit if the overlap reaches the
// threshold.
inline NaiveReport NaiveEvaluate(const std::vector<VideoAnnotation>& gts,
                                 const std::vector<VideoPrediction>& preds) {
  struct Entry {
    double conf;
    std::string video_id;
    int hyp;
    const VideoAnnotation* gt;
    const VideoPrediction* pred;
  };
  std::vector<Entry> entries;
  int num_gt = 0;
  for (const auto& g : gts) {
    for (const auto& inst : g.instances) {
      num_gt += std::count(inst.presence.begin(), inst.presence.end(), 1) > 0;
    }
    for (const auto& p : preds) {
      if (p.video_id != g.video_id) continue;
      for (std::size_t h = 0; h < p.hypotheses.size(); ++h) {
        entries.push_back({p.hypotheses[h].confidence, g.video_id,
                           static_cast<int>(h), &g, &p});
      }
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return std::make_tuple(-a.conf, a.video_id, a.hyp) <
           std::make_tuple(-b.conf, b.video_id, b.hyp);
  });

  NaiveReport r;
  struct Hit {
    const Entry* entry;
    int instance;
  };
  std::vector<Hit> hits50;
  for (int k = 0; k < 10; ++k) {
    const double threshold = (50 + 5 * k) / 100.0;
    std::set<std::pair<std::string, int>> used;
    std::vector<bool> hits;
    for (const Entry& e : entries) {
      int best = -1;
      double best_iou = -1.0;
      for (std::size_t i = 0; i < e.gt->instances.size(); ++i) {
        const auto& inst = e.gt->instances[i];
        if (std::count(inst.presence.begin(), inst.presence.end(), 1) == 0) continue;
        if (used.count({e.video_id, static_cast<int>(i)})) continue;
        const double iou = PlainTubeIou(e.pred->hypotheses[e.hyp].boxes, inst.boxes);
        if (iou > best_iou) best_iou = iou, best = static_cast<int>(i);
      }
      const bool hit = best >= 0 && best_iou >= threshold;
      if (hit) {
        used.insert({e.video_id, best});
        if (k == 0) hits50.push_back({&e, best});
      }
      hits.push_back(hit);
    }
    r.inst_ap_at[k] = IntegratePr(hits, num_gt);
  }
  double sum = 0.0;
  for (double v : r.inst_ap_at) sum += v;
  r.inst_ap = sum / 10.0;

  for (double tiou_thr : {0.50, 0.75}) {
    struct BlinkEntry {
      double conf;
      std::string video_id;
      int hyp;
      int k;
      std::size_t hit;
    };
    std::vector<BlinkEntry> blinks;
    int blink_gt = 0;
    for (std::size_t m = 0; m < hits50.size(); ++m) {
      const Entry& e = *hits50[m].entry;
      blink_gt += e.gt->instances[hits50[m].instance].blinks.size();
      const auto& iv = e.pred->hypotheses[e.hyp].blink_intervals;
      for (std::size_t k = 0; k < iv.size(); ++k) {
        blinks.push_back({iv[k].confidence, e.video_id, e.hyp, static_cast<int>(k), m});
      }
    }
    std::sort(blinks.begin(), blinks.end(), [](const auto& a, const auto& b) {
      return std::make_tuple(-a.conf, a.video_id, a.hyp, a.k) <
             std::make_tuple(-b.conf, b.video_id, b.hyp, b.k);
    });
    std::set<std::pair<std::size_t, int>> used;
    std::vector<bool> hits;
    for (const auto& b : blinks) {
      const Entry& e = *hits50[b.hit].entry;
      const BlinkInterval& pi = e.pred->hypotheses[e.hyp].blink_intervals[b.k];
      const auto& gb = e.gt->instances[hits50[b.hit].instance].blinks;
      int best = -1;
      double best_tiou = -1.0;
      for (std::size_t g = 0; g < gb.size(); ++g) {
        if (used.count({b.hit, static_cast<int>(g)})) continue;
        const double tiou = EnumerateTiou(pi, gb[g]);
        if (tiou > best_tiou) best_tiou = tiou, best = static_cast<int>(g);
      }
      const bool hit = best >= 0 && best_tiou >= tiou_thr;
      if (hit) used.insert({b.hit, best});
      hits.push_back(hit);
    }
    (tiou_thr == 0.50 ? r.blink_ap_50 : r.blink_ap_75) = IntegratePr(hits, blink_gt);
  }
  return r;
}

// --- netcore ---------------------------------------------------------------

inline double NaiveLinear(const Linear& l, const std::vector<double>& x, int out) {
  double s = l.bias(out);
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * l.weight(i, out);
  return s;
}

// Self-attention over the rows of x written with explicit loops.
inline Matrix NaiveMhsa(const Matrix& x, const AttentionParams& p, int heads) {
  const int n = static_cast<int>(x.rows());
  const int c = static_cast<int>(x.cols());
  const int dk = c / heads;
  std::vector<std::vector<double>> q(n), k(n), v(n);
  for (int i = 0; i < n; ++i) {
    std::vector<double> row(x.row(i).data(), x.row(i).data() + c);
    for (int o = 0; o < c; ++o) {
      q[i].push_back(NaiveLinear(p.query, row, o));
      k[i].push_back(NaiveLinear(p.key, row, o));
      v[i].push_back(NaiveLinear(p.value, row, o));
    }
  }
  Matrix out = x;
  for (int i = 0; i < n; ++i) {
    std::vector<double> concat(c, 0.0);
    for (int h = 0; h < heads; ++h) {
      std::vector<double> logits(n);
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int d = 0; d < dk; ++d) s += q[i][h * dk + d] * k[j][h * dk + d];
        logits[j] = s / std::sqrt(static_cast<double>(dk));
      }
      const double mx = *std::max_element(logits.begin(), logits.end());
      double z = 0.0;
      for (double& l : logits) z += (l = std::exp(l - mx));
      for (int j = 0; j < n; ++j) {
        for (int d = 0; d < dk; ++d) concat[h * dk + d] += logits[j] / z * v[j][h * dk + d];
      }
    }
    for (int o = 0; o < c; ++o) out(i, o) += NaiveLinear(p.output, concat, o);
  }
  return out;
}

inline double Bilinear(const VideoFeature& f, int t, int c, double u, double v) {
  u = std::clamp(u, 0.0, f.width() - 1.0);
  v = std::clamp(v, 0.0, f.height() - 1.0);
  const int x0 = static_cast<int>(std::floor(u));
  const int y0 = static_cast<int>(std::floor(v));
  const int x1 = std::min(x0 + 1, f.width() - 1);
  const int y1 = std::min(y0 + 1, f.height() - 1);
  const double ax = u - x0;
  const double ay = v - y0;
  return f.at(t, c, y0, x0) * (1 - ax) * (1 - ay) + f.at(t, c, y0, x1) * ax * (1 - ay) +
         f.at(t, c, y1, x0) * (1 - ax) * ay + f.at(t, c, y1, x1) * ax * ay;
}

// One query on one frame: RoI align, the two generated 1x1 filters with a
// ReLU after each, flatten (bins major, channels minor) and project.
inline std::vector<double> NaiveVimRow(const VideoFeature& f, int t,
                                       const std::vector<double>& query,
                                       const FrameBox& box,
                                       const DynamicFilterParams& p, int grid) {
  const int c = f.channels();
  const int hid = c / 4;
  std::vector<double> gen(2 * c * hid, 0.0);
  for (int o = 0; o < 2 * c * hid; ++o) {
    for (int i = 0; i < c; ++i) gen[o] += query[i] * p.generator(i, o);
  }
  auto w1 = [&](int i, int o) { return gen[i * hid + o]; };
  auto w2 = [&](int i, int o) { return gen[c * hid + i * c + o]; };

  std::vector<double> flat;
  const double bw = (box.x2 - box.x1) * f.width() / grid;
  const double bh = (box.y2 - box.y1) * f.height() / grid;
  for (int by = 0; by < grid; ++by) {
    for (int bx = 0; bx < grid; ++bx) {
      const double u = box.x1 * f.width() + (bx + 0.5) * bw - 0.5;
      const double v = box.y1 * f.height() + (by + 0.5) * bh - 0.5;
      std::vector<double> s(c);
      for (int ch = 0; ch < c; ++ch) s[ch] = Bilinear(f, t, ch, u, v);
      std::vector<double> mid(hid, 0.0);
      for (int o = 0; o < hid; ++o) {
        for (int i = 0; i < c; ++i) mid[o] += s[i] * w1(i, o);
        mid[o] = std::max(0.0, mid[o]);
      }
      for (int o = 0; o < c; ++o) {
        double a = 0.0;
        for (int i = 0; i < hid; ++i) a += mid[i] * w2(i, o);
        flat.push_back(std::max(0.0, a));
      }
    }
  }
  std::vector<double> out(c);
  for (int o = 0; o < c; ++o) out[o] = NaiveLinear(p.projection, flat, o);
  return out;
}

}  // namespace blinkscope::oracle

#endif  // BLINKSCOPE_TESTS_ORACLES_H_
