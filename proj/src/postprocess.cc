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

#include "blinkscope/postprocess.h"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "blinkscope/errors.h"
#include "blinkscope/geometry.h"

namespace blinkscope {

std::vector<BlinkInterval> MergeBlinks(std::span<const double> scores,
                                       double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw std::invalid_argument("MergeBlinks: threshold must be in (0, 1)");
  }
  std::vector<BlinkInterval> out;
  const int n = static_cast<int>(scores.size());
  int t = 0;
  while (t < n) {
    if (!(scores[t] > threshold)) {
      ++t;
      continue;
    }
    const int start = t;
    double sum = 0.0;
    while (t < n && scores[t] > threshold) sum += scores[t++];
    out.push_back(BlinkInterval{start, t - 1, sum / (t - start)});
  }
  return out;
}

ClipPrediction Finalize(const ModelOutput& out, int clip_start, int keep_top,
                        double blink_threshold) {
  if (keep_top < 1) throw std::invalid_argument("Finalize: keep_top must be >= 1");
  if (out.iterations.empty()) {
    throw std::invalid_argument("Finalize: model output has no iterations");
  }
  const HeadOutput& last = out.final_output();
  const int n = static_cast<int>(last.face_scores.rows());
  const int frames = static_cast<int>(last.face_scores.cols());

  std::vector<InstancePrediction> all(n);
  for (int i = 0; i < n; ++i) {
    InstancePrediction& h = all[i];
    h.face_scores.resize(frames);
    h.blink_scores.resize(frames);
    h.boxes.resize(frames);
    for (int t = 0; t < frames; ++t) {
      h.face_scores[t] = last.face_scores(i, t);
      h.blink_scores[t] = last.blink_scores(i, t);
      const auto& b = last.boxes[i];
      h.boxes[t] = FrameBox{b(t, 0), b(t, 1), b(t, 2), b(t, 3)};
    }
    h.blink_intervals = MergeBlinks(h.blink_scores, blink_threshold);
    h.confidence = MeanScore(h.face_scores);
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return all[a].confidence > all[b].confidence;
  });

  ClipPrediction clip;
  clip.clip_start = clip_start;
  clip.length = frames;
  const int kept = std::min(keep_top, n);
  for (int k = 0; k < kept; ++k) clip.hypotheses.push_back(std::move(all[order[k]]));
  return clip;
}

std::vector<ClipRange> PlanClips(int num_frames, int clip_length, int stride) {
  if (num_frames < 1 || clip_length < 1 || stride < 1 || stride >= clip_length) {
    throw std::invalid_argument(
        "PlanClips: need num_frames >= 1 and 1 <= stride < clip_length");
  }
  std::vector<ClipRange> out;
  for (int start = 0;; start += stride) {
    const int length = std::min(clip_length, num_frames - start);
    out.push_back(ClipRange{start, length});
    if (start + clip_length >= num_frames) break;
  }
  return out;
}

double OverlapIou(const ClipPrediction& a, int ha, const ClipPrediction& b,
                  int hb) {
  const int lo = std::max(a.clip_start, b.clip_start);
  const int hi = std::min(a.clip_start + a.length, b.clip_start + b.length);
  if (hi <= lo) return 0.0;
  const Tube& ta = a.hypotheses[ha].boxes;
  const Tube& tb = b.hypotheses[hb].boxes;
  double sum = 0.0;
  for (int t = lo; t < hi; ++t) {
    const auto& ba = ta[t - a.clip_start];
    const auto& bb = tb[t - b.clip_start];
    if (ba && bb) sum += BoxIou(*ba, *bb);
  }
  return sum / (hi - lo);
}

VideoPrediction LinkClips(std::span<const ClipPrediction> clips,
                          double iou_threshold, double blink_threshold) {
  VideoPrediction video;
  if (clips.empty()) return video;
  video.video_id = clips[0].video_id;

  for (std::size_t k = 0; k < clips.size(); ++k) {
    const ClipPrediction& c = clips[k];
    const std::string path = "clips[" + std::to_string(k) + "]";
    if (c.video_id != video.video_id) {
      throw DataError(path, "video_id '" + c.video_id + "' differs from '" +
                                video.video_id + "'");
    }
    if (c.length < 1 || c.clip_start < 0) throw DataError(path, "empty clip");
    for (const auto& h : c.hypotheses) {
      if (h.NumFrames() != c.length || static_cast<int>(h.boxes.size()) != c.length ||
          static_cast<int>(h.blink_scores.size()) != c.length) {
        throw DataError(path, "hypothesis length differs from clip length");
      }
    }
    if (k > 0) {
      const ClipPrediction& prev = clips[k - 1];
      if (c.clip_start <= prev.clip_start ||
          c.clip_start >= prev.clip_start + prev.length) {
        throw DataError(path, "does not overlap the previous clip");
      }
    }
    video.num_frames = std::max(video.num_frames, c.clip_start + c.length);
  }

  // chain_of[k][h] = index of the instance chain hypothesis h of clip k joins.
  std::vector<std::vector<std::pair<int, int>>> chains;
  std::vector<std::vector<int>> chain_of(clips.size());
  for (std::size_t h = 0; h < clips[0].hypotheses.size(); ++h) {
    chain_of[0].push_back(static_cast<int>(chains.size()));
    chains.push_back({{0, static_cast<int>(h)}});
  }
  for (std::size_t k = 1; k < clips.size(); ++k) {
    const ClipPrediction& prev = clips[k - 1];
    const ClipPrediction& cur = clips[k];
    const int np = static_cast<int>(prev.hypotheses.size());
    const int nc = static_cast<int>(cur.hypotheses.size());
    std::vector<std::tuple<double, int, int>> candidates;
    for (int a = 0; a < np; ++a) {
      for (int b = 0; b < nc; ++b) {
        const double iou = OverlapIou(prev, a, cur, b);
        if (iou > iou_threshold) candidates.emplace_back(iou, a, b);
      }
    }
    std::sort(candidates.begin(), candidates.end(), [](const auto& x, const auto& y) {
      if (std::get<0>(x) != std::get<0>(y)) return std::get<0>(x) > std::get<0>(y);
      if (std::get<1>(x) != std::get<1>(y)) return std::get<1>(x) < std::get<1>(y);
      return std::get<2>(x) < std::get<2>(y);
    });
    std::vector<char> prev_used(np, 0);
    chain_of[k].assign(nc, -1);
    for (const auto& [iou, a, b] : candidates) {
      if (prev_used[a] || chain_of[k][b] >= 0) continue;
      prev_used[a] = 1;
      chain_of[k][b] = chain_of[k - 1][a];
      chains[chain_of[k][b]].emplace_back(static_cast<int>(k), b);
    }
    for (int b = 0; b < nc; ++b) {
      if (chain_of[k][b] >= 0) continue;
      chain_of[k][b] = static_cast<int>(chains.size());
      chains.push_back({{static_cast<int>(k), b}});
    }
  }

  const int total = video.num_frames;
  for (const auto& chain : chains) {
    InstancePrediction inst;
    inst.face_scores.assign(total, 0.0);
    inst.blink_scores.assign(total, 0.0);
    inst.boxes.assign(total, std::nullopt);
    std::vector<int> covered(total, 0);
    std::vector<int> boxed(total, 0);
    std::vector<FrameBox> box_sum(total);
    for (const auto& [k, h] : chain) {
      const ClipPrediction& clip = clips[k];
      const InstancePrediction& src = clip.hypotheses[h];
      for (int local = 0; local < clip.length; ++local) {
        const int t = clip.clip_start + local;
        ++covered[t];
        inst.face_scores[t] += src.face_scores[local];
        inst.blink_scores[t] += src.blink_scores[local];
        if (const auto& b = src.boxes[local]) {
          ++boxed[t];
          box_sum[t].x1 += b->x1;
          box_sum[t].y1 += b->y1;
          box_sum[t].x2 += b->x2;
          box_sum[t].y2 += b->y2;
        }
      }
    }
    for (int t = 0; t < total; ++t) {
      if (covered[t] > 1) {
        inst.face_scores[t] /= covered[t];
        inst.blink_scores[t] /= covered[t];
      }
      if (boxed[t] > 0) {
        const double n = boxed[t];
        inst.boxes[t] = FrameBox{box_sum[t].x1 / n, box_sum[t].y1 / n,
                                 box_sum[t].x2 / n, box_sum[t].y2 / n};
      }
    }
    inst.blink_intervals = MergeBlinks(inst.blink_scores, blink_threshold);
    inst.confidence = MeanScore(inst.face_scores);
    video.hypotheses.push_back(std::move(inst));
  }
  return video;
}

}  // namespace blinkscope
