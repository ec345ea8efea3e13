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

#include "blinkscope/metrics.h"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "blinkscope/errors.h"
#include "blinkscope/geometry.h"

namespace blinkscope {

namespace {

constexpr int kBlinkMatchPercent = 50;

struct RankedHypothesis {
  int video;
  int hypothesis;
  double confidence;
};

// Pooled ranking order: confidence descending, then video_id, then index.
std::vector<RankedHypothesis> RankHypotheses(
    std::span<const VideoAnnotation> gts,
    std::span<const VideoPrediction> aligned) {
  std::vector<RankedHypothesis> ranked;
  std::vector<int> video_order(gts.size());
  std::iota(video_order.begin(), video_order.end(), 0);
  std::stable_sort(video_order.begin(), video_order.end(), [&](int a, int b) {
    return gts[a].video_id < gts[b].video_id;
  });
  for (int v : video_order) {
    const auto& hyps = aligned[v].hypotheses;
    for (std::size_t h = 0; h < hyps.size(); ++h) {
      ranked.push_back({v, static_cast<int>(h), hyps[h].confidence});
    }
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) {
                     return a.confidence > b.confidence;
                   });
  return ranked;
}

}  // namespace

ApResult AveragePrecision(std::span<const Detection> detections, int num_gt) {
  if (num_gt < 0) throw std::invalid_argument("AveragePrecision: num_gt < 0");
  if (num_gt == 0) return ApResult{0.0, true};

  std::vector<Detection> sorted(detections.begin(), detections.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Detection& a, const Detection& b) {
                     return a.confidence > b.confidence;
                   });
  const std::size_t n = sorted.size();
  std::vector<double> precision(n);
  int tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    tp += sorted[i].is_tp ? 1 : 0;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
  }
  for (std::size_t i = n; i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  // Recall rises by exactly 1/num_gt at each true positive.
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (sorted[i].is_tp) sum += precision[i];
  }
  return ApResult{sum / num_gt, false};
}

std::vector<VideoPrediction> AlignPredictions(
    std::span<const VideoAnnotation> gts, std::span<const VideoPrediction> preds) {
  std::map<std::string, int> index;
  for (std::size_t v = 0; v < gts.size(); ++v) {
    if (!index.emplace(gts[v].video_id, static_cast<int>(v)).second) {
      throw DataError("gt.videos[" + std::to_string(v) + "]",
                      "duplicate video_id '" + gts[v].video_id + "'");
    }
  }
  std::vector<VideoPrediction> aligned(gts.size());
  std::vector<char> seen(gts.size(), 0);
  for (std::size_t v = 0; v < gts.size(); ++v) {
    aligned[v].video_id = gts[v].video_id;
    aligned[v].num_frames = gts[v].num_frames;
    aligned[v].width = gts[v].width;
    aligned[v].height = gts[v].height;
  }
  for (std::size_t p = 0; p < preds.size(); ++p) {
    const std::string path = "pred.videos[" + std::to_string(p) + "]";
    auto it = index.find(preds[p].video_id);
    if (it == index.end()) {
      throw DataError(path, "video_id '" + preds[p].video_id +
                                "' not present in ground truth");
    }
    const int v = it->second;
    if (seen[v]) {
      throw DataError(path, "duplicate video_id '" + preds[p].video_id + "'");
    }
    if (preds[p].num_frames != gts[v].num_frames) {
      throw DataError(path, "num_frames " + std::to_string(preds[p].num_frames) +
                                " differs from ground truth " +
                                std::to_string(gts[v].num_frames));
    }
    for (std::size_t h = 0; h < preds[p].hypotheses.size(); ++h) {
      if (preds[p].hypotheses[h].boxes.size() !=
          static_cast<std::size_t>(gts[v].num_frames)) {
        throw DataError(path + ".hypotheses[" + std::to_string(h) + "]",
                        "box sequence length differs from num_frames");
      }
    }
    seen[v] = 1;
    aligned[v] = preds[p];
  }
  return aligned;
}

InstApResult InstAp(std::span<const VideoAnnotation> gts,
                    std::span<const VideoPrediction> preds) {
  const std::vector<VideoPrediction> aligned = AlignPredictions(gts, preds);

  // iou[v][h][g]; ineligible (never visible) instances are excluded.
  std::vector<std::vector<std::vector<double>>> iou(gts.size());
  std::vector<std::vector<char>> eligible(gts.size());
  InstApResult out;
  for (std::size_t v = 0; v < gts.size(); ++v) {
    for (const auto& track : gts[v].instances) {
      const bool ok = track.NumVisible() > 0;
      eligible[v].push_back(ok ? 1 : 0);
      out.num_gt += ok ? 1 : 0;
    }
    for (const auto& hyp : aligned[v].hypotheses) {
      std::vector<double> row;
      for (const auto& track : gts[v].instances) {
        row.push_back(TubeIou(hyp.boxes, track.boxes));
      }
      iou[v].push_back(std::move(row));
    }
  }

  const std::vector<RankedHypothesis> ranked = RankHypotheses(gts, aligned);
  double sum = 0.0;
  for (std::size_t k = 0; k < kInstIouPercents.size(); ++k) {
    const int percent = kInstIouPercents[k];
    const double threshold = PercentToThreshold(percent);
    std::vector<std::vector<char>> taken(gts.size());
    for (std::size_t v = 0; v < gts.size(); ++v) {
      taken[v].assign(gts[v].instances.size(), 0);
    }
    std::vector<Detection> detections;
    detections.reserve(ranked.size());
    for (const RankedHypothesis& r : ranked) {
      int best = -1;
      double best_iou = -1.0;
      const auto& row = iou[r.video][r.hypothesis];
      for (std::size_t g = 0; g < row.size(); ++g) {
        if (!eligible[r.video][g] || taken[r.video][g]) continue;
        if (row[g] > best_iou) {
          best_iou = row[g];
          best = static_cast<int>(g);
        }
      }
      const bool tp = best >= 0 && best_iou >= threshold;
      if (tp) {
        taken[r.video][best] = 1;
        if (percent == kBlinkMatchPercent) {
          out.tp_at_50.push_back({r.video, r.hypothesis, best, best_iou});
        }
      }
      detections.push_back({r.confidence, tp});
    }
    const ApResult ap = AveragePrecision(detections, out.num_gt);
    out.ap_at[k] = ap.ap;
    out.undefined = ap.undefined;
    sum += ap.ap;
  }
  out.mean_ap = sum / static_cast<double>(kInstIouPercents.size());
  std::sort(out.tp_at_50.begin(), out.tp_at_50.end(),
            [](const TpMatch& a, const TpMatch& b) {
              return std::tie(a.video, a.hypothesis) <
                     std::tie(b.video, b.hypothesis);
            });
  return out;
}

BlinkApResult BlinkAp(std::span<const VideoAnnotation> gts,
                      std::span<const VideoPrediction> aligned_preds,
                      std::span<const TpMatch> tp_matches,
                      double tiou_threshold) {
  struct RankedInterval {
    std::size_t match;
    int interval;
    double confidence;
  };
  std::vector<std::size_t> match_order(tp_matches.size());
  std::iota(match_order.begin(), match_order.end(), 0);
  std::stable_sort(match_order.begin(), match_order.end(),
                   [&](std::size_t a, std::size_t b) {
                     const auto& ma = tp_matches[a];
                     const auto& mb = tp_matches[b];
                     const auto& ia = gts[ma.video].video_id;
                     const auto& ib = gts[mb.video].video_id;
                     if (ia != ib) return ia < ib;
                     return ma.hypothesis < mb.hypothesis;
                   });

  BlinkApResult out;
  std::vector<RankedInterval> ranked;
  std::vector<std::vector<char>> taken(tp_matches.size());
  for (std::size_t m : match_order) {
    const TpMatch& match = tp_matches[m];
    const auto& hyp = aligned_preds[match.video].hypotheses[match.hypothesis];
    for (std::size_t k = 0; k < hyp.blink_intervals.size(); ++k) {
      ranked.push_back({m, static_cast<int>(k), hyp.blink_intervals[k].confidence});
    }
    const auto& track = gts[match.video].instances[match.instance];
    out.num_gt += static_cast<int>(track.blinks.size());
    taken[m].assign(track.blinks.size(), 0);
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.confidence > b.confidence;
  });

  std::vector<Detection> detections;
  detections.reserve(ranked.size());
  for (const RankedInterval& r : ranked) {
    const TpMatch& match = tp_matches[r.match];
    const BlinkInterval& pred = aligned_preds[match.video]
                                    .hypotheses[match.hypothesis]
                                    .blink_intervals[r.interval];
    const auto& gt_blinks = gts[match.video].instances[match.instance].blinks;
    int best = -1;
    double best_tiou = -1.0;
    for (std::size_t g = 0; g < gt_blinks.size(); ++g) {
      if (taken[r.match][g]) continue;
      const double tiou = IntervalTiou(pred, gt_blinks[g]);
      if (tiou > best_tiou) {
        best_tiou = tiou;
        best = static_cast<int>(g);
      }
    }
    const bool tp = best >= 0 && best_tiou >= tiou_threshold;
    if (tp) taken[r.match][best] = 1;
    detections.push_back({r.confidence, tp});
  }
  out.num_detections = static_cast<int>(detections.size());
  const ApResult ap = AveragePrecision(detections, out.num_gt);
  out.ap = ap.ap;
  out.undefined = ap.undefined;
  return out;
}

double EvalReport::InstApAt(int percent) const {
  for (std::size_t k = 0; k < kInstIouPercents.size(); ++k) {
    if (kInstIouPercents[k] == percent) return inst_ap_at[k];
  }
  throw std::out_of_range("no Inst-AP threshold at " + std::to_string(percent) + "%");
}

EvalReport Evaluate(std::span<const VideoAnnotation> gts,
                    std::span<const VideoPrediction> preds) {
  const std::vector<VideoPrediction> aligned = AlignPredictions(gts, preds);
  const InstApResult inst = InstAp(gts, aligned);
  const BlinkApResult b50 = BlinkAp(gts, aligned, inst.tp_at_50, 0.50);
  const BlinkApResult b75 = BlinkAp(gts, aligned, inst.tp_at_50, 0.75);

  EvalReport report;
  report.inst_ap = inst.mean_ap;
  report.inst_ap_at = inst.ap_at;
  report.blink_ap_50 = b50.ap;
  report.blink_ap_75 = b75.ap;

  if (inst.undefined) {
    report.diagnostics.push_back(
        "inst_ap undefined: no ground-truth instance has a visible frame; "
        "reported as 0");
  }
  if (inst.tp_at_50.empty()) {
    report.diagnostics.push_back(
        "blink_ap undefined: no true-positive instance at 3D IoU 0.50; "
        "reported as 0");
  } else if (b50.undefined) {
    report.diagnostics.push_back(
        "blink_ap undefined: matched ground-truth instances contain no blinks; "
        "reported as 0");
  }

  for (std::size_t v = 0; v < gts.size(); ++v) {
    VideoDiagnostics d;
    d.video_id = gts[v].video_id;
    for (const auto& track : gts[v].instances) {
      d.num_gt_instances += track.NumVisible() > 0 ? 1 : 0;
    }
    d.num_hypotheses = static_cast<int>(aligned[v].hypotheses.size());
    for (const TpMatch& m : inst.tp_at_50) {
      if (m.video != static_cast<int>(v)) continue;
      ++d.num_tp_at_50;
      d.num_gt_blinks_matched +=
          static_cast<int>(gts[v].instances[m.instance].blinks.size());
      d.num_pred_blinks_matched += static_cast<int>(
          aligned[v].hypotheses[m.hypothesis].blink_intervals.size());
    }
    report.per_video.push_back(std::move(d));
  }
  return report;
}

}  // namespace blinkscope
