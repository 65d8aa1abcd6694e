// Copyright 2026 The GlimpseKit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "glimpsekit/detection.hpp"

#include <algorithm>
#include <set>
#include <tuple>
#include <unordered_map>

#include "glimpsekit/error.hpp"

namespace gk {

namespace {

double safe_ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

}  // namespace

std::vector<Detection> oracle_detect(const Scene& scene, const BBox& window, int glimpse_step) {
  std::vector<Detection> out;
  for (const SceneObject& o : scene.objects) {
    const auto clip = intersect(o.box, window);
    if (!clip) continue;
    out.push_back({*clip, o.class_id, 1.0, glimpse_step, o.id});
  }
  return out;
}

std::vector<Detection> dedupe_detections(const std::vector<Detection>& dets) {
  std::unordered_map<int, std::size_t> best;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (!dets[i].object_id_hint) continue;
    auto [it, inserted] = best.try_emplace(*dets[i].object_id_hint, i);
    if (!inserted && dets[i].box.area() > dets[it->second].box.area()) it->second = i;
  }
  std::vector<Detection> out;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (!dets[i].object_id_hint || best.at(*dets[i].object_id_hint) == i) out.push_back(dets[i]);
  }
  return out;
}

MatchResult match_detections(const std::vector<Detection>& dets, const std::vector<SceneObject>& gt,
                             double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "IoU threshold must lie in (0, 1]", "iou_threshold");
  }
  struct Candidate {
    double iou;
    std::size_t det;
    int gt_id;
    std::size_t gt_index;
  };
  std::vector<Candidate> candidates;
  for (std::size_t d = 0; d < dets.size(); ++d) {
    for (std::size_t g = 0; g < gt.size(); ++g) {
      if (gt[g].class_id != dets[d].class_id) continue;
      const double v = iou(dets[d].box, gt[g].box);
      if (v >= iou_threshold) candidates.push_back({v, d, gt[g].id, g});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    return std::tie(a.det, a.gt_id) < std::tie(b.det, b.gt_id);
  });

  std::vector<bool> det_used(dets.size(), false);
  std::vector<bool> gt_used(gt.size(), false);
  MatchResult result;
  for (const Candidate& c : candidates) {
    if (det_used[c.det] || gt_used[c.gt_index]) continue;
    det_used[c.det] = true;
    gt_used[c.gt_index] = true;
    result.pairs.push_back({c.det, c.gt_id, c.iou});
  }
  for (std::size_t d = 0; d < dets.size(); ++d) {
    auto& counts = result.per_class[dets[d].class_id];
    (det_used[d] ? counts.tp : counts.fp) += 1;
  }
  for (std::size_t g = 0; g < gt.size(); ++g) {
    auto& counts = result.per_class[gt[g].class_id];
    if (!gt_used[g]) counts.fn += 1;
  }
  return result;
}

Metrics prf_metrics(const MatchResult& m, const std::vector<SceneObject>& gt) {
  Metrics out;
  for (const auto& [cls, c] : m.per_class) {
    Prf p;
    p.precision = safe_ratio(c.tp, c.tp + c.fp);
    p.recall = safe_ratio(c.tp, c.tp + c.fn);
    p.f1 = safe_ratio(2.0 * p.precision * p.recall, p.precision + p.recall);
    out.per_class[cls] = p;
  }
  std::set<int> gt_classes;
  for (const SceneObject& o : gt) gt_classes.insert(o.class_id);
  for (int cls : gt_classes) {
    const auto it = out.per_class.find(cls);
    const Prf p = it != out.per_class.end() ? it->second : Prf{};
    out.average.precision += p.precision;
    out.average.recall += p.recall;
    out.average.f1 += p.f1;
  }
  if (!gt_classes.empty()) {
    const double n = static_cast<double>(gt_classes.size());
    out.average.precision /= n;
    out.average.recall /= n;
    out.average.f1 /= n;
  }
  return out;
}

MetricCurve metric_curve(const Scene& scene, const std::vector<std::vector<Detection>>& detections_per_glimpse,
                         double iou_threshold) {
  MetricCurve curve;
  std::vector<Detection> accumulated;
  for (std::size_t k = 0; k < detections_per_glimpse.size(); ++k) {
    const auto& step = detections_per_glimpse[k];
    accumulated.insert(accumulated.end(), step.begin(), step.end());
    const auto deduped = dedupe_detections(accumulated);
    const auto match = match_detections(deduped, scene.objects, iou_threshold);
    curve.push_back({static_cast<int>(k + 1), prf_metrics(match, scene.objects)});
  }
  return curve;
}

}  // namespace gk
