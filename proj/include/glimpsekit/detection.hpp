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

#ifndef GLIMPSEKIT_DETECTION_HPP
#define GLIMPSEKIT_DETECTION_HPP

#include <map>
#include <optional>
#include <vector>

#include "glimpsekit/geometry.hpp"

namespace gk {

inline constexpr double kDefaultIouThreshold = 0.5;

struct Detection {
  BBox box;
  int class_id = 0;
  double score = 1.0;
  // 1-based glimpse step that produced the detection.
  int source_glimpse = 0;
  // Ground-truth id; only the oracle detector sets it.
  std::optional<int> object_id_hint;

  friend bool operator==(const Detection&, const Detection&) = default;
};

struct MatchCounts {
  int tp = 0;
  int fp = 0;
  int fn = 0;
};

struct MatchedPair {
  std::size_t detection = 0;  // index into the matched detection list
  int gt_id = 0;
  double iou = 0.0;
};

struct MatchResult {
  std::map<int, MatchCounts> per_class;
  std::vector<MatchedPair> pairs;
};

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct Metrics {
  std::map<int, Prf> per_class;
  // Unweighted mean over classes present in the ground truth.
  Prf average;
};

struct MetricRecord {
  int k = 0;
  Metrics metrics;
};

using MetricCurve = std::vector<MetricRecord>;

// Every ground-truth object overlapping `window` is reported with its box
// clipped to the window, its true class, score 1 and its id as hint.
std::vector<Detection> oracle_detect(const Scene& scene, const BBox& window, int glimpse_step = 0);

// Among detections sharing an object_id_hint keeps the largest box (first one
// on equal area); detections without a hint pass through. Order is preserved.
std::vector<Detection> dedupe_detections(const std::vector<Detection>& dets);

// Class-wise greedy matching by descending IoU; ties prefer the lower
// detection index, then the lower ground-truth id. A pair is accepted when
// IoU >= threshold and neither side is already matched.
MatchResult match_detections(const std::vector<Detection>& dets, const std::vector<SceneObject>& gt,
                             double iou_threshold = kDefaultIouThreshold);

// 0/0 evaluates to 0 everywhere. `gt` determines which classes enter the
// average.
Metrics prf_metrics(const MatchResult& m, const std::vector<SceneObject>& gt);

// One record per k = 1..detections_per_glimpse.size(): the union of the first
// k glimpses' detections is deduplicated and matched against the full ground
// truth.
MetricCurve metric_curve(const Scene& scene, const std::vector<std::vector<Detection>>& detections_per_glimpse,
                         double iou_threshold = kDefaultIouThreshold);

}  // namespace gk

#endif  // GLIMPSEKIT_DETECTION_HPP
