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

#ifndef GLIMPSEKIT_EXPERIMENT_HPP
#define GLIMPSEKIT_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "glimpsekit/detection.hpp"
#include "glimpsekit/geometry.hpp"
#include "glimpsekit/objectness.hpp"
#include "glimpsekit/openset.hpp"
#include "glimpsekit/policies.hpp"
#include "glimpsekit/scenegen.hpp"

namespace gk {

// Every random stream in an experiment is seeded from
//   master_seed ^ role constant
// and then mixed with a per-scene index and, for glimpse policies, the FNV-1a
// hash of the policy label. Adding or removing a policy therefore never changes
// another policy's stream.
namespace seed_role {
inline constexpr std::uint64_t kScenes = 0x5343454e45000001ULL;
inline constexpr std::uint64_t kDegrade = 0x4445475241000002ULL;
inline constexpr std::uint64_t kPolicy = 0x504f4c4943000003ULL;
inline constexpr std::uint64_t kPrototypes = 0x50524f544f000004ULL;
inline constexpr std::uint64_t kTileNoise = 0x54494c454e000005ULL;
inline constexpr std::uint64_t kExemplar = 0x4558454d50000006ULL;
inline constexpr std::uint64_t kTarget = 0x5441524745000007ULL;
inline constexpr std::uint64_t kTexture = 0x5445585455000008ULL;
}  // namespace seed_role

constexpr std::uint64_t sub_seed(std::uint64_t master, std::uint64_t role) noexcept { return master ^ role; }

enum class Mode { closedset, openset };
enum class ObjectnessSource { groundtruth, groundtruth_degraded, gaussian_bbox, file };
enum class DetectorKind { oracle, external };

struct NamedPolicy {
  std::string label;
  PolicyConfig cfg;
  bool explicit_seed = false;
};

struct NamedSearch {
  std::string label;
  SearchKind kind = SearchKind::g_map_mstr;
};

struct ExperimentConfig {
  Mode mode = Mode::closedset;
  std::uint64_t seed = 0;

  // Scene source: a generator (with scene_count scenes) or explicit files.
  std::optional<GeneratorConfig> generator;
  int scene_count = 1;
  std::vector<std::filesystem::path> scene_files;

  ObjectnessSource objectness = ObjectnessSource::groundtruth;
  DegradeParams degrade;
  std::filesystem::path objectness_dir;  // ObjectnessSource::file: <dir>/<scene_id>.objmap

  int d_gist = 128;
  int d_glimpse = 512;
  int tile_size = 512;

  // closedset
  std::vector<NamedPolicy> policies;  // sorted by label
  DetectorKind detector = DetectorKind::oracle;
  std::filesystem::path detections_path;
  double min_score = 0.0;
  double iou_threshold = kDefaultIouThreshold;
  double texture_std = 0.05;  // gist rendering of file scenes

  // openset
  std::vector<NamedSearch> searches;  // sorted by label
  int embedding_dim = 32;
  double embedding_noise_std = 0.5;
  double background_weight = 1.0;
  int target_class = -1;  // -1: seeded draw among the classes present in each scene

  // 0 = hardware concurrency; GLIMPSEKIT_THREADS caps either.
  int threads = 0;
};

// Parses the JSON experiment configuration; relative paths resolve against
// `base_dir`. Errors name the offending field ("policies[1].kind").
ExperimentConfig parse_experiment_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct PreparedScene {
  std::string id;
  std::size_t index = 0;
  Scene scene;
  GeneratorConfig render;  // texture parameters and seed for the gist image
};

// Generated scenes are named scene_000, scene_001, ...; file scenes by their
// stem. The result is sorted by id.
std::vector<PreparedScene> prepare_scenes(const ExperimentConfig& cfg);

GistMap build_objectness(const ExperimentConfig& cfg, const PreparedScene& scene, int gist_width, int gist_height);

struct ClosedSetPolicyResult {
  std::string label;
  int budget = 0;  // configured n_glimpse
  GlimpseSet glimpses;
  MetricCurve curve;
};

struct ClosedSetSceneResult {
  std::string scene_id;
  std::vector<ClosedSetPolicyResult> policies;
};

struct OpenSetPolicyResult {
  std::string label;
  SearchTrajectory trajectory;
  RecallCurve curve;
  double aurc = 0.0;
};

struct OpenSetSceneResult {
  std::string scene_id;
  int target_class = -1;
  TileGrid grid;
  TileScores scores;
  std::vector<OpenSetPolicyResult> policies;
  std::string diagnostic;  // non-empty when the scene was skipped
};

std::vector<ClosedSetSceneResult> run_closedset(const ExperimentConfig& cfg);
std::vector<OpenSetSceneResult> run_openset(const ExperimentConfig& cfg);

struct ClosedSetSummaryRow {
  std::string label;
  int k = 0;
  Prf mean;  // class-averaged metrics averaged over scenes
};

// Mean class-averaged P/R/F1 at k = 1..max budget. A policy that stopped
// before k contributes its final value.
std::vector<ClosedSetSummaryRow> summarize_closedset(const std::vector<ClosedSetSceneResult>& results);

struct OpenSetSummary {
  std::string label;
  double mean_aurc = 0.0;
  int scenes = 0;
  // Mean recall at normalized looks 0.01, 0.02, ..., 1.00.
  std::vector<double> mean_recall;
};

std::vector<OpenSetSummary> summarize_openset(const std::vector<OpenSetSceneResult>& results);

// CSV renderers (headers from io.hpp).
std::string glimpse_log_csv(const std::vector<ClosedSetSceneResult>& results, std::string_view label);
std::string metrics_csv(const std::vector<ClosedSetSceneResult>& results);
std::string closedset_summary_csv(const std::vector<ClosedSetSummaryRow>& rows);
std::string trajectories_csv(const std::vector<OpenSetSceneResult>& results);
std::string openset_summary_csv(const std::vector<OpenSetSummary>& summaries);
std::string openset_aurc_csv(const std::vector<OpenSetSummary>& summaries);

// Runs the configured mode and writes its CSVs into out_dir. Returns the
// written paths in a fixed order.
std::vector<std::filesystem::path> run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

// Writes <id>.json, objectness/<id>.objmap and gist/<id>.objmap for every
// configured scene.
std::vector<std::filesystem::path> generate_scenes(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

// Scores an external detections CSV against the *.json scenes in scenes_dir
// (scene id = file stem) and writes a metrics CSV with policy "external".
void evaluate_detections(const std::filesystem::path& detections_csv, const std::filesystem::path& scenes_dir,
                         const std::filesystem::path& out_csv, double iou_threshold = kDefaultIouThreshold,
                         double min_score = 0.0);

// Worker count: `requested` when positive, else the hardware concurrency,
// capped by GLIMPSEKIT_THREADS when it is set and positive.
int resolve_thread_count(int requested);

}  // namespace gk

#endif  // GLIMPSEKIT_EXPERIMENT_HPP
