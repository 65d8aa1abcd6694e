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

#include "glimpsekit/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "glimpsekit/error.hpp"
#include "glimpsekit/io.hpp"
#include "glimpsekit/rng.hpp"
#include "json.hpp"

namespace gk {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kSummaryPoints = 100;

std::string join_path(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& path) {
  if (!obj.is_object()) throw Error(ErrorCode::validation, "must be an object", path.empty() ? "config" : path);
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw Error(ErrorCode::validation, "unknown key", join_path(path, key));
    }
  }
}

const json* find(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

int get_int(const json& obj, const char* key, const std::string& path, int fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number_integer()) throw Error(ErrorCode::validation, "must be an integer", join_path(path, key));
  const auto x = v->get<std::int64_t>();
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
    throw Error(ErrorCode::validation, "integer out of range", join_path(path, key));
  }
  return static_cast<int>(x);
}

std::uint64_t get_u64(const json& obj, const char* key, const std::string& path, std::uint64_t fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (v->is_number_unsigned()) return v->get<std::uint64_t>();
  if (v->is_number_integer() && v->get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v->get<std::int64_t>());
  throw Error(ErrorCode::validation, "must be a non-negative integer", join_path(path, key));
}

double get_double(const json& obj, const char* key, const std::string& path, double fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number()) throw Error(ErrorCode::validation, "must be a number", join_path(path, key));
  return v->get<double>();
}

std::string get_string(const json& obj, const char* key, const std::string& path, std::string fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_string()) throw Error(ErrorCode::validation, "must be a string", join_path(path, key));
  return v->get<std::string>();
}

IntRange get_range(const json& obj, const char* key, const std::string& path, IntRange fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  const std::string field = join_path(path, key);
  if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number_integer() || !(*v)[1].is_number_integer()) {
    throw Error(ErrorCode::validation, "must be [min, max]", field);
  }
  return {(*v)[0].get<int>(), (*v)[1].get<int>()};
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

void require_exists(const fs::path& p, const std::string& field) {
  if (!fs::exists(p)) throw Error(ErrorCode::io, "'" + p.string() + "' does not exist", field);
}

GeneratorConfig parse_generator(const json& g, const std::string& path) {
  check_keys(g,
             {"width", "height", "classes", "clusters", "objects_per_cluster", "object_size", "cluster_radius",
              "class_purity", "background_texture_std", "placement"},
             path);
  GeneratorConfig cfg;
  cfg.width = get_int(g, "width", path, cfg.width);
  cfg.height = get_int(g, "height", path, cfg.height);
  cfg.classes = get_int(g, "classes", path, cfg.classes);
  cfg.clusters = get_int(g, "clusters", path, cfg.clusters);
  cfg.objects_per_cluster = get_range(g, "objects_per_cluster", path, cfg.objects_per_cluster);
  cfg.object_size = get_range(g, "object_size", path, cfg.object_size);
  cfg.cluster_radius = get_double(g, "cluster_radius", path, cfg.cluster_radius);
  cfg.class_purity = get_double(g, "class_purity", path, cfg.class_purity);
  cfg.background_texture_std = get_double(g, "background_texture_std", path, cfg.background_texture_std);
  const std::string placement = get_string(g, "placement", path, "clustered");
  if (placement == "clustered") {
    cfg.placement = Placement::clustered;
  } else if (placement == "uniform") {
    cfg.placement = Placement::uniform;
  } else {
    throw Error(ErrorCode::validation, "expected 'clustered' or 'uniform'", join_path(path, "placement"));
  }
  try {
    validate_generator_config(cfg);
  } catch (const Error& e) {
    throw Error(e.code(), e.what(), path);
  }
  return cfg;
}

void parse_scenes(const json& s, const fs::path& base, ExperimentConfig& cfg) {
  check_keys(s, {"generator", "count", "files", "dir"}, "scenes");
  const int sources = (find(s, "generator") ? 1 : 0) + (find(s, "files") ? 1 : 0) + (find(s, "dir") ? 1 : 0);
  if (sources != 1) throw Error(ErrorCode::validation, "exactly one of generator, files, dir is required", "scenes");
  if (const json* g = find(s, "generator")) {
    cfg.generator = parse_generator(*g, "scenes.generator");
    cfg.scene_count = get_int(s, "count", "scenes", 1);
    if (cfg.scene_count < 1) throw Error(ErrorCode::validation, "must be >= 1", "scenes.count");
    return;
  }
  if (find(s, "count")) throw Error(ErrorCode::validation, "only valid with a generator", "scenes.count");
  if (const json* files = find(s, "files")) {
    if (!files->is_array() || files->empty()) throw Error(ErrorCode::validation, "must be a non-empty array", "scenes.files");
    for (std::size_t k = 0; k < files->size(); ++k) {
      const std::string field = "scenes.files[" + std::to_string(k) + "]";
      if (!(*files)[k].is_string()) throw Error(ErrorCode::validation, "must be a string", field);
      const fs::path p = resolve(base, (*files)[k].get<std::string>());
      require_exists(p, field);
      cfg.scene_files.push_back(p);
    }
    return;
  }
  const fs::path dir = resolve(base, get_string(s, "dir", "scenes", ""));
  if (!fs::is_directory(dir)) throw Error(ErrorCode::io, "'" + dir.string() + "' is not a directory", "scenes.dir");
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") cfg.scene_files.push_back(entry.path());
  }
  std::sort(cfg.scene_files.begin(), cfg.scene_files.end());
  if (cfg.scene_files.empty()) throw Error(ErrorCode::validation, "no *.json scenes in '" + dir.string() + "'", "scenes.dir");
}

void parse_objectness(const json& o, const fs::path& base, ExperimentConfig& cfg) {
  check_keys(o, {"source", "blur_sigma", "noise_std", "fp_rate", "dir"}, "objectness");
  const std::string source = get_string(o, "source", "objectness", "groundtruth");
  if (source == "groundtruth") {
    cfg.objectness = ObjectnessSource::groundtruth;
  } else if (source == "groundtruth_degraded") {
    cfg.objectness = ObjectnessSource::groundtruth_degraded;
  } else if (source == "gaussian_bbox") {
    cfg.objectness = ObjectnessSource::gaussian_bbox;
  } else if (source == "file") {
    cfg.objectness = ObjectnessSource::file;
  } else {
    throw Error(ErrorCode::validation, "unknown objectness source '" + source + "'", "objectness.source");
  }
  cfg.degrade.blur_sigma = get_double(o, "blur_sigma", "objectness", 0.0);
  cfg.degrade.noise_std = get_double(o, "noise_std", "objectness", 0.0);
  cfg.degrade.fp_rate = get_double(o, "fp_rate", "objectness", 0.0);
  if (cfg.degrade.blur_sigma < 0.0) throw Error(ErrorCode::validation, "must be >= 0", "objectness.blur_sigma");
  if (cfg.degrade.noise_std < 0.0) throw Error(ErrorCode::validation, "must be >= 0", "objectness.noise_std");
  if (cfg.degrade.fp_rate < 0.0 || cfg.degrade.fp_rate > 1.0) {
    throw Error(ErrorCode::validation, "must be in [0, 1]", "objectness.fp_rate");
  }
  if (cfg.objectness == ObjectnessSource::file) {
    const json* dir = find(o, "dir");
    if (!dir) throw Error(ErrorCode::validation, "required when source is 'file'", "objectness.dir");
    cfg.objectness_dir = resolve(base, get_string(o, "dir", "objectness", ""));
    require_exists(cfg.objectness_dir, "objectness.dir");
  }
}

void parse_policies(const json& list, ExperimentConfig& cfg) {
  if (!list.is_array()) throw Error(ErrorCode::validation, "must be an array", "policies");
  if (list.empty()) throw Error(ErrorCode::validation, "no policies configured", "policies");
  std::set<std::string> labels;
  for (std::size_t k = 0; k < list.size(); ++k) {
    const std::string path = "policies[" + std::to_string(k) + "]";
    const json& p = list[k];
    if (!find(p, "kind")) {
      if (!p.is_object()) throw Error(ErrorCode::validation, "must be an object", path);
      throw Error(ErrorCode::validation, "missing field", path + ".kind");
    }
    const std::string kind = get_string(p, "kind", path, "");
    const std::string label = get_string(p, "name", path, kind);
    if (label.empty() || label.find_first_of(",\n\r\"/\\") != std::string::npos) {
      throw Error(ErrorCode::validation, "must be non-empty and free of , \" / \\ and newlines", path + ".name");
    }
    if (!labels.insert(label).second) throw Error(ErrorCode::validation, "duplicate policy label '" + label + "'", path + ".name");
    try {
      if (cfg.mode == Mode::closedset) {
        check_keys(p, {"kind", "name", "n_glimpse", "beta", "coverage_threshold", "seed"}, path);
        NamedPolicy np;
        np.label = label;
        try {
          np.cfg.kind = parse_policy_kind(kind);
        } catch (const Error& e) {
          throw Error(e.code(), e.what(), path + ".kind");
        }
        np.cfg.n_glimpse = get_int(p, "n_glimpse", path, np.cfg.n_glimpse);
        np.cfg.beta = get_double(p, "beta", path, np.cfg.beta);
        np.cfg.coverage_threshold = get_double(p, "coverage_threshold", path, np.cfg.coverage_threshold);
        np.explicit_seed = find(p, "seed") != nullptr;
        np.cfg.seed = get_u64(p, "seed", path, 0);
        validate_policy_config(np.cfg);
        cfg.policies.push_back(std::move(np));
      } else {
        check_keys(p, {"kind", "name"}, path);
        NamedSearch ns;
        ns.label = label;
        try {
          ns.kind = parse_search_kind(kind);
        } catch (const Error& e) {
          throw Error(e.code(), e.what(), path + ".kind");
        }
        cfg.searches.push_back(std::move(ns));
      }
    } catch (const Error& e) {
      if (e.field().rfind(path, 0) == 0) throw;
      throw Error(e.code(), e.what(), path);
    }
  }
  std::sort(cfg.policies.begin(), cfg.policies.end(),
            [](const NamedPolicy& a, const NamedPolicy& b) { return a.label < b.label; });
  std::sort(cfg.searches.begin(), cfg.searches.end(),
            [](const NamedSearch& a, const NamedSearch& b) { return a.label < b.label; });
}

std::string scene_name(std::size_t index, std::size_t count) {
  std::string digits = std::to_string(index);
  const std::size_t width = std::max<std::size_t>(3, std::to_string(count > 0 ? count - 1 : 0).size());
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return "scene_" + digits;
}

// Runs fn(0..n-1) on up to `threads` workers. The first failure by index is
// rethrown after all workers finish.
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  std::vector<std::exception_ptr> errors(n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

template <class Fn>
auto with_context(const std::string& context, Fn fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw e.prefixed(context);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::invalid_argument, context + ": " + e.what());
  }
}

int class_count(const std::vector<PreparedScene>& scenes, const ExperimentConfig& cfg) {
  int count = cfg.generator ? cfg.generator->classes : 0;
  for (const PreparedScene& s : scenes) {
    for (const SceneObject& o : s.scene.objects) count = std::max(count, o.class_id + 1);
  }
  return std::max(count, 1);
}

using DetectionIndex = std::map<std::string, std::map<int, std::vector<Detection>>>;

DetectionIndex index_detections(const std::vector<ExternalDetection>& dets, double min_score) {
  DetectionIndex index;
  for (const ExternalDetection& d : dets) {
    if (d.detection.score < min_score) continue;
    index[d.scene_id][d.detection.source_glimpse].push_back(d.detection);
  }
  return index;
}

void append_metric_rows(std::string& out, const std::string& label, const std::string& scene_id,
                        const MetricRecord& rec) {
  auto row = [&](int class_id, const Prf& m) {
    out += label + "," + scene_id + "," + std::to_string(rec.k) + "," + std::to_string(class_id) + "," +
           format_fixed(m.precision) + "," + format_fixed(m.recall) + "," + format_fixed(m.f1) + "\n";
  };
  for (const auto& [class_id, m] : rec.metrics.per_class) row(class_id, m);
  row(-1, rec.metrics.average);
}

}  // namespace

int resolve_thread_count(int requested) {
  const unsigned hw = std::thread::hardware_concurrency();
  int n = requested > 0 ? requested : (hw == 0 ? 1 : static_cast<int>(hw));
  if (const char* env = std::getenv("GLIMPSEKIT_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap > 0) n = static_cast<int>(std::min<long>(n, cap));
  }
  return n;
}

ExperimentConfig parse_experiment_config(std::string_view json_text, const fs::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::parse, std::string("malformed config JSON: ") + e.what());
  }
  check_keys(j,
             {"mode", "seed", "scenes", "objectness", "geometry", "policies", "detector", "iou_threshold", "embedding",
              "target_class", "render", "threads"},
             "");
  ExperimentConfig cfg;
  const std::string mode = get_string(j, "mode", "", "closedset");
  if (mode == "closedset") {
    cfg.mode = Mode::closedset;
  } else if (mode == "openset") {
    cfg.mode = Mode::openset;
  } else {
    throw Error(ErrorCode::validation, "expected 'closedset' or 'openset'", "mode");
  }
  cfg.seed = get_u64(j, "seed", "", 0);
  cfg.threads = get_int(j, "threads", "", 0);
  if (cfg.threads < 0) throw Error(ErrorCode::validation, "must be >= 0", "threads");

  const json* scenes = find(j, "scenes");
  if (!scenes) throw Error(ErrorCode::validation, "missing field", "scenes");
  parse_scenes(*scenes, base_dir, cfg);
  if (const json* o = find(j, "objectness")) parse_objectness(*o, base_dir, cfg);

  if (const json* g = find(j, "geometry")) {
    check_keys(*g, {"d_gist", "d_glimpse", "tile_size"}, "geometry");
    cfg.d_gist = get_int(*g, "d_gist", "geometry", cfg.d_gist);
    cfg.d_glimpse = get_int(*g, "d_glimpse", "geometry", cfg.d_glimpse);
    cfg.tile_size = get_int(*g, "tile_size", "geometry", cfg.tile_size);
  }
  if (cfg.d_gist < 1) throw Error(ErrorCode::validation, "must be >= 1", "geometry.d_gist");
  if (cfg.d_glimpse < 1) throw Error(ErrorCode::validation, "must be >= 1", "geometry.d_glimpse");
  if (cfg.tile_size < 1) throw Error(ErrorCode::validation, "must be >= 1", "geometry.tile_size");

  const json* policies = find(j, "policies");
  if (!policies) throw Error(ErrorCode::validation, "no policies configured", "policies");
  parse_policies(*policies, cfg);

  if (const json* d = find(j, "detector")) {
    check_keys(*d, {"kind", "path", "min_score"}, "detector");
    const std::string kind = get_string(*d, "kind", "detector", "oracle");
    if (kind == "oracle") {
      cfg.detector = DetectorKind::oracle;
    } else if (kind == "external") {
      cfg.detector = DetectorKind::external;
      if (!find(*d, "path")) throw Error(ErrorCode::validation, "required for external detections", "detector.path");
      cfg.detections_path = resolve(base_dir, get_string(*d, "path", "detector", ""));
      require_exists(cfg.detections_path, "detector.path");
    } else {
      throw Error(ErrorCode::validation, "expected 'oracle' or 'external'", "detector.kind");
    }
    cfg.min_score = get_double(*d, "min_score", "detector", 0.0);
  }
  cfg.iou_threshold = get_double(j, "iou_threshold", "", cfg.iou_threshold);
  if (!(cfg.iou_threshold > 0.0 && cfg.iou_threshold <= 1.0)) {
    throw Error(ErrorCode::validation, "must be in (0, 1]", "iou_threshold");
  }

  if (const json* e = find(j, "embedding")) {
    check_keys(*e, {"dim", "noise_std", "background_weight"}, "embedding");
    cfg.embedding_dim = get_int(*e, "dim", "embedding", cfg.embedding_dim);
    cfg.embedding_noise_std = get_double(*e, "noise_std", "embedding", cfg.embedding_noise_std);
    cfg.background_weight = get_double(*e, "background_weight", "embedding", cfg.background_weight);
  }
  if (cfg.embedding_dim < 1) throw Error(ErrorCode::validation, "must be >= 1", "embedding.dim");
  if (cfg.embedding_noise_std < 0.0) throw Error(ErrorCode::validation, "must be >= 0", "embedding.noise_std");
  if (cfg.background_weight < 0.0) throw Error(ErrorCode::validation, "must be >= 0", "embedding.background_weight");
  cfg.target_class = get_int(j, "target_class", "", -1);
  if (cfg.target_class < -1) throw Error(ErrorCode::validation, "must be >= -1", "target_class");

  if (const json* r = find(j, "render")) {
    check_keys(*r, {"texture_std"}, "render");
    cfg.texture_std = get_double(*r, "texture_std", "render", cfg.texture_std);
    if (cfg.texture_std < 0.0) throw Error(ErrorCode::validation, "must be >= 0", "render.texture_std");
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  try {
    return parse_experiment_config(read_file(path), path.parent_path());
  } catch (const Error& e) {
    throw e.prefixed(path.string());
  }
}

std::vector<PreparedScene> prepare_scenes(const ExperimentConfig& cfg) {
  std::vector<PreparedScene> scenes;
  const std::uint64_t scene_seed = sub_seed(cfg.seed, seed_role::kScenes);
  const std::uint64_t texture_seed = sub_seed(cfg.seed, seed_role::kTexture);
  if (cfg.generator) {
    const auto n = static_cast<std::size_t>(cfg.scene_count);
    scenes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      GeneratorConfig g = *cfg.generator;
      g.seed = mix_seed(scene_seed, i);
      scenes[i].id = scene_name(i, n);
      scenes[i].index = i;
      scenes[i].render = g;
      scenes[i].scene = generate_scene(g, [&, i](const std::string& msg) {
        static std::mutex mu;
        std::lock_guard lock(mu);
        std::cerr << "warning: " << scene_name(i, n) << ": " << msg << "\n";
      });
    }
  } else {
    std::vector<std::pair<std::string, fs::path>> named;
    for (const fs::path& p : cfg.scene_files) named.emplace_back(p.stem().string(), p);
    std::sort(named.begin(), named.end());
    for (std::size_t i = 1; i < named.size(); ++i) {
      if (named[i].first == named[i - 1].first) {
        throw Error(ErrorCode::validation, "duplicate scene id '" + named[i].first + "'", "scenes");
      }
    }
    for (std::size_t i = 0; i < named.size(); ++i) {
      PreparedScene s;
      s.id = named[i].first;
      s.index = i;
      s.scene = load_scene(named[i].second);
      s.render.width = s.scene.width;
      s.render.height = s.scene.height;
      s.render.background_texture_std = cfg.texture_std;
      s.render.seed = mix_seed(texture_seed, i);
      scenes.push_back(std::move(s));
    }
  }
  return scenes;
}

GistMap build_objectness(const ExperimentConfig& cfg, const PreparedScene& s, int gist_width, int gist_height) {
  switch (cfg.objectness) {
    case ObjectnessSource::groundtruth:
      return downsample_mask(rasterize_binary_mask(s.scene), gist_width, gist_height);
    case ObjectnessSource::groundtruth_degraded: {
      const GistMap clean = downsample_mask(rasterize_binary_mask(s.scene), gist_width, gist_height);
      return degrade(clean, cfg.degrade, mix_seed(sub_seed(cfg.seed, seed_role::kDegrade), s.index));
    }
    case ObjectnessSource::gaussian_bbox:
      return gaussian_bbox_density(s.scene, gist_width, gist_height);
    case ObjectnessSource::file: {
      GistMap map = load_gist_map(cfg.objectness_dir / (s.id + ".objmap"));
      if (map.width() != gist_width || map.height() != gist_height) {
        throw Error(ErrorCode::validation,
                    "objectness map is " + std::to_string(map.width()) + "x" + std::to_string(map.height()) +
                        ", gist geometry needs " + std::to_string(gist_width) + "x" + std::to_string(gist_height),
                    "objectness");
      }
      return map;
    }
  }
  throw Error(ErrorCode::invalid_argument, "unknown objectness source");
}

std::vector<ClosedSetSceneResult> run_closedset(const ExperimentConfig& cfg) {
  if (cfg.policies.empty()) throw Error(ErrorCode::validation, "no policies configured", "policies");
  const std::vector<PreparedScene> scenes = prepare_scenes(cfg);
  DetectionIndex external;
  if (cfg.detector == DetectorKind::external) {
    external = index_detections(load_detections_csv(cfg.detections_path), cfg.min_score);
  }
  const std::uint64_t policy_seed = sub_seed(cfg.seed, seed_role::kPolicy);

  std::vector<ClosedSetSceneResult> results(scenes.size());
  parallel_for(scenes.size(), resolve_thread_count(cfg.threads), [&](std::size_t i) {
    const PreparedScene& s = scenes[i];
    with_context("scene " + s.id, [&] {
      const GistGeometry geom = GistGeometry::make(s.scene.width, s.scene.height, cfg.d_gist, cfg.d_glimpse);
      const GistMap pi = build_objectness(cfg, s, geom.gist_width, geom.gist_height);
      std::optional<RealGrid> intensity;
      ClosedSetSceneResult& out = results[i];
      out.scene_id = s.id;
      for (const NamedPolicy& np : cfg.policies) {
        with_context("policy " + np.label, [&] {
          PolicyConfig pc = np.cfg;
          if (!np.explicit_seed) pc.seed = mix_seed(mix_seed(policy_seed, fnv1a(np.label)), s.index);
          if (pc.kind == PolicyKind::entropy && !intensity) {
            intensity = render_gist_image(s.scene, geom.gist_width, geom.gist_height, s.render);
          }
          const PolicyInputs inputs{&pi, intensity ? &*intensity : nullptr};
          GlimpseSet set = apply_stopping(run_policy(inputs, geom, pc), pc);

          std::vector<std::vector<Detection>> per_glimpse(set.positions.size());
          if (cfg.detector == DetectorKind::oracle) {
            for (std::size_t k = 0; k < set.positions.size(); ++k) {
              per_glimpse[k] = oracle_detect(s.scene, glimpse_window(set.positions[k], geom), static_cast<int>(k) + 1);
            }
          } else if (const auto it = external.find(s.id); it != external.end()) {
            for (std::size_t k = 0; k < set.positions.size(); ++k) {
              if (const auto jt = it->second.find(static_cast<int>(k) + 1); jt != it->second.end()) {
                per_glimpse[k] = jt->second;
              }
            }
          }
          ClosedSetPolicyResult r;
          r.label = np.label;
          r.budget = pc.n_glimpse;
          r.curve = metric_curve(s.scene, per_glimpse, cfg.iou_threshold);
          r.glimpses = std::move(set);
          out.policies.push_back(std::move(r));
        });
      }
    });
  });
  return results;
}

std::vector<OpenSetSceneResult> run_openset(const ExperimentConfig& cfg) {
  if (cfg.searches.empty()) throw Error(ErrorCode::validation, "no policies configured", "policies");
  const std::vector<PreparedScene> scenes = prepare_scenes(cfg);
  const int classes = class_count(scenes, cfg);
  if (cfg.target_class >= classes) {
    throw Error(ErrorCode::validation, "exceeds the largest class id in the scenes", "target_class");
  }
  // One more prototype than classes: the last one is the background direction.
  const std::vector<Embedding> protos =
      make_prototypes(classes + 1, cfg.embedding_dim, sub_seed(cfg.seed, seed_role::kPrototypes));
  std::vector<Embedding> class_protos(protos.begin(), protos.end() - 1);
  Embedding background = protos.back();
  for (double& v : background) v *= cfg.background_weight;

  std::vector<OpenSetSceneResult> results(scenes.size());
  parallel_for(scenes.size(), resolve_thread_count(cfg.threads), [&](std::size_t i) {
    const PreparedScene& s = scenes[i];
    with_context("scene " + s.id, [&] {
      OpenSetSceneResult& out = results[i];
      out.scene_id = s.id;
      int target = cfg.target_class;
      if (target < 0) {
        std::set<int> present;
        for (const SceneObject& o : s.scene.objects) present.insert(o.class_id);
        if (present.empty()) {
          out.diagnostic = "scene has no objects";
          return;
        }
        Rng rng(mix_seed(sub_seed(cfg.seed, seed_role::kTarget), s.index));
        const auto pick = rng.uniform_int(0, static_cast<std::int64_t>(present.size()) - 1);
        target = *std::next(present.begin(), static_cast<std::ptrdiff_t>(pick));
      }
      out.target_class = target;

      const auto [gw, gh] = gist_extent(s.scene.width, s.scene.height, cfg.d_gist);
      const GistMap pi = build_objectness(cfg, s, gw, gh);

      out.grid = tile_image(s.scene.width, s.scene.height, cfg.tile_size);
      const SyntheticEmbedder embedder(s.scene, class_protos, background, cfg.embedding_noise_std,
                                       mix_seed(sub_seed(cfg.seed, seed_role::kTileNoise), s.index));
      const TargetSpec spec = make_target(class_protos, target, cfg.embedding_noise_std,
                                          mix_seed(sub_seed(cfg.seed, seed_role::kExemplar), s.index));
      out.scores.embeddings = embed_tiles(embedder, out.grid);
      out.scores.exemplar = spec.exemplar;
      out.scores.likelihood = likelihood_map(out.scores.embeddings, spec);
      out.scores.prior = tile_prior(pi, out.grid, s.scene.width, s.scene.height);
      out.scores.posterior = posterior_map(out.scores.likelihood, out.scores.prior);

      for (const NamedSearch& ns : cfg.searches) {
        OpenSetPolicyResult r;
        r.label = ns.label;
        r.trajectory = run_search(ns.kind, out.grid, out.scores);
        r.curve = recall_vs_looks(r.trajectory, s.scene, out.grid, target);
        r.trajectory.recall.clear();
        for (const RecallPoint& p : r.curve.points) r.trajectory.recall.push_back(p.recall);
        r.aurc = area_under_recall(r.curve);
        out.policies.push_back(std::move(r));
      }
    });
  });
  return results;
}

std::vector<ClosedSetSummaryRow> summarize_closedset(const std::vector<ClosedSetSceneResult>& results) {
  // label -> per-scene curves
  std::map<std::string, std::vector<const MetricCurve*>> by_label;
  std::map<std::string, int> max_k;
  for (const ClosedSetSceneResult& s : results) {
    for (const ClosedSetPolicyResult& p : s.policies) {
      by_label[p.label].push_back(&p.curve);
      max_k[p.label] = std::max(max_k[p.label], p.budget);
    }
  }
  std::vector<ClosedSetSummaryRow> rows;
  for (const auto& [label, curves] : by_label) {
    for (int k = 1; k <= max_k[label]; ++k) {
      ClosedSetSummaryRow row;
      row.label = label;
      row.k = k;
      for (const MetricCurve* c : curves) {
        if (c->empty()) continue;
        const Prf& m = (*c)[static_cast<std::size_t>(std::min<int>(k, static_cast<int>(c->size())) - 1)].metrics.average;
        row.mean.precision += m.precision;
        row.mean.recall += m.recall;
        row.mean.f1 += m.f1;
      }
      const auto n = static_cast<double>(curves.size());
      row.mean.precision /= n;
      row.mean.recall /= n;
      row.mean.f1 /= n;
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<OpenSetSummary> summarize_openset(const std::vector<OpenSetSceneResult>& results) {
  std::map<std::string, OpenSetSummary> by_label;
  for (const OpenSetSceneResult& s : results) {
    for (const OpenSetPolicyResult& p : s.policies) {
      OpenSetSummary& sum = by_label[p.label];
      sum.label = p.label;
      if (sum.mean_recall.empty()) sum.mean_recall.assign(kSummaryPoints, 0.0);
      if (p.curve.points.empty()) continue;
      ++sum.scenes;
      sum.mean_aurc += p.aurc;
      const std::size_t n = p.curve.points.size();
      for (int j = 0; j < kSummaryPoints; ++j) {
        // Looks needed to reach fraction (j+1)/100 of the image.
        const auto looks = static_cast<std::size_t>(
            std::ceil(static_cast<double>(j + 1) * static_cast<double>(p.trajectory.total_tiles) / kSummaryPoints -
                      1e-9));
        const std::size_t idx = std::min(std::max<std::size_t>(looks, 1), n) - 1;
        sum.mean_recall[static_cast<std::size_t>(j)] += p.curve.points[idx].recall;
      }
    }
  }
  std::vector<OpenSetSummary> out;
  for (auto& [label, sum] : by_label) {
    if (sum.scenes > 0) {
      sum.mean_aurc /= sum.scenes;
      for (double& r : sum.mean_recall) r /= sum.scenes;
    }
    out.push_back(std::move(sum));
  }
  return out;
}

std::string glimpse_log_csv(const std::vector<ClosedSetSceneResult>& results, std::string_view label) {
  std::string out(kGlimpseLogHeader);
  out += "\n";
  for (const ClosedSetSceneResult& s : results) {
    for (const ClosedSetPolicyResult& p : s.policies) {
      if (p.label != label) continue;
      const GlimpseSet& g = p.glimpses;
      for (std::size_t k = 0; k < g.positions.size(); ++k) {
        const GridPos vhr = gist_to_vhr(g.positions[k], g.geom);
        const bool last = k + 1 == g.positions.size();
        out += s.scene_id + "," + std::to_string(k + 1) + "," + std::to_string(g.positions[k].row) + "," +
               std::to_string(g.positions[k].col) + "," + std::to_string(vhr.row) + "," + std::to_string(vhr.col) +
               "," + std::to_string(g.geom.d_glimpse) + "," + format_fixed(g.cum_coverage[k]) + "," +
               std::string(to_string(last ? g.stop_reason : StopReason::none)) + "\n";
      }
    }
  }
  return out;
}

std::string metrics_csv(const std::vector<ClosedSetSceneResult>& results) {
  std::string out(kMetricsHeader);
  out += "\n";
  for (const ClosedSetSceneResult& s : results) {
    for (const ClosedSetPolicyResult& p : s.policies) {
      for (const MetricRecord& rec : p.curve) append_metric_rows(out, p.label, s.scene_id, rec);
    }
  }
  return out;
}

std::string closedset_summary_csv(const std::vector<ClosedSetSummaryRow>& rows) {
  std::string out = "policy,k,mean_precision,mean_recall,mean_f1\n";
  for (const ClosedSetSummaryRow& r : rows) {
    out += r.label + "," + std::to_string(r.k) + "," + format_fixed(r.mean.precision) + "," +
           format_fixed(r.mean.recall) + "," + format_fixed(r.mean.f1) + "\n";
  }
  return out;
}

std::string trajectories_csv(const std::vector<OpenSetSceneResult>& results) {
  std::string out(kTrajectoryHeader);
  out += "\n";
  for (const OpenSetSceneResult& s : results) {
    for (const OpenSetPolicyResult& p : s.policies) {
      for (std::size_t k = 0; k < p.trajectory.order.size() && k < p.curve.points.size(); ++k) {
        const std::size_t t = p.trajectory.order[k];
        const Tile& tile = s.grid.tiles[t];
        out += s.scene_id + "," + p.label + "," + std::to_string(k + 1) + "," + std::to_string(tile.i) + "," +
               std::to_string(tile.j) + "," + format_general(s.scores.likelihood[t]) + "," +
               format_general(s.scores.prior[t]) + "," + format_general(s.scores.posterior[t]) + "," +
               format_fixed(p.curve.points[k].recall) + "," + format_fixed(p.curve.points[k].normalized_looks) + "\n";
      }
    }
  }
  return out;
}

std::string openset_summary_csv(const std::vector<OpenSetSummary>& summaries) {
  std::string out = "policy,normalized_looks,mean_recall\n";
  for (const OpenSetSummary& s : summaries) {
    for (std::size_t j = 0; j < s.mean_recall.size(); ++j) {
      out += s.label + "," + format_fixed(static_cast<double>(j + 1) / kSummaryPoints) + "," +
             format_fixed(s.mean_recall[j]) + "\n";
    }
  }
  return out;
}

std::string openset_aurc_csv(const std::vector<OpenSetSummary>& summaries) {
  std::string out = "policy,mean_aurc,scenes\n";
  for (const OpenSetSummary& s : summaries) {
    out += s.label + "," + format_fixed(s.mean_aurc) + "," + std::to_string(s.scenes) + "\n";
  }
  return out;
}

std::vector<fs::path> run_experiment(const ExperimentConfig& cfg, const fs::path& out_dir) {
  std::vector<fs::path> written;
  auto emit = [&](const std::string& name, const std::string& contents) {
    const fs::path p = out_dir / name;
    write_file(p, contents);
    written.push_back(p);
  };
  if (cfg.mode == Mode::closedset) {
    const auto results = run_closedset(cfg);
    for (const NamedPolicy& np : cfg.policies) emit("glimpses_" + np.label + ".csv", glimpse_log_csv(results, np.label));
    emit("metrics.csv", metrics_csv(results));
    emit("closedset_summary.csv", closedset_summary_csv(summarize_closedset(results)));
  } else {
    const auto results = run_openset(cfg);
    for (const OpenSetSceneResult& s : results) {
      if (!s.diagnostic.empty()) std::cerr << "warning: " << s.scene_id << ": skipped, " << s.diagnostic << "\n";
    }
    const auto summaries = summarize_openset(results);
    emit("trajectories.csv", trajectories_csv(results));
    emit("openset_summary.csv", openset_summary_csv(summaries));
    emit("openset_aurc.csv", openset_aurc_csv(summaries));
  }
  return written;
}

std::vector<fs::path> generate_scenes(const ExperimentConfig& cfg, const fs::path& out_dir) {
  const std::vector<PreparedScene> scenes = prepare_scenes(cfg);
  std::vector<std::vector<fs::path>> per_scene(scenes.size());
  parallel_for(scenes.size(), resolve_thread_count(cfg.threads), [&](std::size_t i) {
    const PreparedScene& s = scenes[i];
    with_context("scene " + s.id, [&] {
      const auto [gw, gh] = gist_extent(s.scene.width, s.scene.height, cfg.d_gist);
      const fs::path scene_path = out_dir / (s.id + ".json");
      const fs::path obj_path = out_dir / "objectness" / (s.id + ".objmap");
      const fs::path gist_path = out_dir / "gist" / (s.id + ".objmap");
      save_scene(s.scene, scene_path);
      save_map(build_objectness(cfg, s, gw, gh), obj_path);
      save_map(render_gist_image(s.scene, gw, gh, s.render), gist_path);
      per_scene[i] = {scene_path, obj_path, gist_path};
    });
  });
  std::vector<fs::path> written;
  for (auto& v : per_scene) written.insert(written.end(), v.begin(), v.end());
  return written;
}

void evaluate_detections(const fs::path& detections_csv, const fs::path& scenes_dir, const fs::path& out_csv,
                         double iou_threshold, double min_score) {
  if (!fs::is_directory(scenes_dir)) throw Error(ErrorCode::io, "'" + scenes_dir.string() + "' is not a directory");
  std::map<std::string, Scene> scenes;
  for (const auto& entry : fs::directory_iterator(scenes_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      scenes.emplace(entry.path().stem().string(), load_scene(entry.path()));
    }
  }
  if (scenes.empty()) throw Error(ErrorCode::validation, "no *.json scenes in '" + scenes_dir.string() + "'");
  const DetectionIndex index = index_detections(load_detections_csv(detections_csv), min_score);
  for (const auto& [scene_id, steps] : index) {
    if (!scenes.count(scene_id)) {
      throw Error(ErrorCode::validation, "detections reference unknown scene '" + scene_id + "'",
                  detections_csv.string());
    }
  }
  std::string out(kMetricsHeader);
  out += "\n";
  for (const auto& [scene_id, scene] : scenes) {
    std::vector<std::vector<Detection>> per_glimpse;
    if (const auto it = index.find(scene_id); it != index.end()) {
      per_glimpse.resize(static_cast<std::size_t>(it->second.rbegin()->first));
      for (const auto& [step, dets] : it->second) per_glimpse[static_cast<std::size_t>(step) - 1] = dets;
    }
    // A scene without detections still yields one k = 1 row set (all misses).
    if (per_glimpse.empty()) per_glimpse.resize(1);
    for (const MetricRecord& rec : metric_curve(scene, per_glimpse, iou_threshold)) {
      append_metric_rows(out, "external", scene_id, rec);
    }
  }
  write_file(out_csv, out);
}

}  // namespace gk
