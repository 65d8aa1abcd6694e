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

#include "glimpsekit/glimpsekit.h"

#include <new>
#include <string>

#include "glimpsekit/error.hpp"
#include "glimpsekit/experiment.hpp"
#include "glimpsekit/io.hpp"
#include "glimpsekit/objectness.hpp"
#include "glimpsekit/policies.hpp"

struct gk_scene {
  gk::Scene scene;
};

struct gk_map {
  gk::GistMap map;
};

struct gk_glimpses {
  gk::GlimpseSet set;
};

namespace {

thread_local std::string g_last_error;

gk_status to_status(gk::ErrorCode code) {
  switch (code) {
    case gk::ErrorCode::invalid_argument:
      return GK_ERR_INVALID_ARGUMENT;
    case gk::ErrorCode::out_of_range:
      return GK_ERR_OUT_OF_RANGE;
    case gk::ErrorCode::io:
      return GK_ERR_IO;
    case gk::ErrorCode::parse:
      return GK_ERR_PARSE;
    case gk::ErrorCode::validation:
      return GK_ERR_VALIDATION;
  }
  return GK_ERR_INTERNAL;
}

template <class Fn>
gk_status guarded(Fn fn) noexcept {
  g_last_error.clear();
  try {
    fn();
    return GK_OK;
  } catch (const gk::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return GK_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return GK_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return GK_ERR_INTERNAL;
  }
}

void require(const void* p, const char* name) {
  if (p == nullptr) throw gk::Error(gk::ErrorCode::invalid_argument, "must not be NULL", name);
}

gk::BBox to_bbox(gk_box b) { return {b.x, b.y, b.w, b.h}; }
gk_box to_box(const gk::BBox& b) { return {b.x, b.y, b.w, b.h}; }

}  // namespace

extern "C" {

const char* gk_version(void) { return "1.0.0"; }

const char* gk_last_error(void) { return g_last_error.c_str(); }

const char* gk_status_string(gk_status status) {
  switch (status) {
    case GK_OK:
      return "ok";
    case GK_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case GK_ERR_OUT_OF_RANGE:
      return "out of range";
    case GK_ERR_IO:
      return "i/o error";
    case GK_ERR_PARSE:
      return "parse error";
    case GK_ERR_VALIDATION:
      return "validation error";
    case GK_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

gk_status gk_scene_create(int32_t width, int32_t height, gk_scene** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    gk::Scene scene{width, height, {}};
    gk::validate_scene(scene);
    *out = new gk_scene{std::move(scene)};
  });
}

gk_status gk_scene_add_object(gk_scene* scene, int32_t id, int32_t class_id, gk_box box) {
  return guarded([&] {
    require(scene, "scene");
    gk::Scene next = scene->scene;
    next.objects.push_back({id, class_id, to_bbox(box)});
    gk::validate_scene(next);
    scene->scene = std::move(next);
  });
}

gk_status gk_scene_load(const char* path, gk_scene** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    *out = new gk_scene{gk::load_scene(path)};
  });
}

gk_status gk_scene_save(const gk_scene* scene, const char* path) {
  return guarded([&] {
    require(scene, "scene");
    require(path, "path");
    gk::save_scene(scene->scene, path);
  });
}

gk_status gk_scene_size(const gk_scene* scene, int32_t* width, int32_t* height) {
  return guarded([&] {
    require(scene, "scene");
    if (width) *width = scene->scene.width;
    if (height) *height = scene->scene.height;
  });
}

gk_status gk_scene_object_count(const gk_scene* scene, size_t* count) {
  return guarded([&] {
    require(scene, "scene");
    require(count, "count");
    *count = scene->scene.objects.size();
  });
}

gk_status gk_scene_object(const gk_scene* scene, size_t index, int32_t* id, int32_t* class_id, gk_box* box) {
  return guarded([&] {
    require(scene, "scene");
    if (index >= scene->scene.objects.size()) throw gk::Error(gk::ErrorCode::out_of_range, "object index", "index");
    const gk::SceneObject& o = scene->scene.objects[index];
    if (id) *id = o.id;
    if (class_id) *class_id = o.class_id;
    if (box) *box = to_box(o.box);
  });
}

void gk_scene_free(gk_scene* scene) { delete scene; }

gk_status gk_map_create(int32_t width, int32_t height, const double* values, gk_map** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    if (width < 1 || height < 1) throw gk::Error(gk::ErrorCode::invalid_argument, "map dimensions must be positive");
    gk::RealGrid grid(width, height);
    if (values) {
      std::copy(values, values + grid.size(), grid.values().begin());
    }
    *out = new gk_map{gk::GistMap(std::move(grid))};
  });
}

gk_status gk_map_from_scene(const gk_scene* scene, int32_t d_gist, gk_map** out) {
  return guarded([&] {
    require(scene, "scene");
    require(out, "out");
    *out = nullptr;
    const gk::Scene& s = scene->scene;
    const auto [gw, gh] = gk::gist_extent(s.width, s.height, d_gist);
    *out = new gk_map{gk::downsample_mask(gk::rasterize_binary_mask(s), gw, gh)};
  });
}

gk_status gk_map_load(const char* path, gk_map** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    *out = new gk_map{gk::load_gist_map(path)};
  });
}

gk_status gk_map_save(const gk_map* map, const char* path) {
  return guarded([&] {
    require(map, "map");
    require(path, "path");
    gk::save_map(map->map, path);
  });
}

gk_status gk_map_size(const gk_map* map, int32_t* width, int32_t* height) {
  return guarded([&] {
    require(map, "map");
    if (width) *width = map->map.width();
    if (height) *height = map->map.height();
  });
}

gk_status gk_map_values(const gk_map* map, const double** values) {
  return guarded([&] {
    require(map, "map");
    require(values, "values");
    *values = map->map.grid().values().data();
  });
}

void gk_map_free(gk_map* map) { delete map; }

gk_status gk_policy_run(const gk_policy_params* params, const gk_map* objectness, gk_glimpses** out) {
  return guarded([&] {
    require(params, "params");
    require(params->kind, "params->kind");
    require(out, "out");
    *out = nullptr;
    gk::PolicyConfig cfg;
    cfg.kind = gk::parse_policy_kind(params->kind);
    if (cfg.kind == gk::PolicyKind::entropy) {
      throw gk::Error(gk::ErrorCode::invalid_argument, "entropy needs a gist image; use the experiment harness",
                      "params->kind");
    }
    cfg.n_glimpse = params->n_glimpse;
    cfg.beta = params->beta;
    cfg.coverage_threshold = params->coverage_threshold;
    cfg.seed = params->seed;
    const gk::GistGeometry geom =
        gk::GistGeometry::make(params->vhr_width, params->vhr_height, params->d_gist, params->d_glimpse);
    const gk::PolicyInputs inputs{objectness ? &objectness->map : nullptr, nullptr};
    *out = new gk_glimpses{gk::apply_stopping(gk::run_policy(inputs, geom, cfg), cfg)};
  });
}

gk_status gk_glimpses_count(const gk_glimpses* glimpses, size_t* count) {
  return guarded([&] {
    require(glimpses, "glimpses");
    require(count, "count");
    *count = glimpses->set.positions.size();
  });
}

gk_status gk_glimpses_get(const gk_glimpses* glimpses, size_t index, gk_box* window, double* cum_coverage) {
  return guarded([&] {
    require(glimpses, "glimpses");
    const gk::GlimpseSet& s = glimpses->set;
    if (index >= s.positions.size()) throw gk::Error(gk::ErrorCode::out_of_range, "glimpse index", "index");
    if (window) *window = to_box(gk::glimpse_window(s.positions[index], s.geom));
    if (cum_coverage) *cum_coverage = s.cum_coverage[index];
  });
}

gk_status gk_glimpses_stop_reason(const gk_glimpses* glimpses, const char** reason) {
  return guarded([&] {
    require(glimpses, "glimpses");
    require(reason, "reason");
    *reason = gk::to_string(glimpses->set.stop_reason).data();
  });
}

void gk_glimpses_free(gk_glimpses* glimpses) { delete glimpses; }

gk_status gk_experiment_run(const char* config_path, const char* out_dir, const uint64_t* seed_override) {
  return guarded([&] {
    require(config_path, "config_path");
    gk::ExperimentConfig cfg = gk::load_experiment_config(config_path);
    if (seed_override) cfg.seed = *seed_override;
    gk::run_experiment(cfg, out_dir ? std::filesystem::path(out_dir) : std::filesystem::path("."));
  });
}

gk_status gk_generate_scenes(const char* config_path, const char* out_dir) {
  return guarded([&] {
    require(config_path, "config_path");
    require(out_dir, "out_dir");
    gk::generate_scenes(gk::load_experiment_config(config_path), out_dir);
  });
}

gk_status gk_evaluate_detections(const char* detections_csv, const char* scenes_dir, const char* out_csv) {
  return guarded([&] {
    require(detections_csv, "detections_csv");
    require(scenes_dir, "scenes_dir");
    require(out_csv, "out_csv");
    gk::evaluate_detections(detections_csv, scenes_dir, out_csv);
  });
}

}  // extern "C"
