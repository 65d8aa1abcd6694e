/* Copyright 2026 The GlimpseKit Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to libglimpsekit. Every function returns a gk_status; on
 * failure gk_last_error() holds a message for the calling thread until its
 * next API call. Handles are opaque and owned by the caller. */

#ifndef GLIMPSEKIT_GLIMPSEKIT_H
#define GLIMPSEKIT_GLIMPSEKIT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(GLIMPSEKIT_BUILDING)
#define GK_API __declspec(dllexport)
#else
#define GK_API __declspec(dllimport)
#endif
#else
#define GK_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gk_status {
  GK_OK = 0,
  GK_ERR_INVALID_ARGUMENT = 1,
  GK_ERR_OUT_OF_RANGE = 2,
  GK_ERR_IO = 3,
  GK_ERR_PARSE = 4,
  GK_ERR_VALIDATION = 5,
  GK_ERR_INTERNAL = 6
} gk_status;

typedef struct gk_scene gk_scene;
typedef struct gk_map gk_map;
typedef struct gk_glimpses gk_glimpses;

typedef struct gk_box {
  int32_t x, y, w, h;
} gk_box;

GK_API const char* gk_version(void);
GK_API const char* gk_last_error(void);
GK_API const char* gk_status_string(gk_status status);

/* Scenes */
GK_API gk_status gk_scene_create(int32_t width, int32_t height, gk_scene** out);
GK_API gk_status gk_scene_add_object(gk_scene* scene, int32_t id, int32_t class_id, gk_box box);
GK_API gk_status gk_scene_load(const char* path, gk_scene** out);
GK_API gk_status gk_scene_save(const gk_scene* scene, const char* path);
GK_API gk_status gk_scene_size(const gk_scene* scene, int32_t* width, int32_t* height);
GK_API gk_status gk_scene_object_count(const gk_scene* scene, size_t* count);
GK_API gk_status gk_scene_object(const gk_scene* scene, size_t index, int32_t* id, int32_t* class_id, gk_box* box);
GK_API void gk_scene_free(gk_scene* scene);

/* Objectness maps (values in [0, 1], row-major) */
GK_API gk_status gk_map_create(int32_t width, int32_t height, const double* values, gk_map** out);
GK_API gk_status gk_map_from_scene(const gk_scene* scene, int32_t d_gist, gk_map** out);
GK_API gk_status gk_map_load(const char* path, gk_map** out);
GK_API gk_status gk_map_save(const gk_map* map, const char* path);
GK_API gk_status gk_map_size(const gk_map* map, int32_t* width, int32_t* height);
GK_API gk_status gk_map_values(const gk_map* map, const double** values);
GK_API void gk_map_free(gk_map* map);

/* Glimpse selection. `kind` is one of unet, unet_fixed, grid, grid_fixed,
 * random; the stopping rules are applied. `objectness` may be NULL for the
 * kinds that do not read it, in which case vhr_width/vhr_height give the
 * raster. */
typedef struct gk_policy_params {
  const char* kind;
  int32_t n_glimpse;
  double beta;
  double coverage_threshold;
  uint64_t seed;
  int32_t d_gist;
  int32_t d_glimpse;
  int32_t vhr_width;
  int32_t vhr_height;
} gk_policy_params;

GK_API gk_status gk_policy_run(const gk_policy_params* params, const gk_map* objectness, gk_glimpses** out);
GK_API gk_status gk_glimpses_count(const gk_glimpses* glimpses, size_t* count);
/* Window of glimpse `index` in vHR pixels plus cumulative coverage. */
GK_API gk_status gk_glimpses_get(const gk_glimpses* glimpses, size_t index, gk_box* window, double* cum_coverage);
GK_API gk_status gk_glimpses_stop_reason(const gk_glimpses* glimpses, const char** reason);
GK_API void gk_glimpses_free(gk_glimpses* glimpses);

/* Experiment harness. seed_override may be NULL. */
GK_API gk_status gk_experiment_run(const char* config_path, const char* out_dir, const uint64_t* seed_override);
GK_API gk_status gk_generate_scenes(const char* config_path, const char* out_dir);
GK_API gk_status gk_evaluate_detections(const char* detections_csv, const char* scenes_dir, const char* out_csv);

#ifdef __cplusplus
}
#endif

#endif /* GLIMPSEKIT_GLIMPSEKIT_H */
