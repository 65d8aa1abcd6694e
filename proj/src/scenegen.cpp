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

#include "glimpsekit/scenegen.hpp"

#include <algorithm>
#include <cmath>

#include "glimpsekit/error.hpp"
#include "glimpsekit/objectness.hpp"
#include "glimpsekit/rng.hpp"

namespace gk {

namespace {

constexpr int kMaxPlacementAttempts = 1000;
constexpr std::uint64_t kTextureSalt = 0x7e47u;

}  // namespace

void validate_generator_config(const GeneratorConfig& cfg) {
  if (cfg.width < 1) throw Error(ErrorCode::invalid_argument, "must be >= 1", "width");
  if (cfg.height < 1) throw Error(ErrorCode::invalid_argument, "must be >= 1", "height");
  if (cfg.classes < 1) throw Error(ErrorCode::invalid_argument, "must be >= 1", "classes");
  if (cfg.clusters < 0) throw Error(ErrorCode::invalid_argument, "must be >= 0", "clusters");
  if (cfg.objects_per_cluster.min < 0 || cfg.objects_per_cluster.max < cfg.objects_per_cluster.min) {
    throw Error(ErrorCode::invalid_argument, "range must be non-empty and non-negative", "objects_per_cluster");
  }
  if (cfg.object_size.min < 1 || cfg.object_size.max < cfg.object_size.min) {
    throw Error(ErrorCode::invalid_argument, "range must be non-empty with sizes >= 1", "object_size");
  }
  if (cfg.cluster_radius < 0.0) throw Error(ErrorCode::invalid_argument, "must be >= 0", "cluster_radius");
  if (cfg.class_purity < 0.0 || cfg.class_purity > 1.0) {
    throw Error(ErrorCode::invalid_argument, "must lie in [0, 1]", "class_purity");
  }
  if (cfg.background_texture_std < 0.0) {
    throw Error(ErrorCode::invalid_argument, "must be >= 0", "background_texture_std");
  }
}

Scene generate_scene(const GeneratorConfig& cfg, const WarningSink& warn) {
  validate_generator_config(cfg);
  Rng rng(cfg.seed);
  Scene scene;
  scene.width = cfg.width;
  scene.height = cfg.height;
  int next_id = 0;
  for (int c = 0; c < cfg.clusters; ++c) {
    const double cx = rng.uniform(0.0, cfg.width);
    const double cy = rng.uniform(0.0, cfg.height);
    const int cluster_class = static_cast<int>(rng.uniform_int(0, cfg.classes - 1));
    const int count = static_cast<int>(rng.uniform_int(cfg.objects_per_cluster.min, cfg.objects_per_cluster.max));
    for (int k = 0; k < count; ++k) {
      const int cls = rng.uniform() < cfg.class_purity ? cluster_class
                                                       : static_cast<int>(rng.uniform_int(0, cfg.classes - 1));
      bool placed = false;
      for (int attempt = 0; attempt < kMaxPlacementAttempts && !placed; ++attempt) {
        const int w = static_cast<int>(rng.uniform_int(cfg.object_size.min, cfg.object_size.max));
        const int h = static_cast<int>(rng.uniform_int(cfg.object_size.min, cfg.object_size.max));
        double ox;
        double oy;
        if (cfg.placement == Placement::clustered) {
          ox = cx + cfg.cluster_radius * rng.normal();
          oy = cy + cfg.cluster_radius * rng.normal();
        } else {
          ox = rng.uniform(0.0, cfg.width);
          oy = rng.uniform(0.0, cfg.height);
        }
        const BBox box{static_cast<int>(std::lround(ox - w / 2.0)), static_cast<int>(std::lround(oy - h / 2.0)), w, h};
        if (!box.inside(cfg.width, cfg.height)) continue;
        scene.objects.push_back({next_id++, cls, box});
        placed = true;
      }
      if (!placed && warn) {
        warn("cluster " + std::to_string(c) + " object " + std::to_string(k) + ": no in-bounds placement after " +
             std::to_string(kMaxPlacementAttempts) + " attempts; skipped");
      }
    }
  }
  return scene;
}

Grid<int> rasterize_class_mask(const Scene& scene) {
  Grid<int> mask(scene.width, scene.height, 0);
  std::vector<const SceneObject*> by_id;
  for (const SceneObject& o : scene.objects) by_id.push_back(&o);
  std::stable_sort(by_id.begin(), by_id.end(), [](const SceneObject* a, const SceneObject* b) { return a->id < b->id; });
  for (const SceneObject* o : by_id) {
    for (int r = o->box.y; r < o->box.bottom(); ++r) {
      auto row = mask.row(r);
      std::fill(row.begin() + o->box.x, row.begin() + o->box.right(), o->class_id + 1);
    }
  }
  return mask;
}

RealGrid render_gist_image(const Scene& scene, int gist_width, int gist_height, const GeneratorConfig& cfg) {
  // Area averaging is linear, so pooling the binary mask and mapping
  // coverage f to 0.3 + 0.5 f equals pooling the 0.3 / 0.8 intensity raster.
  const GistMap coverage = downsample_mask(rasterize_binary_mask(scene), gist_width, gist_height);
  RealGrid image(gist_width, gist_height);
  Rng rng(mix_seed(cfg.seed, kTextureSalt));
  const auto src = coverage.grid().values();
  auto dst = image.values();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    double v = 0.3 + 0.5 * src[i];
    // Texture only lives on the background share of the cell.
    if (cfg.background_texture_std > 0.0) v += (1.0 - src[i]) * cfg.background_texture_std * rng.normal();
    dst[i] = std::clamp(v, 0.0, 1.0);
  }
  return image;
}

}  // namespace gk
