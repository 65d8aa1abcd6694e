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

#ifndef GLIMPSEKIT_SCENEGEN_HPP
#define GLIMPSEKIT_SCENEGEN_HPP

#include <cstdint>
#include <functional>
#include <string>

#include "glimpsekit/geometry.hpp"
#include "glimpsekit/grid.hpp"

namespace gk {

struct IntRange {
  int min = 0;
  int max = 0;
};

enum class Placement { clustered, uniform };

struct GeneratorConfig {
  int width = 2048;
  int height = 2048;
  int classes = 4;
  int clusters = 5;
  IntRange objects_per_cluster{4, 12};
  IntRange object_size{16, 48};
  double cluster_radius = 96.0;
  // Probability that an object takes its cluster's class rather than a
  // uniformly drawn one.
  double class_purity = 0.8;
  double background_texture_std = 0.05;
  Placement placement = Placement::clustered;
  std::uint64_t seed = 0;
};

void validate_generator_config(const GeneratorConfig& cfg);

// Receives one message per object that could not be placed.
using WarningSink = std::function<void(const std::string&)>;

// Cluster centres are uniform over the raster; each object's centre is the
// cluster centre plus isotropic Gaussian scatter (std = cluster_radius).
// Boxes that leave the raster are redrawn, up to 1000 times per object, after
// which the object is skipped. Ids are assigned 0, 1, ... in placement order.
// With Placement::uniform, object centres are uniform over the raster.
Scene generate_scene(const GeneratorConfig& cfg, const WarningSink& warn = {});

// 0 = background, class_id + 1 on object pixels; on overlap the larger id wins.
Grid<int> rasterize_class_mask(const Scene& scene);

// Gist intensity image: 0.3 background and 0.8 object pixels, area-averaged to
// (gist_width x gist_height), plus seeded texture noise on the background
// share of each cell (std = cfg.background_texture_std, seed derived from
// cfg.seed), clipped to [0, 1].
RealGrid render_gist_image(const Scene& scene, int gist_width, int gist_height, const GeneratorConfig& cfg);

}  // namespace gk

#endif  // GLIMPSEKIT_SCENEGEN_HPP
