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

#include "glimpsekit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

#include "glimpsekit/error.hpp"

namespace gk {

std::optional<BBox> intersect(const BBox& a, const BBox& b) {
  const int x0 = std::max(a.x, b.x);
  const int y0 = std::max(a.y, b.y);
  const int x1 = std::min(a.right(), b.right());
  const int y1 = std::min(a.bottom(), b.bottom());
  if (x1 <= x0 || y1 <= y0) return std::nullopt;
  return BBox{x0, y0, x1 - x0, y1 - y0};
}

double iou(const BBox& a, const BBox& b) {
  const auto inter = intersect(a, b);
  if (!inter) return 0.0;
  const std::int64_t i = inter->area();
  const std::int64_t u = a.area() + b.area() - i;
  return static_cast<double>(i) / static_cast<double>(u);
}

void validate_scene(const Scene& scene) {
  if (scene.width <= 0) throw Error(ErrorCode::validation, "must be positive", "width");
  if (scene.height <= 0) throw Error(ErrorCode::validation, "must be positive", "height");
  std::unordered_set<int> ids;
  for (std::size_t k = 0; k < scene.objects.size(); ++k) {
    const SceneObject& o = scene.objects[k];
    const std::string path = "objects[" + std::to_string(k) + "]";
    if (!ids.insert(o.id).second) throw Error(ErrorCode::validation, "duplicate object id", path + ".id");
    if (o.class_id < 0) throw Error(ErrorCode::validation, "must be non-negative", path + ".class_id");
    if (o.box.w <= 0) throw Error(ErrorCode::validation, "must be positive", path + ".w");
    if (o.box.h <= 0) throw Error(ErrorCode::validation, "must be positive", path + ".h");
    if (o.box.x < 0 || o.box.right() > scene.width) {
      throw Error(ErrorCode::validation, "box exceeds raster width", path + ".x");
    }
    if (o.box.y < 0 || o.box.bottom() > scene.height) {
      throw Error(ErrorCode::validation, "box exceeds raster height", path + ".y");
    }
  }
}

double scale_factor(int d_gist, int d_vhr) {
  if (d_gist <= 0 || d_vhr <= 0) {
    throw Error(ErrorCode::invalid_argument, "dimensions must be positive");
  }
  if (d_gist > d_vhr) {
    throw Error(ErrorCode::invalid_argument, "gist dimension exceeds vHR dimension");
  }
  return static_cast<double>(d_gist) / static_cast<double>(d_vhr);
}

int glimpse_gist_dim(double alpha, int d_glimpse) {
  if (!(alpha > 0.0 && alpha <= 1.0) || d_glimpse < 1) {
    throw Error(ErrorCode::invalid_argument, "glimpse_gist_dim requires 0 < alpha <= 1 and d_glimpse >= 1");
  }
  const double product = alpha * d_glimpse;
  const double nearest = std::round(product);
  const double d = std::abs(product - nearest) <= 1e-9 * std::max(1.0, product) ? nearest : std::ceil(product);
  return std::max(1, static_cast<int>(d));
}

GistExtent gist_extent(int vhr_width, int vhr_height, int d_gist) {
  const double alpha = scale_factor(d_gist, std::max(vhr_width, vhr_height));
  return {std::max(1, static_cast<int>(std::lround(vhr_width * alpha))),
          std::max(1, static_cast<int>(std::lround(vhr_height * alpha)))};
}

GistGeometry GistGeometry::make(int vhr_width, int vhr_height, int d_gist, int d_glimpse) {
  GistGeometry g;
  g.vhr_width = vhr_width;
  g.vhr_height = vhr_height;
  g.d_vhr = std::max(vhr_width, vhr_height);
  g.d_gist = d_gist;
  g.alpha = scale_factor(d_gist, g.d_vhr);
  if (d_glimpse < 1 || d_glimpse > std::min(vhr_width, vhr_height)) {
    throw Error(ErrorCode::invalid_argument, "glimpse must fit inside the vHR raster", "d_glimpse");
  }
  g.d_glimpse = d_glimpse;
  g.d_glimpse_gist = glimpse_gist_dim(g.alpha, d_glimpse);
  const GistExtent extent = gist_extent(vhr_width, vhr_height, d_gist);
  g.gist_width = extent.width;
  g.gist_height = extent.height;
  if (g.d_glimpse_gist > std::min(g.gist_width, g.gist_height)) {
    throw Error(ErrorCode::invalid_argument, "gist-space glimpse exceeds the gist raster", "d_glimpse");
  }
  return g;
}

int gist_to_vhr(int pos, double alpha, int d_vhr_axis, int d_glimpse) {
  const long mapped = std::lround(static_cast<double>(pos) / alpha);
  const long hi = std::max(0, d_vhr_axis - d_glimpse);
  return static_cast<int>(std::clamp<long>(mapped, 0, hi));
}

GridPos gist_to_vhr(GridPos pos, const GistGeometry& geom) {
  return {gist_to_vhr(pos.row, geom.alpha, geom.vhr_height, geom.d_glimpse),
          gist_to_vhr(pos.col, geom.alpha, geom.vhr_width, geom.d_glimpse)};
}

BBox glimpse_window(GridPos pos, const GistGeometry& geom) {
  const GridPos v = gist_to_vhr(pos, geom);
  return {v.col, v.row, geom.d_glimpse, geom.d_glimpse};
}

}  // namespace gk
