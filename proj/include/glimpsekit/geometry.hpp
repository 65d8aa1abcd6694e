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

#ifndef GLIMPSEKIT_GEOMETRY_HPP
#define GLIMPSEKIT_GEOMETRY_HPP

#include <compare>
#include <cstdint>
#include <optional>
#include <vector>

namespace gk {

// Half-open integer rectangle [x, x+w) x [y, y+h). x is the column of the left
// edge, y the row of the top edge.
struct BBox {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  int right() const noexcept { return x + w; }
  int bottom() const noexcept { return y + h; }
  std::int64_t area() const noexcept { return std::int64_t{w} * h; }
  bool valid() const noexcept { return w > 0 && h > 0; }
  bool inside(int width, int height) const noexcept {
    return x >= 0 && y >= 0 && right() <= width && bottom() <= height;
  }

  friend bool operator==(const BBox&, const BBox&) = default;
};

std::optional<BBox> intersect(const BBox& a, const BBox& b);

// Intersection-over-union; 0 for disjoint boxes.
double iou(const BBox& a, const BBox& b);

struct SceneObject {
  int id = 0;
  int class_id = 0;
  BBox box;

  friend bool operator==(const SceneObject&, const SceneObject&) = default;
};

struct Scene {
  int width = 0;
  int height = 0;
  std::vector<SceneObject> objects;

  friend bool operator==(const Scene&, const Scene&) = default;
};

// Throws gk::Error(validation) naming the first offending field, e.g.
// "objects[2].w" or "objects[4].id".
void validate_scene(const Scene& scene);

// (row, col) position on a raster.
struct GridPos {
  int row = 0;
  int col = 0;

  friend auto operator<=>(const GridPos&, const GridPos&) = default;
};

double scale_factor(int d_gist, int d_vhr);

// ceil(alpha * d_glimpse), at least 1. Products within 1e-9 of an integer are
// treated as that integer so that e.g. 0.125 * 512 is not bumped to 65 by
// representation error in alpha.
int glimpse_gist_dim(double alpha, int d_glimpse);

struct GistExtent {
  int width = 0;
  int height = 0;
};

// Gist raster size for a vHR raster: round(alpha * axis) with alpha taken from
// the longer side, at least 1.
GistExtent gist_extent(int vhr_width, int vhr_height, int d_gist);

// Relationship between the gist raster and the very-high-resolution raster.
// Rectangular scenes are supported: alpha is taken from the longer side and
// each gist axis is round(alpha * vhr axis).
struct GistGeometry {
  int d_gist = 0;
  int d_vhr = 0;
  double alpha = 0.0;
  int d_glimpse = 0;
  int d_glimpse_gist = 0;
  int gist_width = 0;
  int gist_height = 0;
  int vhr_width = 0;
  int vhr_height = 0;

  static GistGeometry make(int vhr_width, int vhr_height, int d_gist, int d_glimpse);

  std::int64_t gist_area() const noexcept { return std::int64_t{gist_width} * gist_height; }
};

// Maps one gist-space coordinate to the vHR coordinate of the glimpse origin:
// round(pos / alpha), clamped so the d_glimpse window stays inside [0, d_vhr_axis).
int gist_to_vhr(int pos, double alpha, int d_vhr_axis, int d_glimpse);

GridPos gist_to_vhr(GridPos pos, const GistGeometry& geom);

// The vHR window selected by a gist-space glimpse origin.
BBox glimpse_window(GridPos pos, const GistGeometry& geom);

}  // namespace gk

#endif  // GLIMPSEKIT_GEOMETRY_HPP
