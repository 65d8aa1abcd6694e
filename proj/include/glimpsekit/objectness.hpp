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

#ifndef GLIMPSEKIT_OBJECTNESS_HPP
#define GLIMPSEKIT_OBJECTNESS_HPP

#include <cstdint>

#include "glimpsekit/geometry.hpp"
#include "glimpsekit/grid.hpp"

namespace gk {

// Strictly binary raster (0 or 1 per pixel).
using BinaryMask = Grid<std::uint8_t>;

// Low-resolution objectness prior. Every entry lies in [0, 1]; construction
// from a grid that violates this throws.
class GistMap {
 public:
  GistMap() = default;
  explicit GistMap(RealGrid values);
  GistMap(int width, int height, double fill = 0.0);

  int width() const noexcept { return values_.width(); }
  int height() const noexcept { return values_.height(); }
  double at(int row, int col) const { return values_.at(row, col); }
  const RealGrid& grid() const noexcept { return values_; }
  double total() const noexcept;

  friend bool operator==(const GistMap&, const GistMap&) = default;

 private:
  RealGrid values_;
};

// Summed-area table. at(i, j) is the sum of the source over rows <= i and
// columns <= j. Stored with a zero guard row/column so that window sums need
// no branches.
class IntegralImage {
 public:
  IntegralImage() = default;
  explicit IntegralImage(const RealGrid& source);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  double at(int row, int col) const { return table_[index(row + 1, col + 1)]; }

  // Sum over [row, row+h) x [col, col+w). Throws out_of_range when the window
  // leaves the raster.
  double rect_sum(int row, int col, int h, int w) const;

 private:
  friend double window_sum(const IntegralImage&, int, int, int);
  double padded(int r, int c) const { return table_[index(r, c)]; }
  std::size_t index(int r, int c) const {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(width_ + 1) + static_cast<std::size_t>(c);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> table_;
};

IntegralImage integral_image(const RealGrid& source);

// Four-corner sum of the d x d window with top-left (row, col).
double window_sum(const IntegralImage& s, int row, int col, int d);

struct GaussianKernel {
  int dim = 0;
  double sigma = 0.0;
  RealGrid weights;
};

// dim x dim kernel with sigma = dim / 4, centred at (dim - 1) / 2, normalised to
// unit sum.
GaussianKernel gaussian_kernel(int dim);

// Same-size 2-D convolution with zero padding. Output (r, c) accumulates
// k(a, b) * map(r - a + anchor, c - b + anchor) with anchor = (dim - 1) / 2, so an
// impulse at p reproduces k(a, b) at p - anchor + (a, b).
RealGrid convolve(const RealGrid& map, const GaussianKernel& k);

BinaryMask rasterize_binary_mask(const Scene& scene);

// Area-average pooling onto a (width x height) raster with real-valued cell
// boundaries; partially covered source pixels contribute their overlap
// fraction.
RealGrid area_downsample(const RealGrid& source, int width, int height);

GistMap downsample_mask(const BinaryMask& mask, int gist_width, int gist_height);
inline GistMap downsample_mask(const BinaryMask& mask, int d_gist) {
  return downsample_mask(mask, d_gist, d_gist);
}

// One axis-aligned Gaussian per box with per-axis sigma = (extent in gist
// pixels) / 4, centred on the gist pixel that holds the box centre and equal
// to 1 there. Overlaps combine by elementwise max.
GistMap gaussian_bbox_density(const Scene& scene, int gist_width, int gist_height);

struct DegradeParams {
  double blur_sigma = 0.0;
  double noise_std = 0.0;
  // Per-pixel probability of a false-positive spike.
  double fp_rate = 0.0;
};

// Simulates an imperfect objectness predictor: Gaussian blur, additive
// zero-mean noise, false-positive spikes (amplitude U[0.5, 1), combined by
// max), then clipping to [0, 1]. Deterministic per seed.
GistMap degrade(const GistMap& map, const DegradeParams& params, std::uint64_t seed);

// Unreduced binary cross-entropy summed over all pixels, predictions clamped
// to [1e-7, 1 - 1e-7].
double bce(const GistMap& pred, const GistMap& target);

inline constexpr double kBceEpsilon = 1e-7;

}  // namespace gk

#endif  // GLIMPSEKIT_OBJECTNESS_HPP
