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

#include "glimpsekit/objectness.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "glimpsekit/error.hpp"
#include "glimpsekit/rng.hpp"

namespace gk {

namespace {

struct Overlap {
  int source;
  double weight;
};

// For each of `out` cells along an axis of length `in`, the source indices it
// covers and the overlap length with each.
std::vector<std::vector<Overlap>> axis_overlaps(int in, int out) {
  std::vector<std::vector<Overlap>> result(static_cast<std::size_t>(out));
  for (int j = 0; j < out; ++j) {
    const double lo = static_cast<double>(j) * in / out;
    const double hi = static_cast<double>(j + 1) * in / out;
    const int first = static_cast<int>(std::floor(lo));
    const int last = std::min(in, static_cast<int>(std::ceil(hi)));
    for (int s = first; s < last; ++s) {
      const double w = std::min<double>(s + 1, hi) - std::max<double>(s, lo);
      if (w > 0.0) result[static_cast<std::size_t>(j)].push_back({s, w});
    }
  }
  return result;
}

template <class T>
RealGrid pool(const Grid<T>& source, int width, int height) {
  if (width < 1 || height < 1 || width > source.width() || height > source.height()) {
    throw Error(ErrorCode::invalid_argument, "target raster must be non-empty and no larger than the source");
  }
  const auto cols = axis_overlaps(source.width(), width);
  const auto rows = axis_overlaps(source.height(), height);

  // Horizontal pass: every source row collapsed onto the output columns.
  RealGrid horizontal(width, source.height());
  for (int r = 0; r < source.height(); ++r) {
    const auto src = source.row(r);
    auto dst = horizontal.row(r);
    for (int j = 0; j < width; ++j) {
      double acc = 0.0;
      for (const Overlap& o : cols[static_cast<std::size_t>(j)]) {
        acc += o.weight * static_cast<double>(src[static_cast<std::size_t>(o.source)]);
      }
      dst[static_cast<std::size_t>(j)] = acc;
    }
  }

  const double cell_area = (static_cast<double>(source.width()) / width) *
                           (static_cast<double>(source.height()) / height);
  RealGrid out(width, height);
  for (int i = 0; i < height; ++i) {
    auto dst = out.row(i);
    for (const Overlap& o : rows[static_cast<std::size_t>(i)]) {
      const auto src = horizontal.row(o.source);
      for (int j = 0; j < width; ++j) {
        dst[static_cast<std::size_t>(j)] += o.weight * src[static_cast<std::size_t>(j)];
      }
    }
    for (double& v : dst) v /= cell_area;
  }
  return out;
}

RealGrid clip_unit(RealGrid g) {
  for (double& v : g.values()) v = std::clamp(v, 0.0, 1.0);
  return g;
}

std::vector<double> gaussian_1d(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> w(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
    w[static_cast<std::size_t>(i + radius)] = v;
    total += v;
  }
  for (double& v : w) v /= total;
  return w;
}

// Separable blur with zero padding.
RealGrid blur(const RealGrid& src, double sigma) {
  const auto w = gaussian_1d(sigma);
  const int radius = static_cast<int>(w.size() / 2);
  RealGrid tmp(src.width(), src.height());
  for (int r = 0; r < src.height(); ++r) {
    for (int c = 0; c < src.width(); ++c) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const int cc = c + k;
        if (cc >= 0 && cc < src.width()) acc += w[static_cast<std::size_t>(k + radius)] * src.at(r, cc);
      }
      tmp.at(r, c) = acc;
    }
  }
  RealGrid out(src.width(), src.height());
  for (int r = 0; r < src.height(); ++r) {
    for (int c = 0; c < src.width(); ++c) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const int rr = r + k;
        if (rr >= 0 && rr < src.height()) acc += w[static_cast<std::size_t>(k + radius)] * tmp.at(rr, c);
      }
      out.at(r, c) = acc;
    }
  }
  return out;
}

}  // namespace

GistMap::GistMap(RealGrid values) : values_(std::move(values)) {
  const auto v = values_.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] >= 0.0 && v[i] <= 1.0)) {
      const int w = std::max(1, values_.width());
      throw Error(ErrorCode::validation, "objectness value outside [0, 1]",
                  "values[" + std::to_string(i / static_cast<std::size_t>(w)) + "][" +
                      std::to_string(i % static_cast<std::size_t>(w)) + "]");
    }
  }
}

GistMap::GistMap(int width, int height, double fill) : GistMap(RealGrid(width, height, fill)) {}

double GistMap::total() const noexcept {
  double acc = 0.0;
  for (double v : values_.values()) acc += v;
  return acc;
}

IntegralImage::IntegralImage(const RealGrid& source)
    : width_(source.width()),
      height_(source.height()),
      table_(static_cast<std::size_t>(source.width() + 1) * static_cast<std::size_t>(source.height() + 1), 0.0) {
  if (source.empty()) throw Error(ErrorCode::invalid_argument, "integral image of an empty grid");
  for (int r = 0; r < height_; ++r) {
    double row_sum = 0.0;
    for (int c = 0; c < width_; ++c) {
      row_sum += source.at(r, c);
      table_[index(r + 1, c + 1)] = table_[index(r, c + 1)] + row_sum;
    }
  }
}

double IntegralImage::rect_sum(int row, int col, int h, int w) const {
  if (row < 0 || col < 0 || h < 1 || w < 1 || row + h > height_ || col + w > width_) {
    throw Error(ErrorCode::out_of_range, "window outside the raster");
  }
  return padded(row + h, col + w) - padded(row, col + w) - padded(row + h, col) + padded(row, col);
}

IntegralImage integral_image(const RealGrid& source) { return IntegralImage(source); }

double window_sum(const IntegralImage& s, int row, int col, int d) {
  if (row < 0 || col < 0 || d < 1 || row + d > s.height_ || col + d > s.width_) {
    throw Error(ErrorCode::out_of_range, "window outside the raster");
  }
  return s.padded(row + d, col + d) - s.padded(row, col + d) - s.padded(row + d, col) + s.padded(row, col);
}

GaussianKernel gaussian_kernel(int dim) {
  if (dim < 1) throw Error(ErrorCode::invalid_argument, "kernel dimension must be >= 1");
  GaussianKernel k;
  k.dim = dim;
  k.sigma = dim / 4.0;
  k.weights = RealGrid(dim, dim);
  const double center = (dim - 1) / 2.0;
  const double denom = 2.0 * k.sigma * k.sigma;
  double total = 0.0;
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      const double di = i - center;
      const double dj = j - center;
      const double v = std::exp(-(di * di + dj * dj) / denom);
      k.weights.at(i, j) = v;
      total += v;
    }
  }
  for (double& v : k.weights.values()) v /= total;
  return k;
}

RealGrid convolve(const RealGrid& map, const GaussianKernel& k) {
  if (k.dim > map.width() || k.dim > map.height()) {
    throw Error(ErrorCode::invalid_argument, "kernel larger than the map");
  }
  const int anchor = (k.dim - 1) / 2;
  RealGrid out(map.width(), map.height());
  for (int r = 0; r < map.height(); ++r) {
    for (int c = 0; c < map.width(); ++c) {
      double acc = 0.0;
      for (int a = 0; a < k.dim; ++a) {
        const int rr = r - a + anchor;
        if (rr < 0 || rr >= map.height()) continue;
        const auto src = map.row(rr);
        const auto kr = k.weights.row(a);
        for (int b = 0; b < k.dim; ++b) {
          const int cc = c - b + anchor;
          if (cc < 0 || cc >= map.width()) continue;
          acc += kr[static_cast<std::size_t>(b)] * src[static_cast<std::size_t>(cc)];
        }
      }
      out.at(r, c) = acc;
    }
  }
  return out;
}

BinaryMask rasterize_binary_mask(const Scene& scene) {
  BinaryMask mask(scene.width, scene.height, 0);
  for (const SceneObject& o : scene.objects) {
    for (int r = o.box.y; r < o.box.bottom(); ++r) {
      auto row = mask.row(r);
      std::fill(row.begin() + o.box.x, row.begin() + o.box.right(), std::uint8_t{1});
    }
  }
  return mask;
}

RealGrid area_downsample(const RealGrid& source, int width, int height) { return pool(source, width, height); }

GistMap downsample_mask(const BinaryMask& mask, int gist_width, int gist_height) {
  return GistMap(clip_unit(pool(mask, gist_width, gist_height)));
}

GistMap gaussian_bbox_density(const Scene& scene, int gist_width, int gist_height) {
  RealGrid out(gist_width, gist_height, 0.0);
  const double sx = static_cast<double>(gist_width) / scene.width;
  const double sy = static_cast<double>(gist_height) / scene.height;
  for (const SceneObject& o : scene.objects) {
    const double cx = (o.box.x + o.box.w / 2.0) * sx;
    const double cy = (o.box.y + o.box.h / 2.0) * sy;
    const int cj = std::clamp(static_cast<int>(std::floor(cx)), 0, gist_width - 1);
    const int ci = std::clamp(static_cast<int>(std::floor(cy)), 0, gist_height - 1);
    const double sigma_x = o.box.w * sx / 4.0;
    const double sigma_y = o.box.h * sy / 4.0;
    // exp(-32) is far below anything observable in a [0, 1] map.
    const int rx = static_cast<int>(std::ceil(8.0 * sigma_x)) + 1;
    const int ry = static_cast<int>(std::ceil(8.0 * sigma_y)) + 1;
    for (int i = std::max(0, ci - ry); i <= std::min(gist_height - 1, ci + ry); ++i) {
      const double di = i - ci;
      for (int j = std::max(0, cj - rx); j <= std::min(gist_width - 1, cj + rx); ++j) {
        const double dj = j - cj;
        const double v = std::exp(-(di * di / (2.0 * sigma_y * sigma_y) + dj * dj / (2.0 * sigma_x * sigma_x)));
        out.at(i, j) = std::max(out.at(i, j), v);
      }
    }
  }
  return GistMap(std::move(out));
}

GistMap degrade(const GistMap& map, const DegradeParams& params, std::uint64_t seed) {
  if (params.blur_sigma < 0.0 || params.noise_std < 0.0 || params.fp_rate < 0.0 || params.fp_rate > 1.0) {
    throw Error(ErrorCode::invalid_argument, "degrade parameters out of range");
  }
  RealGrid g = params.blur_sigma > 0.0 ? blur(map.grid(), params.blur_sigma) : map.grid();
  if (params.noise_std > 0.0 || params.fp_rate > 0.0) {
    Rng rng(seed);
    for (double& v : g.values()) {
      if (params.noise_std > 0.0) v += params.noise_std * rng.normal();
      if (params.fp_rate > 0.0 && rng.uniform() < params.fp_rate) v = std::max(v, rng.uniform(0.5, 1.0));
    }
  }
  return GistMap(clip_unit(std::move(g)));
}

double bce(const GistMap& pred, const GistMap& target) {
  if (pred.width() != target.width() || pred.height() != target.height()) {
    throw Error(ErrorCode::invalid_argument, "prediction and target dimensions differ");
  }
  const auto& p = pred.grid().values();
  const auto& y = target.grid().values();
  double loss = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double q = std::clamp(p[i], kBceEpsilon, 1.0 - kBceEpsilon);
    loss -= y[i] * std::log(q) + (1.0 - y[i]) * std::log(1.0 - q);
  }
  return loss;
}

}  // namespace gk
