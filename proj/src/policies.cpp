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

#include "glimpsekit/policies.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "glimpsekit/error.hpp"
#include "glimpsekit/rng.hpp"

namespace gk {

namespace {

constexpr std::array<std::pair<PolicyKind, std::string_view>, 6> kPolicyNames{{
    {PolicyKind::unet, "unet"},
    {PolicyKind::unet_fixed, "unet_fixed"},
    {PolicyKind::grid, "grid"},
    {PolicyKind::grid_fixed, "grid_fixed"},
    {PolicyKind::random, "random"},
    {PolicyKind::entropy, "entropy"},
}};

// Evenly spaced offsets over [0, range]; a single offset sits in the middle.
std::vector<int> spaced(int count, int range) {
  std::vector<int> out;
  if (count == 1) {
    out.push_back(range / 2);
    return out;
  }
  for (int i = 0; i < count; ++i) {
    out.push_back(static_cast<int>(std::lround(static_cast<double>(i) * range / (count - 1))));
  }
  return out;
}

// 0, step, 2*step, ... <= last, plus `last` itself when the lattice misses it.
std::vector<int> lattice(int last, int step) {
  std::vector<int> out;
  for (int v = 0; v <= last; v += step) out.push_back(v);
  if (out.back() != last) out.push_back(last);
  return out;
}

void truncate(std::vector<GridPos>& v, int n) {
  if (static_cast<int>(v.size()) > n) v.resize(static_cast<std::size_t>(n));
}

std::vector<GridPos> grid_positions(const GistGeometry& g, int n_glimpse) {
  std::vector<GridPos> out;
  if (n_glimpse <= 0) return out;
  const int d = g.d_glimpse_gist;
  const int per_axis = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_glimpse))));
  const auto rows = spaced(per_axis, g.gist_height - d);
  const auto cols = spaced(per_axis, g.gist_width - d);
  for (int r : rows) {
    for (int c : cols) out.push_back({r, c});
  }
  truncate(out, n_glimpse);
  return out;
}

std::vector<GridPos> unet_fixed_positions(const GistMap& pi, const GistGeometry& g, int n_glimpse) {
  const int d = g.d_glimpse_gist;
  auto tiles = fixed_tile_positions(g.gist_width, g.gist_height, d);
  const IntegralImage s(pi.grid());
  std::vector<double> score(tiles.size());
  for (std::size_t i = 0; i < tiles.size(); ++i) score[i] = window_sum(s, tiles[i].row, tiles[i].col, d);
  std::vector<std::size_t> order(tiles.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  std::vector<GridPos> out;
  for (std::size_t i : order) out.push_back(tiles[i]);
  truncate(out, n_glimpse);
  return out;
}

std::vector<GridPos> grid_fixed_positions(const GistGeometry& g, int n_glimpse, std::uint64_t seed) {
  auto tiles = fixed_tile_positions(g.gist_width, g.gist_height, g.d_glimpse_gist);
  Rng rng(seed);
  for (std::size_t i = tiles.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i - 1)));
    std::swap(tiles[i - 1], tiles[j]);
  }
  truncate(tiles, n_glimpse);
  return tiles;
}

std::vector<GridPos> random_positions(const GistGeometry& g, int n_glimpse, std::uint64_t seed) {
  const int d = g.d_glimpse_gist;
  Rng rng(seed);
  std::vector<GridPos> out;
  for (int i = 0; i < n_glimpse; ++i) {
    const int r = static_cast<int>(rng.uniform_int(0, g.gist_height - d));
    const int c = static_cast<int>(rng.uniform_int(0, g.gist_width - d));
    out.push_back({r, c});
  }
  return out;
}

std::vector<GridPos> entropy_positions(const RealGrid& image, const GistGeometry& g, int n_glimpse) {
  const int d = g.d_glimpse_gist;
  const int step = std::max(1, d / 2);
  std::vector<GridPos> candidates;
  for (int r : lattice(image.height() - d, step)) {
    for (int c : lattice(image.width() - d, step)) candidates.push_back({r, c});
  }
  std::vector<double> h(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    h[i] = window_entropy(image, candidates[i].row, candidates[i].col, d);
  }
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return h[a] > h[b]; });
  std::vector<GridPos> out;
  for (std::size_t i : order) out.push_back(candidates[i]);
  truncate(out, n_glimpse);
  return out;
}

}  // namespace

std::string_view to_string(PolicyKind kind) {
  for (const auto& [k, name] : kPolicyNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

PolicyKind parse_policy_kind(std::string_view name) {
  for (const auto& [k, n] : kPolicyNames) {
    if (n == name) return k;
  }
  throw Error(ErrorCode::invalid_argument, "unknown policy kind '" + std::string(name) + "'", "kind");
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::none: return "none";
    case StopReason::full_image: return "full_image";
    case StopReason::coverage_reached: return "coverage_reached";
    case StopReason::budget_exhausted: return "budget_exhausted";
  }
  return "none";
}

void validate_policy_config(const PolicyConfig& cfg) {
  if (cfg.n_glimpse < 0) throw Error(ErrorCode::invalid_argument, "must be >= 0", "n_glimpse");
  if (!(cfg.coverage_threshold > 0.0 && cfg.coverage_threshold <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "must lie in (0, 1]", "coverage_threshold");
  }
}

GridPos select_max_objectness(const IntegralImage& s, int d) {
  if (d < 1 || d > s.width() || d > s.height()) {
    throw Error(ErrorCode::invalid_argument, "window larger than the raster");
  }
  GridPos best{0, 0};
  double best_sum = window_sum(s, 0, 0, d);
  for (int r = 0; r + d <= s.height(); ++r) {
    for (int c = 0; c + d <= s.width(); ++c) {
      const double v = window_sum(s, r, c, d);
      if (v > best_sum) {
        best_sum = v;
        best = {r, c};
      }
    }
  }
  return best;
}

std::vector<GridPos> unet_positions(const GistMap& pi, const GistGeometry& geom, const PolicyConfig& cfg,
                                    const UnetStepObserver& observe) {
  validate_policy_config(cfg);
  const int d = geom.d_glimpse_gist;
  RealGrid working = convolve(pi.grid(), gaussian_kernel(d));
  std::vector<GridPos> out;
  out.reserve(static_cast<std::size_t>(cfg.n_glimpse));
  for (int i = 0; i < cfg.n_glimpse; ++i) {
    const GridPos p = select_max_objectness(IntegralImage(working), d);
    out.push_back(p);
    if (observe) observe(working, p);
    for (int r = p.row; r < p.row + d; ++r) {
      auto row = working.row(r);
      std::fill(row.begin() + p.col, row.begin() + p.col + d, cfg.beta);
    }
  }
  return out;
}

GlimpseSet unet_policy(const GistMap& pi, const GistGeometry& geom, const PolicyConfig& cfg) {
  return make_glimpse_set(unet_positions(pi, geom, cfg), geom, &pi);
}

std::vector<GridPos> fixed_tile_positions(int width, int height, int d) {
  if (d < 1 || d > width || d > height) throw Error(ErrorCode::invalid_argument, "tile larger than the raster");
  std::vector<GridPos> out;
  for (int r : lattice(height - d, d)) {
    for (int c : lattice(width - d, d)) out.push_back({r, c});
  }
  return out;
}

GlimpseSet run_policy(const PolicyInputs& inputs, const GistGeometry& geom, const PolicyConfig& cfg) {
  validate_policy_config(cfg);
  const bool needs_objectness = cfg.kind == PolicyKind::unet || cfg.kind == PolicyKind::unet_fixed;
  if (needs_objectness && inputs.objectness == nullptr) {
    throw Error(ErrorCode::invalid_argument, std::string(to_string(cfg.kind)) + " policy requires an objectness map");
  }
  if (cfg.kind == PolicyKind::entropy && inputs.intensity == nullptr) {
    throw Error(ErrorCode::invalid_argument, "entropy policy requires a gist intensity image");
  }
  if (inputs.objectness &&
      (inputs.objectness->width() != geom.gist_width || inputs.objectness->height() != geom.gist_height)) {
    throw Error(ErrorCode::invalid_argument, "objectness map does not match the gist geometry");
  }
  if (inputs.intensity &&
      (inputs.intensity->width() != geom.gist_width || inputs.intensity->height() != geom.gist_height)) {
    throw Error(ErrorCode::invalid_argument, "intensity image does not match the gist geometry");
  }

  std::vector<GridPos> positions;
  switch (cfg.kind) {
    case PolicyKind::unet:
      positions = unet_positions(*inputs.objectness, geom, cfg);
      break;
    case PolicyKind::unet_fixed:
      positions = unet_fixed_positions(*inputs.objectness, geom, cfg.n_glimpse);
      break;
    case PolicyKind::grid:
      positions = grid_positions(geom, cfg.n_glimpse);
      break;
    case PolicyKind::grid_fixed:
      positions = grid_fixed_positions(geom, cfg.n_glimpse, cfg.seed);
      break;
    case PolicyKind::random:
      positions = random_positions(geom, cfg.n_glimpse, cfg.seed);
      break;
    case PolicyKind::entropy:
      positions = entropy_positions(*inputs.intensity, geom, cfg.n_glimpse);
      break;
  }
  return make_glimpse_set(std::move(positions), geom, inputs.objectness);
}

GlimpseSet make_glimpse_set(std::vector<GridPos> positions, const GistGeometry& geom, const GistMap* pi) {
  GlimpseSet set;
  set.geom = geom;
  const int d = geom.d_glimpse_gist;
  const std::int64_t raster_area = geom.gist_area();
  const double total = pi ? pi->total() : static_cast<double>(raster_area);
  Grid<std::uint8_t> covered(geom.gist_width, geom.gist_height, 0);
  double mass = 0.0;
  std::int64_t area = 0;
  for (const GridPos& p : positions) {
    if (p.row < 0 || p.col < 0 || p.row + d > geom.gist_height || p.col + d > geom.gist_width) {
      throw Error(ErrorCode::out_of_range, "glimpse outside the gist raster");
    }
    for (int r = p.row; r < p.row + d; ++r) {
      for (int c = p.col; c < p.col + d; ++c) {
        if (covered.at(r, c)) continue;
        covered.at(r, c) = 1;
        ++area;
        mass += pi ? pi->at(r, c) : 1.0;
      }
    }
    double fraction = 1.0;
    if (area < raster_area && total > 0.0) fraction = std::min(1.0, mass / total);
    set.cum_coverage.push_back(fraction);
    set.cum_union_area.push_back(area);
  }
  set.positions = std::move(positions);
  return set;
}

double coverage_fraction(const GlimpseSet& glimpses, const GistMap& pi) {
  if (glimpses.empty()) return pi.total() > 0.0 ? 0.0 : 1.0;
  return make_glimpse_set(glimpses.positions, glimpses.geom, &pi).cum_coverage.back();
}

StopDecision check_stop(double covered, int n_done, std::int64_t union_area, const PolicyConfig& cfg,
                        std::int64_t raster_area) {
  if (union_area >= raster_area) return {true, StopReason::full_image};
  if (covered > cfg.coverage_threshold) return {true, StopReason::coverage_reached};
  if (n_done >= cfg.n_glimpse) return {true, StopReason::budget_exhausted};
  return {};
}

GlimpseSet apply_stopping(GlimpseSet glimpses, const PolicyConfig& cfg) {
  const std::int64_t raster_area = glimpses.geom.gist_area();
  if (glimpses.empty()) {
    glimpses.stop_reason = cfg.n_glimpse <= 0 ? StopReason::budget_exhausted : StopReason::none;
    return glimpses;
  }
  for (std::size_t k = 0; k < glimpses.size(); ++k) {
    const StopDecision d = check_stop(glimpses.cum_coverage[k], static_cast<int>(k + 1),
                                      glimpses.cum_union_area[k], cfg, raster_area);
    if (d.stop) {
      glimpses.positions.resize(k + 1);
      glimpses.cum_coverage.resize(k + 1);
      glimpses.cum_union_area.resize(k + 1);
      glimpses.stop_reason = d.reason;
      return glimpses;
    }
  }
  glimpses.stop_reason = StopReason::none;
  return glimpses;
}

double window_entropy(const RealGrid& image, int row, int col, int d) {
  std::array<int, 16> bins{};
  for (int r = row; r < row + d; ++r) {
    for (int c = col; c < col + d; ++c) {
      const double v = std::clamp(image.at(r, c), 0.0, 1.0);
      ++bins[static_cast<std::size_t>(std::min(15, static_cast<int>(v * 16.0)))];
    }
  }
  const double n = static_cast<double>(d) * d;
  double h = 0.0;
  for (int count : bins) {
    if (count == 0) continue;
    const double p = count / n;
    h -= p * std::log2(p);
  }
  return h;
}

}  // namespace gk
