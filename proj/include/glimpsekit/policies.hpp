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

#ifndef GLIMPSEKIT_POLICIES_HPP
#define GLIMPSEKIT_POLICIES_HPP

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "glimpsekit/geometry.hpp"
#include "glimpsekit/objectness.hpp"

namespace gk {

enum class PolicyKind { unet, unet_fixed, grid, grid_fixed, random, entropy };

std::string_view to_string(PolicyKind kind);
// Throws gk::Error(invalid_argument) for unknown names.
PolicyKind parse_policy_kind(std::string_view name);

struct PolicyConfig {
  PolicyKind kind = PolicyKind::unet;
  int n_glimpse = 10;
  // Value written over selected windows of the working map.
  double beta = 0.0;
  double coverage_threshold = 0.95;
  std::uint64_t seed = 0;
};

void validate_policy_config(const PolicyConfig& cfg);

enum class StopReason { none, full_image, coverage_reached, budget_exhausted };

std::string_view to_string(StopReason reason);

struct StopDecision {
  bool stop = false;
  StopReason reason = StopReason::none;
};

// Ordered glimpse origins in gist space plus per-step bookkeeping:
// cumulative objectness coverage and cumulative union area (gist pixels).
struct GlimpseSet {
  GistGeometry geom;
  std::vector<GridPos> positions;
  std::vector<double> cum_coverage;
  std::vector<std::int64_t> cum_union_area;
  StopReason stop_reason = StopReason::none;

  std::size_t size() const noexcept { return positions.size(); }
  bool empty() const noexcept { return positions.empty(); }
};

// Top-left of the d x d window with the largest sum. Ties go to the smallest
// row, then the smallest column.
GridPos select_max_objectness(const IntegralImage& s, int d);

// Greedy glimpse selection: smooth the prior with gaussian_kernel(d'), then
// n_glimpse times take the best window of the working map and overwrite it
// with beta. Returns the raw positions (no stopping applied). `observe`, when
// set, sees the working map of every iteration before the chosen window is
// reset.
using UnetStepObserver = std::function<void(const RealGrid& working, GridPos chosen)>;
std::vector<GridPos> unet_positions(const GistMap& pi, const GistGeometry& geom, const PolicyConfig& cfg,
                                    const UnetStepObserver& observe = {});

GlimpseSet unet_policy(const GistMap& pi, const GistGeometry& geom, const PolicyConfig& cfg);

// Non-overlapping d x d tiles in row-major order; when d does not divide an
// axis the last tile on that axis is placed flush with the edge.
std::vector<GridPos> fixed_tile_positions(int width, int height, int d);

struct PolicyInputs {
  const GistMap* objectness = nullptr;  // required by unet and unet_fixed
  const RealGrid* intensity = nullptr;  // gist intensity image, required by entropy
};

// Dispatches on cfg.kind and returns up to n_glimpse positions with coverage
// bookkeeping. Coverage is measured on inputs.objectness when present and on
// a uniform map otherwise.
GlimpseSet run_policy(const PolicyInputs& inputs, const GistGeometry& geom, const PolicyConfig& cfg);

// Builds the bookkeeping for an arbitrary position sequence.
GlimpseSet make_glimpse_set(std::vector<GridPos> positions, const GistGeometry& geom, const GistMap* pi);

// Fraction of the total mass of pi under the union of glimpse footprints; 1
// when pi has zero mass.
double coverage_fraction(const GlimpseSet& glimpses, const GistMap& pi);

StopDecision check_stop(double covered, int n_done, std::int64_t union_area, const PolicyConfig& cfg,
                        std::int64_t raster_area);

// Truncates the set at the first step where check_stop fires and records the
// reason. A set that ends without any criterion firing keeps reason none.
GlimpseSet apply_stopping(GlimpseSet glimpses, const PolicyConfig& cfg);

// Shannon entropy (bits) of a 16-bin histogram over [0, 1].
double window_entropy(const RealGrid& image, int row, int col, int d);

}  // namespace gk

#endif  // GLIMPSEKIT_POLICIES_HPP
