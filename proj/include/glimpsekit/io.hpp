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

#ifndef GLIMPSEKIT_IO_HPP
#define GLIMPSEKIT_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "glimpsekit/detection.hpp"
#include "glimpsekit/geometry.hpp"
#include "glimpsekit/grid.hpp"
#include "glimpsekit/objectness.hpp"

namespace gk {

// ---------------------------------------------------------------------------
// Scene JSON:
//   {"width": int, "height": int,
//    "objects": [{"id", "class_id", "x", "y", "w", "h"}, ...]}
// Written with two-space indentation and the key order above, so a
// load/save cycle reproduces the file byte for byte.
// ---------------------------------------------------------------------------

std::string scene_to_json(const Scene& scene);
// Validates the result; errors name the offending field ("objects[k].w").
Scene scene_from_json(std::string_view text);

Scene load_scene(const std::filesystem::path& path);
void save_scene(const Scene& scene, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// OBJMAP v1: "OBJMAP v1 <width> <height>" followed by `height` lines of
// `width` space-separated decimals, top row first. Values are written in
// shortest round-trip form.
// ---------------------------------------------------------------------------

enum class MapRange {
  unit,       // objectness / intensity, every value must be in [0, 1]
  unbounded,  // any finite value
};

std::string map_to_text(const RealGrid& map);
RealGrid map_from_text(std::string_view text, MapRange range = MapRange::unit);

RealGrid load_map(const std::filesystem::path& path, MapRange range = MapRange::unit);
void save_map(const RealGrid& map, const std::filesystem::path& path);

// Objectness-map convenience wrappers.
GistMap load_gist_map(const std::filesystem::path& path);
inline void save_map(const GistMap& map, const std::filesystem::path& path) { save_map(map.grid(), path); }

// ---------------------------------------------------------------------------
// CSV formats
// ---------------------------------------------------------------------------

inline constexpr std::string_view kGlimpseLogHeader =
    "scene_id,step,row_gist,col_gist,row_vhr,col_vhr,d_glimpse,cum_coverage,stop_reason";
inline constexpr std::string_view kMetricsHeader = "policy,scene_id,k,class_id,precision,recall,f1";
inline constexpr std::string_view kDetectionsHeader = "scene_id,glimpse_step,class_id,x,y,w,h,score";
inline constexpr std::string_view kTrajectoryHeader =
    "scene_id,policy,step,tile_i,tile_j,likelihood,prior,posterior,recall,normalized_looks";

// Fixed-point with six decimals.
std::string format_fixed(double v);
// Nine significant digits.
std::string format_general(double v);

struct ExternalDetection {
  std::string scene_id;
  Detection detection;  // source_glimpse holds glimpse_step
};

std::vector<ExternalDetection> parse_detections_csv(std::string_view text);
std::vector<ExternalDetection> load_detections_csv(const std::filesystem::path& path);

// Splits one CSV line on commas (no quoting support; none of the formats
// above need it).
std::vector<std::string_view> split_csv_line(std::string_view line);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace gk

#endif  // GLIMPSEKIT_IO_HPP
