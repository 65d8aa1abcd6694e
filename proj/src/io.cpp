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

#include "glimpsekit/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "glimpsekit/error.hpp"
#include "json.hpp"

namespace gk {

namespace {

using ordered_json = nlohmann::ordered_json;

int require_int(const nlohmann::json& obj, const char* key, const std::string& path) {
  const std::string field = path.empty() ? key : path + "." + key;
  const auto it = obj.find(key);
  if (it == obj.end()) throw Error(ErrorCode::validation, "missing field", field);
  if (!it->is_number_integer()) throw Error(ErrorCode::validation, "must be an integer", field);
  const auto v = it->get<std::int64_t>();
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw Error(ErrorCode::validation, "integer out of range", field);
  }
  return static_cast<int>(v);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <class T>
bool parse_number(std::string_view token, T& out) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc{} && ptr == token.data() + token.size() && !token.empty();
}

}  // namespace

std::string scene_to_json(const Scene& scene) {
  ordered_json j;
  j["width"] = scene.width;
  j["height"] = scene.height;
  j["objects"] = ordered_json::array();
  for (const SceneObject& o : scene.objects) {
    ordered_json oj;
    oj["id"] = o.id;
    oj["class_id"] = o.class_id;
    oj["x"] = o.box.x;
    oj["y"] = o.box.y;
    oj["w"] = o.box.w;
    oj["h"] = o.box.h;
    j["objects"].push_back(std::move(oj));
  }
  return j.dump(2) + "\n";
}

Scene scene_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::parse, std::string("malformed scene JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::validation, "scene must be a JSON object");
  Scene scene;
  scene.width = require_int(j, "width", "");
  scene.height = require_int(j, "height", "");
  const auto objects = j.find("objects");
  if (objects == j.end()) throw Error(ErrorCode::validation, "missing field", "objects");
  if (!objects->is_array()) throw Error(ErrorCode::validation, "must be an array", "objects");
  for (std::size_t k = 0; k < objects->size(); ++k) {
    const auto& oj = (*objects)[k];
    const std::string path = "objects[" + std::to_string(k) + "]";
    if (!oj.is_object()) throw Error(ErrorCode::validation, "must be an object", path);
    SceneObject o;
    o.id = require_int(oj, "id", path);
    o.class_id = require_int(oj, "class_id", path);
    o.box.x = require_int(oj, "x", path);
    o.box.y = require_int(oj, "y", path);
    o.box.w = require_int(oj, "w", path);
    o.box.h = require_int(oj, "h", path);
    scene.objects.push_back(o);
  }
  validate_scene(scene);
  return scene;
}

Scene load_scene(const std::filesystem::path& path) {
  try {
    return scene_from_json(read_file(path));
  } catch (const Error& e) {
    throw e.prefixed(path.string());
  }
}

void save_scene(const Scene& scene, const std::filesystem::path& path) {
  validate_scene(scene);
  write_file(path, scene_to_json(scene));
}

std::string map_to_text(const RealGrid& map) {
  std::string out = "OBJMAP v1 " + std::to_string(map.width()) + " " + std::to_string(map.height()) + "\n";
  char buf[64];
  for (int r = 0; r < map.height(); ++r) {
    const auto row = map.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out.push_back(' ');
      const auto res = std::to_chars(buf, buf + sizeof(buf), row[c]);
      out.append(buf, res.ptr);
    }
    out.push_back('\n');
  }
  return out;
}

RealGrid map_from_text(std::string_view text, MapRange range) {
  auto lines = split_lines(text);
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw Error(ErrorCode::parse, "empty map file", "header");
  const auto header = split_ws(lines[0]);
  int width = 0;
  int height = 0;
  if (header.size() != 4 || header[0] != "OBJMAP" || header[1] != "v1" || !parse_number(header[2], width) ||
      !parse_number(header[3], height) || width < 1 || height < 1) {
    throw Error(ErrorCode::parse, "expected 'OBJMAP v1 <width> <height>'", "header");
  }
  if (lines.size() - 1 != static_cast<std::size_t>(height)) {
    throw Error(ErrorCode::validation,
                "header declares " + std::to_string(height) + " rows, file has " + std::to_string(lines.size() - 1),
                "rows");
  }
  RealGrid map(width, height);
  for (int r = 0; r < height; ++r) {
    const auto tokens = split_ws(lines[static_cast<std::size_t>(r) + 1]);
    const std::string row_field = "row[" + std::to_string(r) + "]";
    if (tokens.size() != static_cast<std::size_t>(width)) {
      throw Error(ErrorCode::validation,
                  "expected " + std::to_string(width) + " values, found " + std::to_string(tokens.size()), row_field);
    }
    for (int c = 0; c < width; ++c) {
      double v = 0.0;
      const std::string field = row_field + "[" + std::to_string(c) + "]";
      if (!parse_number(tokens[static_cast<std::size_t>(c)], v) || !std::isfinite(v)) {
        throw Error(ErrorCode::parse, "not a finite decimal", field);
      }
      if (range == MapRange::unit && (v < 0.0 || v > 1.0)) {
        throw Error(ErrorCode::validation, "value outside [0, 1]", field);
      }
      map.at(r, c) = v;
    }
  }
  return map;
}

RealGrid load_map(const std::filesystem::path& path, MapRange range) {
  try {
    return map_from_text(read_file(path), range);
  } catch (const Error& e) {
    throw e.prefixed(path.string());
  }
}

void save_map(const RealGrid& map, const std::filesystem::path& path) { write_file(path, map_to_text(map)); }

GistMap load_gist_map(const std::filesystem::path& path) { return GistMap(load_map(path, MapRange::unit)); }

std::string format_fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v == 0.0 ? 0.0 : v);
  return buf;
}

std::string format_general(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v == 0.0 ? 0.0 : v);
  return buf;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = line.find(',', start);
    if (end == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, end - start)));
    start = end + 1;
  }
}

std::vector<ExternalDetection> parse_detections_csv(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty() || trim(lines[0]) != kDetectionsHeader) {
    throw Error(ErrorCode::parse, "expected header '" + std::string(kDetectionsHeader) + "'", "line 1");
  }
  std::vector<ExternalDetection> out;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    if (trim(lines[n]).empty()) continue;
    const std::string field = "line " + std::to_string(n + 1);
    const auto cells = split_csv_line(lines[n]);
    if (cells.size() != 8) throw Error(ErrorCode::parse, "expected 8 columns", field);
    ExternalDetection d;
    d.scene_id = std::string(cells[0]);
    Detection& det = d.detection;
    if (d.scene_id.empty() || !parse_number(cells[1], det.source_glimpse) || !parse_number(cells[2], det.class_id) ||
        !parse_number(cells[3], det.box.x) || !parse_number(cells[4], det.box.y) ||
        !parse_number(cells[5], det.box.w) || !parse_number(cells[6], det.box.h) || !parse_number(cells[7], det.score)) {
      throw Error(ErrorCode::parse, "malformed detection row", field);
    }
    if (det.source_glimpse < 1) throw Error(ErrorCode::validation, "glimpse_step must be >= 1", field);
    if (!det.box.valid()) throw Error(ErrorCode::validation, "box must have positive size", field);
    if (!(det.score >= 0.0 && det.score <= 1.0)) throw Error(ErrorCode::validation, "score outside [0, 1]", field);
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<ExternalDetection> load_detections_csv(const std::filesystem::path& path) {
  try {
    return parse_detections_csv(read_file(path));
  } catch (const Error& e) {
    throw e.prefixed(path.string());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot open '" + path.string() + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::io, "write to '" + path.string() + "' failed");
}

}  // namespace gk
