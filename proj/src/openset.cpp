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

#include "glimpsekit/openset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "glimpsekit/error.hpp"
#include "glimpsekit/rng.hpp"

namespace gk {

namespace {

constexpr std::array<std::pair<SearchKind, std::string_view>, 6> kSearchNames{{
    {SearchKind::g_ml_mstr, "g_ml_mstr"},
    {SearchKind::g_map_mstr, "g_map_mstr"},
    {SearchKind::sliding_window, "sliding_window"},
    {SearchKind::local_target, "local_target"},
    {SearchKind::local_initial, "local_initial"},
    {SearchKind::local_current, "local_current"},
}};

std::vector<int> tile_origins(int extent, int tile, int stride) {
  std::vector<int> out;
  const int last = extent - tile;
  for (int v = 0; v <= last; v += stride) out.push_back(v);
  if (out.back() != last) out.push_back(last);
  return out;
}

double norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

// Indices sorted by descending value, ties by ascending index.
std::vector<std::size_t> descending_order(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  return order;
}

std::vector<std::size_t> local_search(SearchKind kind, const TileGrid& grid, const TileScores& scores) {
  const std::size_t n = grid.size();
  if (scores.likelihood.size() != n || scores.embeddings.size() != n) {
    throw Error(ErrorCode::invalid_argument, "local search needs a likelihood and an embedding per tile");
  }
  if (kind == SearchKind::local_target && scores.exemplar.empty()) {
    throw Error(ErrorCode::invalid_argument, "local_target search needs the exemplar embedding");
  }
  const auto global = descending_order(scores.likelihood);
  std::vector<bool> visited(n, false);
  std::vector<std::size_t> order;
  order.reserve(n);
  std::size_t next_global = 0;
  auto best_unvisited = [&]() {
    while (visited[global[next_global]]) ++next_global;
    return global[next_global];
  };

  std::size_t current = best_unvisited();
  const std::size_t initial = current;
  while (true) {
    visited[current] = true;
    order.push_back(current);
    if (order.size() == n) break;

    const Embedding& reference = kind == SearchKind::local_target    ? scores.exemplar
                                 : kind == SearchKind::local_initial ? scores.embeddings[initial]
                                                                     : scores.embeddings[current];
    const Tile& t = grid.tiles[current];
    bool found = false;
    std::size_t best = 0;
    double best_sim = 0.0;
    for (int di = -1; di <= 1; ++di) {
      for (int dj = -1; dj <= 1; ++dj) {
        const int i = t.i + di;
        const int j = t.j + dj;
        if ((di == 0 && dj == 0) || i < 0 || j < 0 || i >= grid.rows || j >= grid.cols) continue;
        const std::size_t idx = grid.index(i, j);
        if (visited[idx]) continue;
        const double sim = cosine(scores.embeddings[idx], reference);
        if (!found || sim > best_sim || (sim == best_sim && idx < best)) {
          found = true;
          best = idx;
          best_sim = sim;
        }
      }
    }
    current = found ? best : best_unvisited();
  }
  return order;
}

}  // namespace

TileGrid tile_image(int width, int height, int tile_size) {
  if (tile_size < 1) throw Error(ErrorCode::invalid_argument, "tile size must be >= 1", "tile_size");
  if (width < 1 || height < 1) throw Error(ErrorCode::invalid_argument, "raster must be non-empty");
  const int tw = std::min(tile_size, width);
  const int th = std::min(tile_size, height);
  const auto xs = tile_origins(width, tw, tile_size);
  const auto ys = tile_origins(height, th, tile_size);
  TileGrid grid;
  grid.tile_size = tile_size;
  grid.rows = static_cast<int>(ys.size());
  grid.cols = static_cast<int>(xs.size());
  for (int i = 0; i < grid.rows; ++i) {
    for (int j = 0; j < grid.cols; ++j) {
      grid.tiles.push_back({i, j, BBox{xs[static_cast<std::size_t>(j)], ys[static_cast<std::size_t>(i)], tw, th}});
    }
  }
  return grid;
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw Error(ErrorCode::invalid_argument, "cosine of vectors with different dimensions");
  const double nu = norm(u);
  const double nv = norm(v);
  if (nu == 0.0 || nv == 0.0) throw Error(ErrorCode::invalid_argument, "cosine of a zero-norm vector");
  double dot = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) dot += u[i] * v[i];
  return std::clamp(dot / (nu * nv), -1.0, 1.0);
}

Embedding normalized(Embedding v) {
  const double n = norm(v);
  if (n == 0.0) throw Error(ErrorCode::invalid_argument, "cannot normalise a zero vector");
  for (double& x : v) x /= n;
  return v;
}

std::vector<Embedding> make_prototypes(int count, int dim, std::uint64_t seed) {
  if (count < 0 || dim < 2) throw Error(ErrorCode::invalid_argument, "prototypes need count >= 0 and dim >= 2");
  Rng rng(seed);
  std::vector<Embedding> out;
  for (int c = 0; c < count; ++c) {
    Embedding v(static_cast<std::size_t>(dim));
    for (double& x : v) x = rng.normal();
    if (dim >= count) {
      for (const Embedding& prev : out) {
        double dot = 0.0;
        for (int i = 0; i < dim; ++i) dot += v[static_cast<std::size_t>(i)] * prev[static_cast<std::size_t>(i)];
        for (int i = 0; i < dim; ++i) v[static_cast<std::size_t>(i)] -= dot * prev[static_cast<std::size_t>(i)];
      }
    }
    out.push_back(normalized(std::move(v)));
  }
  return out;
}

Embedding gaussian_noise(int dim, std::uint64_t seed) {
  Rng rng(seed);
  Embedding v(static_cast<std::size_t>(dim));
  for (double& x : v) x = rng.normal();
  return v;
}

Embedding synthetic_embed(const Scene& scene, const BBox& tile, const std::vector<Embedding>& prototypes,
                          std::span<const double> background, double noise_std, std::uint64_t seed) {
  if (prototypes.empty()) throw Error(ErrorCode::invalid_argument, "no class prototypes");
  const std::size_t dim = prototypes.front().size();
  if (background.size() != dim) throw Error(ErrorCode::invalid_argument, "background dimension mismatch");
  Embedding v(background.begin(), background.end());
  for (const SceneObject& o : scene.objects) {
    const auto inter = intersect(o.box, tile);
    if (!inter) continue;
    if (o.class_id < 0 || static_cast<std::size_t>(o.class_id) >= prototypes.size()) {
      throw Error(ErrorCode::invalid_argument, "object class has no prototype");
    }
    const double weight = static_cast<double>(inter->area()) / static_cast<double>(o.box.area());
    const Embedding& p = prototypes[static_cast<std::size_t>(o.class_id)];
    for (std::size_t i = 0; i < dim; ++i) v[i] += weight * p[i];
  }
  if (noise_std > 0.0) {
    std::uint64_t s = mix_seed(seed, static_cast<std::uint64_t>(tile.x));
    s = mix_seed(s, static_cast<std::uint64_t>(tile.y));
    s = mix_seed(s, static_cast<std::uint64_t>(tile.w));
    s = mix_seed(s, static_cast<std::uint64_t>(tile.h));
    const Embedding n = gaussian_noise(static_cast<int>(dim), s);
    for (std::size_t i = 0; i < dim; ++i) v[i] += noise_std * n[i];
  }
  if (norm(v) == 0.0) {
    throw Error(ErrorCode::validation, "tile embedding has zero norm (empty tile, no background, no noise)");
  }
  return normalized(std::move(v));
}

SyntheticEmbedder::SyntheticEmbedder(const Scene& scene, std::vector<Embedding> prototypes, Embedding background,
                                     double noise_std, std::uint64_t seed)
    : scene_(scene),
      prototypes_(std::move(prototypes)),
      background_(std::move(background)),
      noise_std_(noise_std),
      seed_(seed),
      dim_(prototypes_.empty() ? 0 : static_cast<int>(prototypes_.front().size())) {
  if (dim_ < 2) throw Error(ErrorCode::invalid_argument, "embedding dimension must be >= 2");
}

Embedding SyntheticEmbedder::embed(const Tile& tile) const {
  return synthetic_embed(scene_, tile.box, prototypes_, background_, noise_std_, seed_);
}

TargetSpec make_target(const std::vector<Embedding>& prototypes, int target_class, double noise_std,
                       std::uint64_t seed) {
  if (target_class < 0 || static_cast<std::size_t>(target_class) >= prototypes.size()) {
    throw Error(ErrorCode::invalid_argument, "target class has no prototype", "target_class");
  }
  Embedding v = prototypes[static_cast<std::size_t>(target_class)];
  if (noise_std > 0.0) {
    const Embedding n = gaussian_noise(static_cast<int>(v.size()), seed);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += noise_std * n[i];
  }
  return {target_class, normalized(std::move(v))};
}

std::vector<Embedding> embed_tiles(const EmbeddingProvider& provider, const TileGrid& grid) {
  std::vector<Embedding> out;
  out.reserve(grid.size());
  for (const Tile& t : grid.tiles) {
    try {
      out.push_back(provider.embed(t));
    } catch (const Error& e) {
      throw e.prefixed("tile(" + std::to_string(t.i) + "," + std::to_string(t.j) + ")");
    }
    if (static_cast<int>(out.back().size()) != provider.dimension()) {
      throw Error(ErrorCode::validation, "embedding dimension differs from the provider's",
                  "tile(" + std::to_string(t.i) + "," + std::to_string(t.j) + ")");
    }
  }
  return out;
}

std::vector<double> likelihood_map(const std::vector<Embedding>& tile_embeddings, const TargetSpec& target) {
  std::vector<double> l;
  l.reserve(tile_embeddings.size());
  for (const Embedding& e : tile_embeddings) l.push_back(cosine(e, target.exemplar));
  return l;
}

std::vector<double> likelihood_map(const EmbeddingProvider& provider, const TileGrid& grid, const TargetSpec& target) {
  if (static_cast<std::size_t>(provider.dimension()) != target.exemplar.size()) {
    throw Error(ErrorCode::invalid_argument, "provider and target dimensions differ");
  }
  return likelihood_map(embed_tiles(provider, grid), target);
}

std::vector<double> tile_prior(const GistMap& pi, const TileGrid& grid, int vhr_width, int vhr_height) {
  const double sx = static_cast<double>(pi.width()) / vhr_width;
  const double sy = static_cast<double>(pi.height()) / vhr_height;
  std::vector<double> out;
  out.reserve(grid.size());
  for (const Tile& t : grid.tiles) {
    const double x0 = t.box.x * sx;
    const double x1 = t.box.right() * sx;
    const double y0 = t.box.y * sy;
    const double y1 = t.box.bottom() * sy;
    double mass = 0.0;
    double area = 0.0;
    for (int r = static_cast<int>(std::floor(y0)); r < std::min(pi.height(), static_cast<int>(std::ceil(y1))); ++r) {
      const double wy = std::min<double>(r + 1, y1) - std::max<double>(r, y0);
      if (wy <= 0.0) continue;
      for (int c = static_cast<int>(std::floor(x0)); c < std::min(pi.width(), static_cast<int>(std::ceil(x1))); ++c) {
        const double wx = std::min<double>(c + 1, x1) - std::max<double>(c, x0);
        if (wx <= 0.0) continue;
        mass += wy * wx * pi.at(r, c);
        area += wy * wx;
      }
    }
    out.push_back(area > 0.0 ? std::clamp(mass / area, 0.0, 1.0) : 0.0);
  }
  return out;
}

std::vector<double> posterior_map(std::span<const double> likelihood, std::span<const double> prior) {
  if (likelihood.size() != prior.size()) throw Error(ErrorCode::invalid_argument, "likelihood and prior sizes differ");
  std::vector<double> p(likelihood.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = likelihood[i] * prior[i];
  return p;
}

std::string_view to_string(SearchKind kind) {
  for (const auto& [k, name] : kSearchNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

SearchKind parse_search_kind(std::string_view name) {
  for (const auto& [k, n] : kSearchNames) {
    if (n == name) return k;
  }
  throw Error(ErrorCode::invalid_argument, "unknown search policy '" + std::string(name) + "'", "kind");
}

SearchTrajectory run_search(SearchKind kind, const TileGrid& grid, const TileScores& scores) {
  SearchTrajectory traj;
  traj.total_tiles = grid.size();
  switch (kind) {
    case SearchKind::g_ml_mstr:
      if (scores.likelihood.size() != grid.size()) throw Error(ErrorCode::invalid_argument, "likelihood size mismatch");
      traj.order = descending_order(scores.likelihood);
      break;
    case SearchKind::g_map_mstr:
      if (scores.posterior.size() != grid.size()) throw Error(ErrorCode::invalid_argument, "posterior size mismatch");
      traj.order = descending_order(scores.posterior);
      break;
    case SearchKind::sliding_window:
      traj.order.resize(grid.size());
      std::iota(traj.order.begin(), traj.order.end(), 0);
      break;
    case SearchKind::local_target:
    case SearchKind::local_initial:
    case SearchKind::local_current:
      traj.order = local_search(kind, grid, scores);
      break;
  }
  return traj;
}

RecallCurve recall_vs_looks(const SearchTrajectory& traj, const Scene& scene, const TileGrid& grid,
                            int target_class) {
  RecallCurve curve;
  // Tiles containing each target's centre.
  std::vector<std::vector<std::size_t>> homes;
  for (const SceneObject& o : scene.objects) {
    if (o.class_id != target_class) continue;
    const int cx = o.box.x + o.box.w / 2;
    const int cy = o.box.y + o.box.h / 2;
    std::vector<std::size_t> h;
    for (std::size_t t = 0; t < grid.size(); ++t) {
      const BBox& b = grid.tiles[t].box;
      if (cx >= b.x && cx < b.right() && cy >= b.y && cy < b.bottom()) h.push_back(t);
    }
    homes.push_back(std::move(h));
  }
  if (homes.empty()) {
    curve.diagnostic = "scene has no objects of target class " + std::to_string(target_class);
    return curve;
  }
  std::vector<bool> visited(grid.size(), false);
  std::vector<bool> found(homes.size(), false);
  std::size_t n_found = 0;
  const double total = static_cast<double>(traj.total_tiles);
  for (std::size_t k = 0; k < traj.order.size(); ++k) {
    visited[traj.order[k]] = true;
    for (std::size_t o = 0; o < homes.size(); ++o) {
      if (found[o]) continue;
      for (std::size_t t : homes[o]) {
        if (visited[t]) {
          found[o] = true;
          ++n_found;
          break;
        }
      }
    }
    curve.points.push_back({static_cast<double>(k + 1) / total,
                            static_cast<double>(n_found) / static_cast<double>(homes.size())});
  }
  return curve;
}

double area_under_recall(const RecallCurve& curve) {
  if (curve.points.empty()) return 0.0;
  double acc = 0.0;
  for (const RecallPoint& p : curve.points) acc += p.recall;
  return acc / static_cast<double>(curve.points.size());
}

}  // namespace gk
