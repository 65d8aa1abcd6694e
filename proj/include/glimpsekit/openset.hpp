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

#ifndef GLIMPSEKIT_OPENSET_HPP
#define GLIMPSEKIT_OPENSET_HPP

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "glimpsekit/geometry.hpp"
#include "glimpsekit/objectness.hpp"

namespace gk {

using Embedding = std::vector<double>;

struct Tile {
  int i = 0;  // tile row
  int j = 0;  // tile column
  BBox box;
};

struct TileGrid {
  int tile_size = 0;
  int rows = 0;
  int cols = 0;
  std::vector<Tile> tiles;  // row-major, index = i * cols + j

  std::size_t size() const noexcept { return tiles.size(); }
  std::size_t index(int i, int j) const noexcept { return static_cast<std::size_t>(i * cols + j); }
};

// Row-major tiling with stride tile_size. A final partial row/column is placed
// flush with the raster edge; a tile larger than the raster shrinks to it.
TileGrid tile_image(int width, int height, int tile_size);

// Throws on dimension mismatch or a zero-norm input.
double cosine(std::span<const double> u, std::span<const double> v);

Embedding normalized(Embedding v);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual int dimension() const = 0;
  // Unit-norm embedding of one tile. Must be deterministic.
  virtual Embedding embed(const Tile& tile) const = 0;
};

struct TargetSpec {
  int target_class = 0;
  Embedding exemplar;  // unit norm
};

// `count` seeded unit vectors of dimension `dim`; for dim >= count they are
// Gram-Schmidt orthogonalised, otherwise only normalised.
std::vector<Embedding> make_prototypes(int count, int dim, std::uint64_t seed);

// Standard normal vector (unit variance per component).
Embedding gaussian_noise(int dim, std::uint64_t seed);

// normalize(sum over objects of (intersection area / object area) *
// prototype[class] + background + noise_std * gaussian_noise). The noise seed
// is derived from `seed` and the tile rectangle.
Embedding synthetic_embed(const Scene& scene, const BBox& tile, const std::vector<Embedding>& prototypes,
                          std::span<const double> background, double noise_std, std::uint64_t seed);

class SyntheticEmbedder final : public EmbeddingProvider {
 public:
  SyntheticEmbedder(const Scene& scene, std::vector<Embedding> prototypes, Embedding background, double noise_std,
                    std::uint64_t seed);

  int dimension() const override { return dim_; }
  Embedding embed(const Tile& tile) const override;

 private:
  const Scene& scene_;
  std::vector<Embedding> prototypes_;
  Embedding background_;
  double noise_std_;
  std::uint64_t seed_;
  int dim_;
};

// Exemplar of a class: normalize(prototype + noise_std * gaussian_noise(seed)).
TargetSpec make_target(const std::vector<Embedding>& prototypes, int target_class, double noise_std,
                       std::uint64_t seed);

std::vector<Embedding> embed_tiles(const EmbeddingProvider& provider, const TileGrid& grid);

std::vector<double> likelihood_map(const std::vector<Embedding>& tile_embeddings, const TargetSpec& target);
std::vector<double> likelihood_map(const EmbeddingProvider& provider, const TileGrid& grid, const TargetSpec& target);

// Area-weighted mean of pi over each tile's footprint in gist space.
// `vhr_width`/`vhr_height` give the raster the tiles live in.
std::vector<double> tile_prior(const GistMap& pi, const TileGrid& grid, int vhr_width, int vhr_height);

std::vector<double> posterior_map(std::span<const double> likelihood, std::span<const double> prior);

enum class SearchKind { g_ml_mstr, g_map_mstr, sliding_window, local_target, local_initial, local_current };

std::string_view to_string(SearchKind kind);
SearchKind parse_search_kind(std::string_view name);

struct TileScores {
  std::vector<double> likelihood;
  std::vector<double> prior;
  std::vector<double> posterior;
  std::vector<Embedding> embeddings;  // needed by the local kinds
  Embedding exemplar;                 // needed by local_target
};

struct SearchTrajectory {
  std::vector<std::size_t> order;  // tile indices in visiting order
  std::vector<double> recall;      // per step, filled by recall_vs_looks
  std::size_t total_tiles = 0;
};

SearchTrajectory run_search(SearchKind kind, const TileGrid& grid, const TileScores& scores);

struct RecallPoint {
  double normalized_looks = 0.0;
  double recall = 0.0;
};

struct RecallCurve {
  std::vector<RecallPoint> points;
  std::string diagnostic;  // set when the curve is empty for a reason
};

// Recall after each look, where an object counts as found once the tile
// holding its box centre has been visited.
RecallCurve recall_vs_looks(const SearchTrajectory& traj, const Scene& scene, const TileGrid& grid,
                            int target_class);

// Mean recall over all looks: the area under the recall step curve on (0, 1].
double area_under_recall(const RecallCurve& curve);

}  // namespace gk

#endif  // GLIMPSEKIT_OPENSET_HPP
