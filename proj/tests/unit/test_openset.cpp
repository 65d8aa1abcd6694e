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

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "doctest.h"
#include "glimpsekit/error.hpp"
#include "glimpsekit/openset.hpp"
#include "oracles.hpp"

using namespace gk;

namespace {

std::vector<std::size_t> sorted_copy(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  return v;
}

std::vector<std::size_t> iota_n(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

Embedding unit(int dim, int axis) {
  Embedding e(static_cast<std::size_t>(dim), 0.0);
  e[static_cast<std::size_t>(axis)] = 1.0;
  return e;
}

// Random scores with embeddings for a rows x cols grid of 10-pixel tiles.
struct Fixture {
  TileGrid grid;
  TileScores scores;
};

Fixture random_fixture(std::mt19937_64& rng, int rows, int cols) {
  Fixture f{tile_image(cols * 10, rows * 10, 10), {}};
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t t = 0; t < f.grid.size(); ++t) {
    Embedding e(6);
    for (double& x : e) x = n(rng);
    f.scores.embeddings.push_back(normalized(e));
    f.scores.prior.push_back(u(rng));
  }
  Embedding ex(6);
  for (double& x : ex) x = n(rng);
  f.scores.exemplar = normalized(ex);
  f.scores.likelihood = likelihood_map(f.scores.embeddings, {0, f.scores.exemplar});
  f.scores.posterior = posterior_map(f.scores.likelihood, f.scores.prior);
  return f;
}

constexpr SearchKind kAllKinds[] = {SearchKind::g_ml_mstr,    SearchKind::g_map_mstr,    SearchKind::sliding_window,
                                    SearchKind::local_target, SearchKind::local_initial, SearchKind::local_current};

}  // namespace

TEST_CASE("tile_image") {
  const TileGrid a = tile_image(4096, 4096, 512);
  CHECK(a.rows == 8);
  CHECK(a.cols == 8);
  CHECK(a.size() == 64);
  CHECK(a.tiles[9].box == BBox{512, 512, 512, 512});
  CHECK(a.tiles[9].i == 1);
  CHECK(a.tiles[9].j == 1);

  CHECK(tile_image(512, 512, 512).size() == 1);

  const TileGrid b = tile_image(1000, 1000, 512);
  CHECK(b.rows == 2);
  CHECK(b.cols == 2);
  CHECK(b.tiles[1].box == BBox{488, 0, 512, 512});
  CHECK(b.tiles[2].box == BBox{0, 488, 512, 512});

  const TileGrid small = tile_image(300, 200, 512);
  REQUIRE(small.size() == 1);
  CHECK(small.tiles[0].box == BBox{0, 0, 300, 200});
  CHECK_THROWS_AS(tile_image(100, 100, 0), Error);
}

TEST_CASE("cosine") {
  const std::vector<double> u{1.0, 2.0, -3.0};
  const std::vector<double> neg{-1.0, -2.0, 3.0};
  CHECK(cosine(u, u) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(cosine(unit(4, 0), unit(4, 3)) == 0.0);
  CHECK(cosine(u, neg) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK_THROWS_AS(cosine(u, unit(4, 0)), Error);
  CHECK_THROWS_AS(cosine(u, std::vector<double>(3, 0.0)), Error);
}

TEST_CASE("make_prototypes is orthonormal and seeded") {
  const auto p = make_prototypes(6, 32, 5);
  REQUIRE(p.size() == 6);
  for (std::size_t a = 0; a < p.size(); ++a) {
    for (std::size_t b = 0; b < p.size(); ++b) {
      const double dot = std::inner_product(p[a].begin(), p[a].end(), p[b].begin(), 0.0);
      CHECK(dot == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-12));
    }
  }
  CHECK(make_prototypes(6, 32, 5) == p);
  CHECK(make_prototypes(6, 32, 6) != p);
}

TEST_CASE("gaussian_noise has unit variance per component") {
  const Embedding v = gaussian_noise(200000, 3);
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.size() - 1);
  CHECK(std::abs(mean) < 0.01);
  CHECK(var == doctest::Approx(1.0).epsilon(0.02));
  CHECK(gaussian_noise(16, 3) == gaussian_noise(16, 3));
}

TEST_CASE("synthetic_embed") {
  const auto protos = make_prototypes(4, 16, 1);
  const Scene s{1024, 1024, {{0, 2, {10, 10, 50, 50}}, {1, 2, {100, 100, 40, 40}}, {2, 1, {600, 600, 40, 40}}}};
  const Embedding zero(16, 0.0);

  // Only class 2 inside, no background, no noise: exactly along prototype 2.
  const Embedding e = synthetic_embed(s, {0, 0, 512, 512}, protos, zero, 0.0, 9);
  CHECK(cosine(e, protos[2]) == doctest::Approx(1.0).epsilon(1e-6));
  const TargetSpec target = make_target(protos, 2, 0.0, 4);
  CHECK(cosine(e, target.exemplar) == doctest::Approx(1.0).epsilon(1e-6));

  // Empty tile is the (normalized) background.
  const Embedding bg = protos[3];
  const Embedding empty = synthetic_embed(s, {200, 200, 100, 100}, protos, bg, 0.0, 9);
  for (std::size_t i = 0; i < bg.size(); ++i) CHECK(empty[i] == doctest::Approx(bg[i]).epsilon(1e-15));
  CHECK_THROWS_AS(synthetic_embed(s, {200, 200, 100, 100}, protos, zero, 0.0, 9), Error);

  const Embedding noisy = synthetic_embed(s, {0, 0, 512, 512}, protos, bg, 0.5, 9);
  CHECK(synthetic_embed(s, {0, 0, 512, 512}, protos, bg, 0.5, 9) == noisy);
  CHECK(synthetic_embed(s, {0, 0, 512, 512}, protos, bg, 0.5, 10) != noisy);
  CHECK(std::sqrt(std::inner_product(noisy.begin(), noisy.end(), noisy.begin(), 0.0)) ==
        doctest::Approx(1.0).epsilon(1e-12));

  // Partial overlap weights the prototype by the visible fraction.
  const Embedding part = synthetic_embed(s, {35, 10, 100, 50}, protos, zero, 0.0, 9);
  CHECK(cosine(part, protos[2]) == doctest::Approx(1.0).epsilon(1e-12));
  const Embedding mixed = synthetic_embed(s, {0, 0, 1024, 1024}, protos, zero, 0.0, 9);
  // Two full class-2 objects and one full class-1 object: direction (2 p2 + p1) / sqrt(5).
  CHECK(cosine(mixed, protos[2]) == doctest::Approx(2.0 / std::sqrt(5.0)).epsilon(1e-12));
}

TEST_CASE("likelihood_map") {
  const auto protos = make_prototypes(3, 8, 2);
  const Scene s{1024, 1024, {{0, 0, {10, 10, 50, 50}}, {1, 1, {700, 700, 30, 30}}}};
  const TileGrid grid = tile_image(1024, 1024, 512);
  const SyntheticEmbedder emb(s, protos, protos[2], 0.3, 17);
  const auto tiles = embed_tiles(emb, grid);
  const auto l = likelihood_map(emb, grid, {0, tiles[3]});
  CHECK(l[3] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(likelihood_map(emb, grid, {0, tiles[3]}) == l);
  for (double x : l) {
    CHECK(x >= -1.0);
    CHECK(x <= 1.0);
  }
  CHECK_THROWS_AS(likelihood_map(emb, grid, {0, Embedding(5, 1.0)}), Error);
}

TEST_CASE("tile_prior examples") {
  const TileGrid grid = tile_image(4096, 4096, 512);
  for (const double c : {0.0, 0.37, 1.0}) {
    for (double p : tile_prior(GistMap(128, 128, c), grid, 4096, 4096)) CHECK(p == doctest::Approx(c).epsilon(1e-15));
  }
  // Tile (2, 5) covers gist rows 32..47 and cols 80..95.
  RealGrid m(128, 128, 0.0);
  for (int r = 32; r < 48; ++r) {
    for (int c = 80; c < 96; ++c) m.at(r, c) = 1.0;
  }
  const auto p = tile_prior(GistMap{m}, grid, 4096, 4096);
  for (std::size_t t = 0; t < p.size(); ++t) CHECK(p[t] == (t == grid.index(2, 5) ? 1.0 : 0.0));
}

TEST_CASE("tile_prior matches the footprint integral") {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 60; ++trial) {
    const int vw = std::uniform_int_distribution<int>(200, 3000)(rng);
    const int vh = std::uniform_int_distribution<int>(200, 3000)(rng);
    const int tile = std::uniform_int_distribution<int>(64, 700)(rng);
    const int gw = std::uniform_int_distribution<int>(8, 64)(rng);
    const int gh = std::uniform_int_distribution<int>(8, 64)(rng);
    const RealGrid pi = oracle::random_map(rng, gw, gh);
    const TileGrid grid = tile_image(vw, vh, tile);
    const auto got = tile_prior(GistMap{pi}, grid, vw, vh);
    for (std::size_t t = 0; t < grid.size(); ++t) {
      REQUIRE(got[t] == doctest::Approx(oracle::footprint_mean(pi, grid.tiles[t].box, vw, vh)).epsilon(1e-9));
    }
  }
}

TEST_CASE("equal tiles rank the same by mean and by summed footprint") {
  std::mt19937_64 rng(62);
  const TileGrid grid = tile_image(2048, 2048, 256);
  for (int trial = 0; trial < 20; ++trial) {
    const RealGrid pi = oracle::random_map(rng, 64, 64, 16);
    const auto mean = tile_prior(GistMap{pi}, grid, 2048, 2048);
    std::vector<double> sums;
    for (const Tile& t : grid.tiles) sums.push_back(oracle::naive_window_sum(pi, t.box.y / 32, t.box.x / 32, 8));
    std::vector<std::size_t> a = iota_n(grid.size());
    std::vector<std::size_t> b = a;
    std::stable_sort(a.begin(), a.end(), [&](auto x, auto y) { return mean[x] > mean[y]; });
    std::stable_sort(b.begin(), b.end(), [&](auto x, auto y) { return sums[x] > sums[y]; });
    REQUIRE(a == b);
  }
}

TEST_CASE("posterior_map") {
  CHECK(posterior_map(std::vector<double>{0.8}, std::vector<double>{0.5})[0] == 0.4);
  CHECK(posterior_map(std::vector<double>{0.8, -0.3}, std::vector<double>{0.0, 0.0}) == std::vector<double>{0.0, -0.0});
  std::mt19937_64 rng(63);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> l(500);
  std::vector<double> pr(500);
  for (std::size_t i = 0; i < l.size(); ++i) {
    l[i] = u(rng);
    pr[i] = std::abs(u(rng));
  }
  const auto p = posterior_map(l, pr);
  for (std::size_t i = 0; i < p.size(); ++i) REQUIRE(p[i] == l[i] * pr[i]);
  CHECK_THROWS_AS(posterior_map(l, std::vector<double>(3, 1.0)), Error);
}

TEST_CASE("run_search examples") {
  const TileGrid grid = tile_image(20, 20, 10);
  TileScores s;
  s.likelihood = {0.9, 0.1, 0.5, 0.3};
  CHECK(run_search(SearchKind::g_ml_mstr, grid, s).order == std::vector<std::size_t>{0, 2, 3, 1});
  CHECK(run_search(SearchKind::sliding_window, grid, s).order == std::vector<std::size_t>{0, 1, 2, 3});

  // Prior one everywhere: MAP ranks like ML.
  s.prior = {1.0, 1.0, 1.0, 1.0};
  s.posterior = posterior_map(s.likelihood, s.prior);
  CHECK(run_search(SearchKind::g_map_mstr, grid, s).order == std::vector<std::size_t>{0, 2, 3, 1});

  // Prior zero on half the tiles.
  s.prior = {0.0, 0.4, 0.0, 0.2};
  s.posterior = posterior_map(s.likelihood, s.prior);
  const auto order = run_search(SearchKind::g_map_mstr, grid, s).order;
  CHECK(std::set<std::size_t>(order.begin(), order.begin() + 2) == std::set<std::size_t>{1, 3});
}

TEST_CASE("local searches follow the neighbourhood and jump when it is exhausted") {
  // 1 x 4 strip with orthogonal embeddings; exemplar along tile 0's axis.
  const TileGrid grid = tile_image(40, 10, 10);
  TileScores s;
  for (int t = 0; t < 4; ++t) s.embeddings.push_back(unit(4, t));
  s.embeddings[2] = normalized({0.9, 0.0, 0.1, 0.0});
  s.exemplar = unit(4, 0);
  s.likelihood = likelihood_map(s.embeddings, {0, s.exemplar});
  // Start at the best tile (0); its only neighbour is 1; then 2, then 3.
  CHECK(run_search(SearchKind::local_target, grid, s).order == std::vector<std::size_t>{0, 1, 2, 3});

  // 3 x 3: tile 4 (centre) is best; neighbours are everything else.
  const TileGrid g3 = tile_image(30, 30, 10);
  TileScores t;
  for (int i = 0; i < 9; ++i) t.embeddings.push_back(normalized({1.0, 0.1 * (i + 1), 0.0}));
  t.embeddings[4] = unit(3, 0);
  t.exemplar = unit(3, 0);
  t.likelihood = likelihood_map(t.embeddings, {0, t.exemplar});
  // Neighbours ranked by similarity to tile 4 (the exemplar): 0, 1, 2, 3, 5, ...
  CHECK(run_search(SearchKind::local_initial, g3, t).order.front() == 4);
  CHECK(run_search(SearchKind::local_initial, g3, t).order[1] == 0);
}

TEST_CASE("every search visits every tile exactly once and ML is scale invariant") {
  std::mt19937_64 rng(64);
  for (int trial = 0; trial < 40; ++trial) {
    const int rows = std::uniform_int_distribution<int>(1, 9)(rng);
    const int cols = std::uniform_int_distribution<int>(1, 9)(rng);
    Fixture f = random_fixture(rng, rows, cols);
    for (const SearchKind k : kAllKinds) {
      const auto traj = run_search(k, f.grid, f.scores);
      REQUIRE(traj.total_tiles == f.grid.size());
      REQUIRE(sorted_copy(traj.order) == iota_n(f.grid.size()));
    }
    const auto base = run_search(SearchKind::g_ml_mstr, f.grid, f.scores).order;
    for (const double c : {0.001, 3.0, 1e6}) {
      TileScores scaled = f.scores;
      for (double& x : scaled.likelihood) x *= c;
      REQUIRE(run_search(SearchKind::g_ml_mstr, f.grid, scaled).order == base);
    }
  }
}

TEST_CASE("recall_vs_looks examples") {
  const TileGrid grid = tile_image(4096, 4096, 512);
  const Scene s{4096, 4096, {{0, 1, {10, 10, 30, 30}}, {1, 1, {100, 300, 30, 30}}, {2, 0, {3000, 3000, 30, 30}}}};
  SearchTrajectory traj;
  traj.total_tiles = grid.size();
  traj.order = iota_n(grid.size());
  const RecallCurve full = recall_vs_looks(traj, s, grid, 1);
  REQUIRE(full.points.size() == 64);
  CHECK(full.points[0].normalized_looks == 1.0 / 64.0);
  CHECK(full.points[0].recall == 1.0);
  CHECK(full.points.back().normalized_looks == 1.0);
  CHECK(full.points.back().recall == 1.0);
  CHECK(area_under_recall(full) == 1.0);

  SearchTrajectory none;
  none.total_tiles = grid.size();
  CHECK(recall_vs_looks(none, s, grid, 1).points.empty());
  CHECK(area_under_recall(recall_vs_looks(none, s, grid, 1)) == 0.0);

  const RecallCurve missing = recall_vs_looks(traj, s, grid, 7);
  CHECK(missing.points.empty());
  CHECK(!missing.diagnostic.empty());

  // A box straddling a tile edge counts in the tile holding its integer centre.
  const Scene edge{1024, 1024, {{0, 0, {500, 0, 25, 10}}}};  // centre x = 512
  const TileGrid g2 = tile_image(1024, 1024, 512);
  SearchTrajectory first_tile{{0, 1, 2, 3}, {}, 4};
  const RecallCurve c = recall_vs_looks(first_tile, edge, g2, 0);
  CHECK(c.points[0].recall == 0.0);
  CHECK(c.points[1].recall == 1.0);
  CHECK(area_under_recall(c) == 0.75);
}

TEST_CASE("recall_vs_looks matches the landing oracle and is monotone") {
  std::mt19937_64 rng(65);
  for (int trial = 0; trial < 60; ++trial) {
    const int size = std::uniform_int_distribution<int>(300, 2500)(rng);
    const int tile = std::uniform_int_distribution<int>(100, 600)(rng);
    Scene s{size, size, {}};
    const int n = std::uniform_int_distribution<int>(1, 15)(rng);
    for (int i = 0; i < n; ++i) {
      const int w = std::uniform_int_distribution<int>(1, 80)(rng);
      const int h = std::uniform_int_distribution<int>(1, 80)(rng);
      s.objects.push_back({i, static_cast<int>(rng() % 2), {static_cast<int>(rng() % (size - w + 1)),
                                                             static_cast<int>(rng() % (size - h + 1)), w, h}});
    }
    const int target = s.objects[0].class_id;
    const TileGrid grid = tile_image(size, size, tile);
    SearchTrajectory traj;
    traj.total_tiles = grid.size();
    traj.order = iota_n(grid.size());
    std::shuffle(traj.order.begin(), traj.order.end(), rng);
    const RecallCurve curve = recall_vs_looks(traj, s, grid, target);
    const auto want = oracle::landing_recall(traj.order, s, grid, target);
    REQUIRE(curve.points.size() == want.size());
    for (std::size_t k = 0; k < want.size(); ++k) {
      REQUIRE(curve.points[k].recall == doctest::Approx(want[k]).epsilon(1e-15));
      if (k > 0) REQUIRE(curve.points[k].recall >= curve.points[k - 1].recall);
    }
    REQUIRE(curve.points.back().recall == 1.0);
    REQUIRE(curve.points.back().normalized_looks == 1.0);
  }
}

TEST_CASE("parse_search_kind") {
  CHECK(parse_search_kind("local_current") == SearchKind::local_current);
  CHECK(to_string(SearchKind::g_map_mstr) == "g_map_mstr");
  CHECK_THROWS_AS(parse_search_kind("spiral"), Error);
}
