#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>
#include <sstream>

#include "pinnflow/errors.hpp"
#include "pinnflow/sampling.hpp"

using namespace pinnflow;
using namespace pinnflow::sampling;

namespace {

SampleSet classified(const geom::LevelSetGeometry& g, const GridSpec& grid,
                     Arrangement a) {
  auto s = build_samples(g, grid, a);
  classify_stencils(g, s);
  return s;
}

}  // namespace

TEST_CASE("square 50x50 cell-centered: counts match enumeration") {
  const auto g = geom::make_square_cavity();
  const GridSpec grid{{0, 0}, 0.02, 50, 50};
  const auto s = classified(g, grid, Arrangement::CellCentered);
  CHECK(s.interior.size() == 2500);
  CHECK(s.external_count == 200);  // 196 boundary-adjacent samples, corners doubled
  int near_wall = 0;
  for (const auto& st : s.stencils) {
    int ext = 0;
    for (const auto& nb : st.nb) ext += nb.kind == NeighborKind::External;
    if (ext > 0) ++near_wall;
    // Neighbor coordinates are exactly center +- dx along one axis.
    const Vec2 c = s.interior[st.center];
    CHECK(std::abs(std::abs(st.nb[0].pos.x - c.x) - grid.dx) < 1e-12);
    CHECK(st.nb[0].pos.y == c.y);
  }
  CHECK(near_wall == 196);
  // Spacing-based boundary samples: perimeter 4 / 0.02.
  CHECK(s.boundary.size() == 200);
}

TEST_CASE("square node-centered 101x101: boundary-coincident tagging") {
  const auto g = geom::make_square_cavity();
  const GridSpec grid{{0, 0}, 0.01, 101, 101};
  const auto s = classified(g, grid, Arrangement::NodeCentered);
  CHECK(s.interior.size() == 9801);
  CHECK(s.external_count == 0);  // perfect connectivity
  // 396 stencil tags touch the 400 boundary nodes (corners are not axis
  // neighbors of any interior node).
  CHECK(s.boundary_coincident_count == 396);
  for (const auto& st : s.stencils) {
    for (const auto& nb : st.nb) {
      if (nb.kind == NeighborKind::BoundaryCoincident) {
        CHECK(std::abs(g.signed_distance(nb.pos)) <= 1e-9);
      }
    }
  }
}

TEST_CASE("semicircle paper grid: 3930 interior and curved-boundary externals") {
  const auto g = geom::make_semicircle_cavity(1.0);
  const auto [lo, hi] = g.bounding_box();
  const auto grid = grid_covering(lo, hi, 0.02, Arrangement::CellCentered);
  CHECK(grid.nx == 100);
  CHECK(grid.ny == 50);
  const auto s = classified(g, grid, Arrangement::CellCentered);
  CHECK(s.interior.size() == 3930);
  CHECK(s.external_count > 0);
  for (const auto& st : s.stencils) {
    CHECK(g.signed_distance(s.interior[st.center]) < 0);
    for (const auto& nb : st.nb) {
      if (nb.kind == NeighborKind::External) {
        CHECK(nb.mirror.ap <= std::sqrt(2.0) * grid.dx + 1e-12);
        CHECK(g.signed_distance(nb.mirror.mirror) < 0);
      }
    }
  }
}

TEST_CASE("rebuild determinism: identical config gives bit-identical sets") {
  const auto g = geom::make_wavy_channel();
  const auto [lo, hi] = g.bounding_box();
  const auto grid = grid_covering(lo, hi, 0.1, Arrangement::CellCentered);
  const auto a = classified(g, grid, Arrangement::CellCentered);
  const auto b = classified(g, grid, Arrangement::CellCentered);
  REQUIRE(a.interior.size() == b.interior.size());
  for (std::size_t i = 0; i < a.interior.size(); ++i) {
    CHECK(a.interior[i].x == b.interior[i].x);
    CHECK(a.interior[i].y == b.interior[i].y);
  }
  REQUIRE(a.stencils.size() == b.stencils.size());
  for (std::size_t i = 0; i < a.stencils.size(); ++i) {
    for (int k = 0; k < 4; ++k) {
      CHECK(a.stencils[i].nb[k].kind == b.stencils[i].nb[k].kind);
      CHECK(a.stencils[i].nb[k].mirror.mirror.x == b.stencils[i].nb[k].mirror.mirror.x);
    }
  }
  CHECK(a.external_count == b.external_count);
}

TEST_CASE("empty interior raises a configuration error") {
  const auto g = geom::make_square_cavity();
  // Grid far away from the unit square.
  const GridSpec grid{{10, 10}, 0.1, 5, 5};
  CHECK_THROWS_AS(build_samples(g, grid, Arrangement::CellCentered), ConfigError);
}

TEST_CASE("draw_batch: determinism, permutation, bounds") {
  const auto g = geom::make_square_cavity();
  const GridSpec grid{{0, 0}, 0.1, 10, 10};
  const auto s = classified(g, grid, Arrangement::CellCentered);
  const int n = static_cast<int>(s.interior.size());

  Rng r1(42), r2(42);
  const auto b1 = draw_batch(s, 32, r1);
  const auto b2 = draw_batch(s, 32, r2);
  CHECK(b1 == b2);

  Rng r3(7);
  auto perm = draw_batch(s, n, r3);
  std::sort(perm.begin(), perm.end());
  for (int i = 0; i < n; ++i) CHECK(perm[i] == i);

  Rng r4(7);
  CHECK_THROWS_AS(draw_batch(s, n + 1, r4), InvalidArgumentError);
  CHECK_THROWS_AS(draw_batch(s, 0, r4), InvalidArgumentError);
}

TEST_CASE("draw_batch frequencies are uniform (binomial 3-sigma band)") {
  const auto g = geom::make_square_cavity();
  const GridSpec grid{{0, 0}, 0.1, 10, 10};
  const auto s = classified(g, grid, Arrangement::CellCentered);
  const int n = static_cast<int>(s.interior.size());
  const int m = 25;
  const int T = 100000;
  std::vector<int> count(n, 0);
  Rng rng(2024);
  for (int t = 0; t < T; ++t) {
    for (int idx : draw_batch(s, m, rng)) count[idx] += 1;
  }
  const double p = static_cast<double>(m) / n;
  const double mean = T * p;
  const double sigma = std::sqrt(T * p * (1 - p));
  int outside3 = 0;
  for (int c : count) {
    CHECK(std::abs(c - mean) < 6 * sigma);  // hard bound
    if (std::abs(c - mean) > 3 * sigma) ++outside3;
  }
  // ~0.3% of indices expected outside 3 sigma; allow generous slack.
  CHECK(outside3 <= n / 50 + 2);
}

TEST_CASE("stencil layout CSV export") {
  const auto g = geom::make_square_cavity();
  const GridSpec grid{{0, 0}, 0.25, 4, 4};
  const auto s = classified(g, grid, Arrangement::CellCentered);
  std::ostringstream os;
  export_stencil_csv(s, os);
  const std::string text = os.str();
  CHECK(text.find("x,y,tag_e,tag_w,tag_n,tag_s") == 0);
  CHECK(text.find("external") != std::string::npos);
  // 16 samples + header.
  int lines = 0;
  for (char ch : text) lines += ch == '\n';
  CHECK(lines == 17);
}
