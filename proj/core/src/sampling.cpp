#include "pinnflow/sampling.hpp"

#include <cmath>
#include <numeric>
#include <ostream>

#include "pinnflow/errors.hpp"

namespace pinnflow::sampling {

namespace {
constexpr double kBoundaryTol = 1e-9;
}

void GridSpec::validate() const {
  if (!(dx > 0)) throw ConfigError("GridSpec: dx must be > 0");
  if (nx < 3 || ny < 3) throw ConfigError("GridSpec: counts must be >= 3 per axis");
  if (!origin.finite()) throw ConfigError("GridSpec: non-finite origin");
}

Vec2 grid_point(const GridSpec& g, Arrangement a, int i, int j) {
  const double off = a == Arrangement::CellCentered ? 0.5 : 0.0;
  return {g.origin.x + (i + off) * g.dx, g.origin.y + (j + off) * g.dx};
}

GridSpec grid_covering(Vec2 lo, Vec2 hi, double dx, Arrangement a) {
  if (!(dx > 0)) throw ConfigError("grid_covering: dx must be > 0");
  GridSpec g;
  g.origin = lo;
  g.dx = dx;
  const double wx = hi.x - lo.x, wy = hi.y - lo.y;
  if (a == Arrangement::CellCentered) {
    g.nx = static_cast<int>(std::llround(wx / dx));
    g.ny = static_cast<int>(std::llround(wy / dx));
    // Never truncate the domain: cover the box even when dx does not divide it.
    if (g.nx * dx < wx - 1e-12) ++g.nx;
    if (g.ny * dx < wy - 1e-12) ++g.ny;
  } else {
    g.nx = static_cast<int>(std::llround(wx / dx)) + 1;
    g.ny = static_cast<int>(std::llround(wy / dx)) + 1;
    if ((g.nx - 1) * dx < wx - 1e-12) ++g.nx;
    if ((g.ny - 1) * dx < wy - 1e-12) ++g.ny;
  }
  g.validate();
  return g;
}

SampleSet build_samples(const geom::LevelSetGeometry& g, const GridSpec& grid,
                        Arrangement arrangement, std::optional<int> boundary_count) {
  grid.validate();
  SampleSet out;
  out.arrangement = arrangement;
  out.grid = grid;

  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const Vec2 p = grid_point(grid, arrangement, i, j);
      if (g.signed_distance(p) < -kBoundaryTol) {
        out.interior.push_back(p);
        out.interior_idx.emplace_back(i, j);
      }
    }
  }
  if (out.interior.empty()) {
    throw ConfigError("build_samples: no interior samples (grid too coarse?)");
  }

  for (const auto& bp : g.boundary_points(grid.dx, boundary_count)) {
    const auto& seg = g.segments()[bp.segment];
    BoundarySamplePoint s;
    s.pos = bp.pos;
    s.segment = bp.segment;
    s.kind = seg.bc.kind;
    s.bc_velocity = seg.bc.value(bp.pos);
    out.boundary.push_back(s);
  }
  return out;
}

void classify_stencils(const geom::LevelSetGeometry& g, SampleSet& samples) {
  samples.stencils.clear();
  samples.stencils.reserve(samples.interior.size());
  samples.external_count = 0;
  samples.boundary_coincident_count = 0;
  samples.degenerate_mirror_count = 0;

  const GridSpec& grid = samples.grid;
  const double max_reach = 2.0 * grid.dx;
  // E, W, N, S
  constexpr int di[4] = {1, -1, 0, 0};
  constexpr int dj[4] = {0, 0, 1, -1};

  for (size_t s = 0; s < samples.interior.size(); ++s) {
    StencilRecord rec;
    rec.center = static_cast<int>(s);
    const auto [ci, cj] = samples.interior_idx[s];
    for (int k = 0; k < 4; ++k) {
      Neighbor& nb = rec.nb[k];
      nb.li = ci + di[k];
      nb.lj = cj + dj[k];
      nb.pos = grid_point(grid, samples.arrangement, nb.li, nb.lj);
      const double sd = g.signed_distance(nb.pos);
      if (sd < -kBoundaryTol) {
        nb.kind = NeighborKind::Interior;
      } else if (std::abs(sd) <= kBoundaryTol) {
        nb.kind = NeighborKind::BoundaryCoincident;
        const int seg_idx = g.segment_at(nb.pos);
        const auto& seg = g.segments()[seg_idx];
        nb.bc_kind = seg.bc.kind;
        nb.bc_value = seg.bc.value(nb.pos);
        if (seg.pressure_value) nb.pressure_bc = (*seg.pressure_value)(nb.pos);
        samples.boundary_coincident_count += 1;
      } else {
        nb.kind = NeighborKind::External;
        nb.mirror = g.mirror_point(nb.pos, max_reach);
        if (nb.mirror.degenerate) {
          // Fall back to the stencil-center mirror: Q at the sample itself.
          nb.mirror.mirror = samples.interior[s];
          samples.degenerate_mirror_count += 1;
        }
        const auto& seg = g.segments()[nb.mirror.segment];
        nb.bc_kind = seg.bc.kind;
        nb.bc_value = seg.bc.value(nb.mirror.boundary);
        if (seg.pressure_value) nb.pressure_bc = (*seg.pressure_value)(nb.mirror.boundary);
        samples.external_count += 1;
      }
    }
    samples.stencils.push_back(std::move(rec));
  }
}

std::vector<int> draw_batch(const SampleSet& samples, int m, Rng& rng) {
  const int n = static_cast<int>(samples.interior.size());
  if (m < 1 || m > n) {
    throw InvalidArgumentError("draw_batch: need 1 <= m <= n, got m=" +
                               std::to_string(m) + ", n=" + std::to_string(n));
  }
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  // Partial Fisher-Yates: first m entries are a uniform sample w/o replacement.
  for (int i = 0; i < m; ++i) {
    const int j = i + static_cast<int>(rng.uniform_index(static_cast<uint64_t>(n - i)));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(m);
  return idx;
}

namespace {

const char* tag_name(NeighborKind k) {
  switch (k) {
    case NeighborKind::Interior: return "interior";
    case NeighborKind::BoundaryCoincident: return "boundary";
    case NeighborKind::External: return "external";
  }
  return "?";
}

}  // namespace

void export_stencil_csv(const SampleSet& samples, std::ostream& os) {
  os << "x,y,tag_e,tag_w,tag_n,tag_s,"
        "mirror_e_x,mirror_e_y,mirror_w_x,mirror_w_y,"
        "mirror_n_x,mirror_n_y,mirror_s_x,mirror_s_y\n";
  os.precision(17);
  for (const auto& st : samples.stencils) {
    const Vec2 c = samples.interior[st.center];
    os << c.x << ',' << c.y;
    for (int k = 0; k < 4; ++k) os << ',' << tag_name(st.nb[k].kind);
    for (int k = 0; k < 4; ++k) {
      if (st.nb[k].kind == NeighborKind::External) {
        os << ',' << st.nb[k].mirror.mirror.x << ',' << st.nb[k].mirror.mirror.y;
      } else {
        os << ",,";
      }
    }
    os << '\n';
  }
}

}  // namespace pinnflow::sampling
