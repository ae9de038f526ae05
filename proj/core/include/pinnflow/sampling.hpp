#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "pinnflow/geometry.hpp"
#include "pinnflow/rng.hpp"
#include "pinnflow/vec2.hpp"

namespace pinnflow::sampling {

enum class Arrangement { CellCentered, NodeCentered };

/// Uniform lattice; spacing is identical in both axes. Counts are the number
/// of sample positions per axis for the chosen arrangement.
struct GridSpec {
  Vec2 origin;
  double dx = 0.0;
  int nx = 0, ny = 0;

  void validate() const;
};

/// Canonical lattice position: cell-centered samples sit at
/// origin + (i + 1/2) dx, node-centered at origin + i dx. All neighbor
/// coordinates are derived through this function so equal lattice nodes
/// are bit-identical.
Vec2 grid_point(const GridSpec& g, Arrangement a, int i, int j);

/// Smallest grid of the given arrangement covering [lo, hi].
GridSpec grid_covering(Vec2 lo, Vec2 hi, double dx, Arrangement a);

enum class NeighborKind : uint8_t { Interior, BoundaryCoincident, External };

struct Neighbor {
  NeighborKind kind = NeighborKind::Interior;
  Vec2 pos;        // neighbor coordinate (lattice point)
  int li = 0, lj = 0;

  // BoundaryCoincident / External: boundary data resolved at build time.
  geom::BcKind bc_kind = geom::BcKind::Dirichlet;
  Vec2 bc_value;   // Dirichlet velocity or Neumann normal-derivative pair
  std::optional<double> pressure_bc;

  // External only.
  geom::MirrorRecord mirror;
};

/// One interior sample and its four axis neighbors (E, W, N, S).
struct StencilRecord {
  int center = -1;  // index into SampleSet::interior
  std::array<Neighbor, 4> nb;
};

struct BoundarySamplePoint {
  Vec2 pos;
  int segment;
  geom::BcKind kind;
  Vec2 bc_velocity;  // Dirichlet value (Neumann samples carry the gradient)
};

struct SampleSet {
  Arrangement arrangement = Arrangement::CellCentered;
  GridSpec grid;
  std::vector<Vec2> interior;
  std::vector<std::pair<int, int>> interior_idx;  // lattice (i, j) per sample
  std::vector<BoundarySamplePoint> boundary;
  std::vector<StencilRecord> stencils;  // filled by classify_stencils
  int external_count = 0;
  int boundary_coincident_count = 0;
  int degenerate_mirror_count = 0;
};

/// Lays out interior samples (signed distance < 0) and boundary samples
/// (arclength marching, spacing ~ dx unless boundary_count pins the total).
SampleSet build_samples(const geom::LevelSetGeometry& g, const GridSpec& grid,
                        Arrangement arrangement,
                        std::optional<int> boundary_count = {});

/// Tags the four axis neighbors of every interior sample and precomputes
/// MirrorRecords (with boundary data) for external neighbors. Degenerate
/// mirrors are substituted with the stencil center and counted.
void classify_stencils(const geom::LevelSetGeometry& g, SampleSet& samples);

/// m interior sample indices, uniform without replacement, deterministic
/// under the rng state. Throws InvalidArgumentError when m > n or m < 1.
std::vector<int> draw_batch(const SampleSet& samples, int m, Rng& rng);

/// Layout export for stencil diagrams: x, y, per-direction tags, mirror
/// coordinates of external neighbors.
void export_stencil_csv(const SampleSet& samples, std::ostream& os);

}  // namespace pinnflow::sampling
