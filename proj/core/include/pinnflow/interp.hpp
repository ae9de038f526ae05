#pragma once

#include <array>
#include <vector>

#include "pinnflow/sampling.hpp"
#include "pinnflow/vec2.hpp"

namespace pinnflow::interp {

/// The regularized 4-point kernel. Corrected uses the continuous inner
/// discriminant 1 + 4|r| - 4r^2; AsPrinted keeps the discontinuous
/// +4r^2 variant for fidelity experiments.
enum class KernelForm { Corrected, AsPrinted };

/// Piecewise kernel weight; zero for |r| > 2. Total function of r.
double kernel_phi(double r, KernelForm form = KernelForm::Corrected);

/// Gridded scalar triple (u, v, p) with a validity mask. Nodes sit at the
/// grid's arrangement positions; masked-out nodes are never read.
struct GriddedField {
  sampling::GridSpec grid;
  sampling::Arrangement arrangement = sampling::Arrangement::CellCentered;
  std::vector<double> u, v, p;
  std::vector<uint8_t> mask;

  int index(int i, int j) const { return i + j * grid.nx; }
  Vec2 pos(int i, int j) const {
    return sampling::grid_point(grid, arrangement, i, j);
  }
  std::size_t size() const { return static_cast<std::size_t>(grid.nx) * grid.ny; }
  void allocate(double fill = 0.0, uint8_t mask_fill = 1);
  void validate() const;
};

/// Tensor-product inverse-distance-weighted interpolation with per-query
/// renormalization over valid nodes inside the 2h radius. Exact on constant
/// fields; throws InterpSupportError when no valid node is in reach.
std::array<double, 3> interpolate(const GriddedField& field, Vec2 point, double h,
                                  KernelForm form = KernelForm::Corrected);

/// Same weights applied to a single component array (length nx*ny).
double interpolate_scalar(const GriddedField& field, const std::vector<double>& comp,
                          Vec2 point, double h, KernelForm form = KernelForm::Corrected);

}  // namespace pinnflow::interp
