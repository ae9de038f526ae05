#include "pinnflow/interp.hpp"

#include <cmath>

#include "pinnflow/errors.hpp"

namespace pinnflow::interp {

double kernel_phi(double r, KernelForm form) {
  const double a = std::abs(r);
  if (a > 2.0) return 0.0;
  if (a <= 1.0) {
    const double disc = form == KernelForm::Corrected ? 1.0 + 4.0 * a - 4.0 * a * a
                                                      : 1.0 + 4.0 * a + 4.0 * a * a;
    return (3.0 - 2.0 * a + std::sqrt(disc)) / 8.0;
  }
  return (5.0 - 2.0 * a - std::sqrt(-7.0 + 12.0 * a - 4.0 * a * a)) / 8.0;
}

void GriddedField::allocate(double fill, uint8_t mask_fill) {
  u.assign(size(), fill);
  v.assign(size(), fill);
  p.assign(size(), fill);
  mask.assign(size(), mask_fill);
}

void GriddedField::validate() const {
  grid.validate();
  const std::size_t n = size();
  if (u.size() != n || v.size() != n || p.size() != n || mask.size() != n) {
    throw ConfigError("GriddedField: array lengths must equal nx*ny");
  }
}

namespace {

struct Support {
  int i0, i1, j0, j1;  // inclusive index ranges intersected with the grid
  double wx[8], wy[8]; // per-axis kernel weights (support width <= 5 incl. guards)
};

/// Index range and per-axis weights for the 2h tensor support around point.
bool support_weights(const GriddedField& f, Vec2 pt, double h, KernelForm form,
                     Support& s) {
  const double off = f.arrangement == sampling::Arrangement::CellCentered ? 0.5 : 0.0;
  const auto axis_range = [&](double q, double origin, int n, int& k0, int& k1) {
    // positions origin + (k + off) dx within |pos - q| <= 2h
    const double t = (q - origin) / f.grid.dx - off;
    k0 = static_cast<int>(std::ceil(t - 2.0 * h / f.grid.dx - 1e-12));
    k1 = static_cast<int>(std::floor(t + 2.0 * h / f.grid.dx + 1e-12));
    k0 = std::max(k0, 0);
    k1 = std::min(k1, n - 1);
    return k0 <= k1;
  };
  if (!axis_range(pt.x, f.grid.origin.x, f.grid.nx, s.i0, s.i1)) return false;
  if (!axis_range(pt.y, f.grid.origin.y, f.grid.ny, s.j0, s.j1)) return false;
  if (s.i1 - s.i0 >= 8 || s.j1 - s.j0 >= 8) {
    throw InvalidArgumentError("interpolate: h too large relative to grid spacing");
  }
  for (int i = s.i0; i <= s.i1; ++i) {
    const double x = f.grid.origin.x + (i + off) * f.grid.dx;
    s.wx[i - s.i0] = kernel_phi((x - pt.x) / h, form);
  }
  for (int j = s.j0; j <= s.j1; ++j) {
    const double y = f.grid.origin.y + (j + off) * f.grid.dx;
    s.wy[j - s.j0] = kernel_phi((y - pt.y) / h, form);
  }
  return true;
}

}  // namespace

std::array<double, 3> interpolate(const GriddedField& field, Vec2 point, double h,
                                  KernelForm form) {
  if (!point.finite()) throw InvalidArgumentError("interpolate: non-finite point");
  if (!(h > 0)) throw InvalidArgumentError("interpolate: h must be > 0");
  Support s;
  if (!support_weights(field, point, h, form, s)) {
    throw InterpSupportError("interpolate: query outside the grid support");
  }
  double wsum = 0, su = 0, sv = 0, sp = 0;
  for (int j = s.j0; j <= s.j1; ++j) {
    for (int i = s.i0; i <= s.i1; ++i) {
      const int idx = field.index(i, j);
      if (!field.mask[idx]) continue;
      const double w = s.wx[i - s.i0] * s.wy[j - s.j0];
      if (w == 0.0) continue;
      wsum += w;
      su += w * field.u[idx];
      sv += w * field.v[idx];
      sp += w * field.p[idx];
    }
  }
  if (!(wsum > 0)) {
    throw InterpSupportError("interpolate: no valid node within the 2h radius");
  }
  return {su / wsum, sv / wsum, sp / wsum};
}

double interpolate_scalar(const GriddedField& field, const std::vector<double>& comp,
                          Vec2 point, double h, KernelForm form) {
  Support s;
  if (!support_weights(field, point, h, form, s)) {
    throw InterpSupportError("interpolate: query outside the grid support");
  }
  double wsum = 0, acc = 0;
  for (int j = s.j0; j <= s.j1; ++j) {
    for (int i = s.i0; i <= s.i1; ++i) {
      const int idx = field.index(i, j);
      if (!field.mask[idx]) continue;
      const double w = s.wx[i - s.i0] * s.wy[j - s.j0];
      if (w == 0.0) continue;
      wsum += w;
      acc += w * comp[idx];
    }
  }
  if (!(wsum > 0)) {
    throw InterpSupportError("interpolate: no valid node within the 2h radius");
  }
  return acc / wsum;
}

}  // namespace pinnflow::interp
