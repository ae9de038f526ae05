#include <cmath>

#include "pinnflow/errors.hpp"
#include "pinnflow/oracle.hpp"

namespace pinnflow::oracle {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

double kovasznay_lambda(double re) {
  if (!(re > 0)) throw InvalidArgumentError("kovasznay: Re must be > 0");
  return 0.5 * re - std::sqrt(0.25 * re * re + 4.0 * M_PI * M_PI);
}

std::array<double, 3> kovasznay(double re, Vec2 p) {
  const double l = kovasznay_lambda(re);
  const double ex = std::exp(l * p.x);
  const double u = 1.0 - ex * std::cos(kTwoPi * p.y);
  const double v = (l / kTwoPi) * ex * std::sin(kTwoPi * p.y);
  const double pr = 0.5 * (1.0 - ex * ex);
  return {u, v, pr};
}

ReferenceField sample_analytic(const std::function<std::array<double, 3>(Vec2)>& fn,
                               const sampling::GridSpec& grid, double re,
                               const geom::LevelSetGeometry* geometry) {
  ReferenceField ref;
  ref.provenance = Provenance::Analytic;
  ref.re = re;
  ref.field.grid = grid;
  ref.field.arrangement = sampling::Arrangement::CellCentered;
  ref.field.allocate();
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const int idx = ref.field.index(i, j);
      const Vec2 pos = ref.field.pos(i, j);
      if (geometry && !(geometry->signed_distance(pos) < 0)) {
        ref.field.mask[idx] = 0;
        continue;
      }
      const auto val = fn(pos);
      ref.field.u[idx] = val[0];
      ref.field.v[idx] = val[1];
      ref.field.p[idx] = val[2];
    }
  }
  return ref;
}

}  // namespace pinnflow::oracle
