#include <cmath>

#include "pinnflow/errors.hpp"
#include "pinnflow/oracle.hpp"

namespace pinnflow::oracle {

Metrics velocity_metrics(std::span<const std::array<double, 3>> pred,
                         std::span<const std::array<double, 3>> ref) {
  if (pred.size() != ref.size() || pred.empty()) {
    throw InvalidArgumentError("velocity_metrics: mismatched or empty point sets");
  }
  double err2 = 0, ref2 = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double du = pred[i][0] - ref[i][0];
    const double dv = pred[i][1] - ref[i][1];
    err2 += du * du + dv * dv;
    ref2 += ref[i][0] * ref[i][0] + ref[i][1] * ref[i][1];
  }
  Metrics m;
  m.points = static_cast<int>(pred.size());
  m.mse = err2 / m.points;
  m.rel_l2 = ref2 > 0 ? std::sqrt(err2 / ref2) : std::sqrt(err2);
  return m;
}

std::vector<std::array<double, 3>> reference_at(const ReferenceField& ref,
                                                std::span<const Vec2> points,
                                                interp::KernelForm form) {
  std::vector<std::array<double, 3>> out;
  out.reserve(points.size());
  for (const Vec2& p : points) {
    out.push_back(interp::interpolate(ref.field, p, ref.field.grid.dx, form));
  }
  return out;
}

Metrics evaluate(const std::function<std::array<double, 3>(Vec2)>& pinn,
                 const ReferenceField& ref, std::span<const Vec2> points,
                 interp::KernelForm form) {
  const auto truth = reference_at(ref, points, form);
  std::vector<std::array<double, 3>> pred;
  pred.reserve(points.size());
  for (const Vec2& p : points) pred.push_back(pinn(p));
  return velocity_metrics(pred, truth);
}

std::vector<Vec2> evaluation_points(const geom::LevelSetGeometry& g,
                                    const sampling::SampleSet& samples,
                                    int lattice_nx, int lattice_ny) {
  std::vector<Vec2> pts = samples.interior;
  const auto [lo, hi] = g.bounding_box();
  for (int j = 0; j < lattice_ny; ++j) {
    for (int i = 0; i < lattice_nx; ++i) {
      const Vec2 p{lo.x + (i + 0.5) * (hi.x - lo.x) / lattice_nx,
                   lo.y + (j + 0.5) * (hi.y - lo.y) / lattice_ny};
      if (g.signed_distance(p) < 0) pts.push_back(p);
    }
  }
  return pts;
}

}  // namespace pinnflow::oracle
