#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pinnflow/geometry.hpp"
#include "pinnflow/interp.hpp"
#include "pinnflow/loss.hpp"

namespace pinnflow::oracle {

/// Decay rate of the analytic Kovasznay solution.
double kovasznay_lambda(double re);

/// Exact steady solution of the 2D incompressible momentum/continuity
/// system: u = 1 - e^{lx} cos(2 pi y), v = (l / 2 pi) e^{lx} sin(2 pi y),
/// p = (1 - e^{2lx}) / 2.
std::array<double, 3> kovasznay(double re, Vec2 p);

enum class Provenance { Analytic, Solver };

struct ReferenceField {
  interp::GriddedField field;
  Provenance provenance = Provenance::Solver;
  std::string case_name;
  double re = 0;
  double steady_residual = 0;  // final max velocity change per step
  double max_divergence = 0;   // discrete face divergence at steadiness
  int64_t iterations = 0;
};

/// Analytic reference sampled onto a grid (mask restricted to the geometry
/// interior when a geometry is given).
ReferenceField sample_analytic(const std::function<std::array<double, 3>(Vec2)>& fn,
                               const sampling::GridSpec& grid, double re,
                               const geom::LevelSetGeometry* geometry = nullptr);

struct SolverOptions {
  int64_t max_steps = 2'000'000;
  double steady_tol = 1e-8;      // max |u^{n+1} - u^n| per pseudo-time step
  double cfl_safety = 0.8;
  int64_t log_every = 0;         // 0 = silent
  interp::KernelForm kernel = interp::KernelForm::Corrected;
  const interp::GriddedField* warm_start = nullptr;
};

/// Pseudo-time projection solver (explicit predictor, pressure-Poisson
/// correction) on a cell-centered grid with mirror-point ghost treatment of
/// irregular boundaries. Marches until the steady tolerance is met; throws
/// SolverDivergenceError (with residual history) otherwise.
ReferenceField projection_solve(const geom::LevelSetGeometry& g,
                                const sampling::GridSpec& grid,
                                const loss::PhysicsConfig& physics,
                                const SolverOptions& opts = {});

struct Metrics {
  double mse = 0;     // mean over points of |u_pred - u_true|^2 (summed components)
  double rel_l2 = 0;  // ||u_pred - u_true|| / ||u_true|| over stacked components
  int points = 0;
};

Metrics velocity_metrics(std::span<const std::array<double, 3>> pred,
                         std::span<const std::array<double, 3>> ref);

/// Reference interpolated at the points (h = reference grid spacing).
std::vector<std::array<double, 3>> reference_at(const ReferenceField& ref,
                                                std::span<const Vec2> points,
                                                interp::KernelForm form =
                                                    interp::KernelForm::Corrected);

Metrics evaluate(const std::function<std::array<double, 3>(Vec2)>& pinn,
                 const ReferenceField& ref, std::span<const Vec2> points,
                 interp::KernelForm form = interp::KernelForm::Corrected);

/// Interior training samples plus a fixed 200 x 100 lattice clipped to the
/// domain.
std::vector<Vec2> evaluation_points(const geom::LevelSetGeometry& g,
                                    const sampling::SampleSet& samples,
                                    int lattice_nx = 200, int lattice_ny = 100);

// Portable field file: '#'-prefixed text header, CSV body (x,y,u,v,p,mask).
void write_field(const ReferenceField& ref, const std::filesystem::path& path);
ReferenceField read_field(const std::filesystem::path& path);

}  // namespace pinnflow::oracle
