#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include <Eigen/Sparse>
#include <fftw3.h>

#include "pinnflow/errors.hpp"
#include "pinnflow/oracle.hpp"

namespace pinnflow::oracle {

namespace {

using sampling::Arrangement;
using sampling::GridSpec;

/// Cell-centered solver state with a one-cell ghost ring. Index space
/// i in [-1, nx], j in [-1, ny].
struct Mesh {
  int nx = 0, ny = 0;
  double dx = 0;
  Vec2 origin;
  int stride = 0;

  int idx(int i, int j) const { return (i + 1) + (j + 1) * stride; }
  Vec2 center(int i, int j) const {
    return {origin.x + (i + 0.5) * dx, origin.y + (j + 0.5) * dx};
  }
  std::size_t cells() const { return static_cast<std::size_t>(nx + 2) * (ny + 2); }
};

struct GhostInfo {
  int cell = 0;
  bool dirichlet = true;
  double ubc = 0, vbc = 0;         // velocity value (Dirichlet) or gradient (Neumann)
  bool has_pbc = false;
  double pbc = 0;
  double ratio = 2.0;              // AQ/PQ
  double aq = 0;                   // |A - Q| for the Neumann constraint
  std::vector<int> nodes;          // interpolation support at the mirror point
  std::vector<double> weights;
};

struct PoissonFFT {
  int nx = 0, ny = 0;
  double dx = 0;
  fftw_plan fwd = nullptr, inv = nullptr;
  double* buf = nullptr;
  std::vector<double> eig_x, eig_y;

  PoissonFFT(int nx_, int ny_, double dx_) : nx(nx_), ny(ny_), dx(dx_) {
    buf = fftw_alloc_real(static_cast<std::size_t>(nx) * ny);
    fwd = fftw_plan_r2r_2d(ny, nx, buf, buf, FFTW_REDFT10, FFTW_REDFT10, FFTW_ESTIMATE);
    inv = fftw_plan_r2r_2d(ny, nx, buf, buf, FFTW_REDFT01, FFTW_REDFT01, FFTW_ESTIMATE);
    eig_x.resize(nx);
    eig_y.resize(ny);
    for (int i = 0; i < nx; ++i) {
      eig_x[i] = (2.0 * std::cos(M_PI * i / nx) - 2.0) / (dx * dx);
    }
    for (int j = 0; j < ny; ++j) {
      eig_y[j] = (2.0 * std::cos(M_PI * j / ny) - 2.0) / (dx * dx);
    }
  }
  ~PoissonFFT() {
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
    fftw_free(buf);
  }

  /// Solves lap(phi) = rhs with homogeneous Neumann walls; zero-mean gauge.
  void solve(const std::vector<double>& rhs, std::vector<double>& phi) {
    std::copy(rhs.begin(), rhs.end(), buf);
    fftw_execute(fwd);
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const double lam = eig_x[i] + eig_y[j];
        double& c = buf[j * nx + i];
        c = (i == 0 && j == 0) ? 0.0 : c / lam;
      }
    }
    fftw_execute(inv);
    const double scale = 1.0 / (4.0 * nx * ny);
    phi.resize(static_cast<std::size_t>(nx) * ny);
    for (std::size_t k = 0; k < phi.size(); ++k) phi[k] = buf[k] * scale;
  }
};

struct PoissonLDLT {
  std::vector<int> fluid_of_cell;  // ring-index -> compact fluid index (-1 outside)
  std::vector<int> cell_of_fluid;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;

  PoissonLDLT(const Mesh& m, const std::vector<uint8_t>& fluid) {
    fluid_of_cell.assign(m.cells(), -1);
    for (int j = 0; j < m.ny; ++j) {
      for (int i = 0; i < m.nx; ++i) {
        if (fluid[m.idx(i, j)]) {
          fluid_of_cell[m.idx(i, j)] = static_cast<int>(cell_of_fluid.size());
          cell_of_fluid.push_back(m.idx(i, j));
        }
      }
    }
    const int n = static_cast<int>(cell_of_fluid.size());
    const double w = 1.0 / (m.dx * m.dx);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(5 * n);
    const int offs[4] = {1, -1, m.stride, -m.stride};
    for (int r = 0; r < n; ++r) {
      const int c = cell_of_fluid[r];
      double diag = 0;
      for (int o : offs) {
        const int nb = fluid_of_cell[c + o];
        if (nb >= 0) {
          trip.emplace_back(r, nb, -w);
          diag += w;
        }
      }
      if (r == 0) diag += w;  // gauge penalty; exact for mean-free rhs
      trip.emplace_back(r, r, diag);
      if (diag == (r == 0 ? w : 0.0)) {
        throw SolverDivergenceError("projection_solve: isolated fluid cell");
      }
    }
    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    solver.compute(A);
    if (solver.info() != Eigen::Success) {
      throw SolverDivergenceError("projection_solve: Poisson factorization failed");
    }
  }

  /// Solves -lap(phi) = -rhs over fluid cells (Neumann across masked faces).
  void solve(const std::vector<double>& rhs_fluid, std::vector<double>& phi_fluid) {
    Eigen::Map<const Eigen::VectorXd> b(rhs_fluid.data(), rhs_fluid.size());
    Eigen::VectorXd x = solver.solve(-b);
    phi_fluid.assign(x.data(), x.data() + x.size());
  }
};

class ProjectionSolver {
 public:
  ProjectionSolver(const geom::LevelSetGeometry& g, const GridSpec& grid,
                   const loss::PhysicsConfig& physics, const SolverOptions& opts)
      : g_(g), physics_(physics), opts_(opts) {
    grid.validate();
    mesh_.nx = grid.nx;
    mesh_.ny = grid.ny;
    mesh_.dx = grid.dx;
    mesh_.origin = grid.origin;
    mesh_.stride = grid.nx + 2;

    fluid_.assign(mesh_.cells(), 0);
    int n_fluid = 0;
    for (int j = 0; j < mesh_.ny; ++j) {
      for (int i = 0; i < mesh_.nx; ++i) {
        if (g.signed_distance(mesh_.center(i, j)) < 0) {
          fluid_[mesh_.idx(i, j)] = 1;
          ++n_fluid;
        }
      }
    }
    if (n_fluid == 0) throw ConfigError("projection_solve: no fluid cells");
    all_fluid_ = n_fluid == mesh_.nx * mesh_.ny;

    build_ghosts();
    if (all_fluid_) {
      fft_ = std::make_unique<PoissonFFT>(mesh_.nx, mesh_.ny, mesh_.dx);
    } else {
      ldlt_ = std::make_unique<PoissonLDLT>(mesh_, fluid_);
    }

    u_.assign(mesh_.cells(), 0.0);
    v_.assign(mesh_.cells(), 0.0);
    p_.assign(mesh_.cells(), 0.0);
    if (opts.warm_start) warm_start(*opts.warm_start);
  }

  ReferenceField run() {
    const double re = physics_.re;
    std::vector<double> us(mesh_.cells()), vs(mesh_.cells());
    std::vector<double> rhs, delta;
    std::vector<double> history;
    double dt = time_step(re);
    double max_change = std::numeric_limits<double>::infinity();

    int64_t step = 0;
    for (; step < opts_.max_steps; ++step) {
      if (step % 100 == 0) dt = time_step(re);

      apply_ghosts(u_, v_, &p_);
      predictor(us, vs, dt, re);
      apply_ghosts(us, vs, nullptr);
      balance_boundary_flux(us, vs);
      poisson_rhs(us, vs, dt, rhs);
      solve_poisson(rhs, delta);
      max_change = correct(us, vs, delta, dt);

      history.push_back(max_change);
      if (history.size() > 2000) history.erase(history.begin(), history.begin() + 1000);
      if (!std::isfinite(max_change) || max_change > 1e6) {
        throw SolverDivergenceError(
            "projection_solve: diverged at step " + std::to_string(step), history);
      }
      if (opts_.log_every > 0 && step % opts_.log_every == 0) {
        std::fprintf(stderr, "  step %lld  dmax %.3e  dt %.3e\n",
                     static_cast<long long>(step), max_change, dt);
      }
      if (max_change < opts_.steady_tol && step > 0) break;
    }
    if (!(max_change < opts_.steady_tol)) {
      throw SolverDivergenceError("projection_solve: not steady after max steps",
                                  history);
    }
    // The projected face field of the final step is the scheme's
    // mass-conserving velocity; its compact divergence is the residual of
    // the last Poisson solve.
    const double div = corrected_face_divergence(us, vs, delta, dt);
    return finalize(step + 1, max_change, div);
  }

 private:
  double time_step(double re) const {
    double umax = 1e-9;
    for (int j = 0; j < mesh_.ny; ++j) {
      for (int i = 0; i < mesh_.nx; ++i) {
        const int c = mesh_.idx(i, j);
        if (!fluid_[c]) continue;
        umax = std::max(umax, std::max(std::abs(u_[c]), std::abs(v_[c])));
      }
    }
    const double dt_diff = mesh_.dx * mesh_.dx * re / 4.0;
    const double dt_conv = mesh_.dx / umax;
    return opts_.cfl_safety * std::min(dt_diff, dt_conv);
  }

  void build_ghosts() {
    const int offs[4] = {1, -1, mesh_.stride, -mesh_.stride};
    for (int j = -1; j <= mesh_.ny; ++j) {
      for (int i = -1; i <= mesh_.nx; ++i) {
        const int c = mesh_.idx(i, j);
        if (fluid_[c]) continue;
        bool adj = false;
        for (int o : offs) {
          const int nb = c + o;
          if (nb >= 0 && nb < static_cast<int>(mesh_.cells()) && fluid_[nb] &&
              !on_ring_edge(i, j, o)) {
            adj = true;
            break;
          }
        }
        if (!adj) continue;
        ghosts_.push_back(make_ghost(i, j));
      }
    }
  }

  // Ring wrap-around guard: cell (i, j) and cell + offset must be lattice
  // neighbors, not adjacent in memory across a row boundary.
  bool on_ring_edge(int i, int j, int off) const {
    if (off == 1) return i == mesh_.nx;
    if (off == -1) return i == -1;
    if (off == mesh_.stride) return j == mesh_.ny;
    return j == -1;
  }

  GhostInfo make_ghost(int i, int j) {
    GhostInfo gi;
    gi.cell = mesh_.idx(i, j);
    const Vec2 a = mesh_.center(i, j);
    const geom::MirrorRecord mr = g_.mirror_point(a, 4.0 * mesh_.dx);
    Vec2 q = mr.mirror;
    double ratio = 2.0;
    double aq = 2.0 * mr.ap;
    if (mr.degenerate) {
      // Substitute the nearest adjacent fluid cell center for the mirror.
      const int oi[4] = {1, -1, 0, 0}, oj[4] = {0, 0, 1, -1};
      double best = std::numeric_limits<double>::infinity();
      for (int k = 0; k < 4; ++k) {
        const int ni = i + oi[k], nj = j + oj[k];
        if (ni < 0 || ni >= mesh_.nx || nj < 0 || nj >= mesh_.ny) continue;
        if (!fluid_[mesh_.idx(ni, nj)]) continue;
        const Vec2 cand = mesh_.center(ni, nj);
        const double d = distance(a, cand);
        if (d < best) {
          best = d;
          q = cand;
        }
      }
      // Clamp guards extreme extrapolation ratios at stair corners.
      const double pq = std::max(distance(mr.boundary, q), 0.25 * mesh_.dx);
      aq = distance(a, q);
      ratio = std::clamp(aq / pq, 1.0, 4.0);
    }
    const auto& seg = g_.segments()[mr.segment];
    const Vec2 bc = seg.bc.value(mr.boundary);
    gi.dirichlet = seg.bc.kind == geom::BcKind::Dirichlet;
    gi.ubc = bc.x;
    gi.vbc = bc.y;
    if (seg.pressure_value) {
      gi.has_pbc = true;
      gi.pbc = (*seg.pressure_value)(mr.boundary);
    }
    gi.ratio = ratio;
    gi.aq = aq;
    mirror_weights(q, gi.nodes, gi.weights);
    return gi;
  }

  /// Masked regularized-kernel weights at the mirror point (h = dx).
  void mirror_weights(Vec2 q, std::vector<int>& nodes, std::vector<double>& weights) {
    const double h = mesh_.dx;
    const int i0 = std::max(0, static_cast<int>(std::floor((q.x - mesh_.origin.x) / h - 0.5 - 2)));
    const int j0 = std::max(0, static_cast<int>(std::floor((q.y - mesh_.origin.y) / h - 0.5 - 2)));
    const int i1 = std::min(mesh_.nx - 1, i0 + 5);
    const int j1 = std::min(mesh_.ny - 1, j0 + 5);
    double wsum = 0;
    for (int j = j0; j <= j1; ++j) {
      for (int i = i0; i <= i1; ++i) {
        const int c = mesh_.idx(i, j);
        if (!fluid_[c]) continue;
        const Vec2 pos = mesh_.center(i, j);
        const double w = interp::kernel_phi((pos.x - q.x) / h, opts_.kernel) *
                         interp::kernel_phi((pos.y - q.y) / h, opts_.kernel);
        if (w <= 0) continue;
        nodes.push_back(c);
        weights.push_back(w);
        wsum += w;
      }
    }
    if (!(wsum > 0)) {
      throw SolverDivergenceError("projection_solve: mirror point without fluid support");
    }
    for (double& w : weights) w /= wsum;
  }

  void apply_ghosts(std::vector<double>& u, std::vector<double>& v,
                    std::vector<double>* p) {
    for (const GhostInfo& gi : ghosts_) {
      double umi = 0, vmi = 0, pmi = 0;
      for (std::size_t k = 0; k < gi.nodes.size(); ++k) {
        umi += gi.weights[k] * u[gi.nodes[k]];
        vmi += gi.weights[k] * v[gi.nodes[k]];
        if (p) pmi += gi.weights[k] * (*p)[gi.nodes[k]];
      }
      if (gi.dirichlet) {
        u[gi.cell] = umi * (1.0 - gi.ratio) + gi.ratio * gi.ubc;
        v[gi.cell] = vmi * (1.0 - gi.ratio) + gi.ratio * gi.vbc;
      } else {
        u[gi.cell] = umi + gi.aq * gi.ubc;
        v[gi.cell] = vmi + gi.aq * gi.vbc;
      }
      if (p) {
        (*p)[gi.cell] = gi.has_pbc ? pmi * (1.0 - gi.ratio) + gi.ratio * gi.pbc : pmi;
      }
    }
  }

  void predictor(std::vector<double>& us, std::vector<double>& vs, double dt,
                 double re) const {
    const double i2 = 1.0 / (2.0 * mesh_.dx);
    const double id2 = 1.0 / (mesh_.dx * mesh_.dx);
    const double inv_re = 1.0 / re;
    const int sx = 1, sy = mesh_.stride;
    for (int j = 0; j < mesh_.ny; ++j) {
      for (int i = 0; i < mesh_.nx; ++i) {
        const int c = mesh_.idx(i, j);
        if (!fluid_[c]) continue;
        const double uc = u_[c], vc = v_[c];
        const double ux = (u_[c + sx] - u_[c - sx]) * i2;
        const double uy = (u_[c + sy] - u_[c - sy]) * i2;
        const double vx = (v_[c + sx] - v_[c - sx]) * i2;
        const double vy = (v_[c + sy] - v_[c - sy]) * i2;
        const double px = (p_[c + sx] - p_[c - sx]) * i2;
        const double py = (p_[c + sy] - p_[c - sy]) * i2;
        const double lu = (u_[c + sx] + u_[c - sx] + u_[c + sy] + u_[c - sy] - 4 * uc) * id2;
        const double lv = (v_[c + sx] + v_[c - sx] + v_[c + sy] + v_[c - sy] - 4 * vc) * id2;
        us[c] = uc + dt * (-(uc * ux + vc * uy) + inv_re * lu - px);
        vs[c] = vc + dt * (-(uc * vx + vc * vy) + inv_re * lv - py);
      }
    }
  }

  /// Distributes the net boundary flux uniformly over boundary faces so the
  /// Poisson right-hand side is discretely compatible.
  void balance_boundary_flux(std::vector<double>& us, std::vector<double>& vs) {
    flux_corr_ = 0;
    double flux = 0;
    int n_faces = 0;
    const int sx = 1, sy = mesh_.stride;
    for (int j = 0; j < mesh_.ny; ++j) {
      for (int i = 0; i < mesh_.nx; ++i) {
        const int c = mesh_.idx(i, j);
        if (!fluid_[c]) continue;
        if (!fluid_[c + sx]) { flux += 0.5 * (us[c] + us[c + sx]); ++n_faces; }
        if (!fluid_[c - sx]) { flux -= 0.5 * (us[c] + us[c - sx]); ++n_faces; }
        if (!fluid_[c + sy]) { flux += 0.5 * (vs[c] + vs[c + sy]); ++n_faces; }
        if (!fluid_[c - sy]) { flux -= 0.5 * (vs[c] + vs[c - sy]); ++n_faces; }
      }
    }
    if (n_faces > 0) flux_corr_ = flux / n_faces;
  }

  void poisson_rhs(const std::vector<double>& us, const std::vector<double>& vs,
                   double dt, std::vector<double>& rhs) const {
    const int sx = 1, sy = mesh_.stride;
    const double f = 1.0 / (mesh_.dx * dt);
    if (all_fluid_) {
      rhs.assign(static_cast<std::size_t>(mesh_.nx) * mesh_.ny, 0.0);
    } else {
      rhs.assign(ldlt_->cell_of_fluid.size(), 0.0);
    }
    std::size_t r = 0;
    for (int j = 0; j < mesh_.ny; ++j) {
      for (int i = 0; i < mesh_.nx; ++i) {
        const int c = mesh_.idx(i, j);
        if (!fluid_[c]) continue;
        // Boundary faces get the outward flux correction: subtract along the
        // positive-normal faces, add along the negative-normal ones.
        const auto face = [&](int nb, double half_sum, double outward) {
          return fluid_[nb] ? half_sum : half_sum - outward * flux_corr_;
        };
        const double ue = face(c + sx, 0.5 * (us[c] + us[c + sx]), +1.0);
        const double uw = face(c - sx, 0.5 * (us[c] + us[c - sx]), -1.0);
        const double vn = face(c + sy, 0.5 * (vs[c] + vs[c + sy]), +1.0);
        const double vso = face(c - sy, 0.5 * (vs[c] + vs[c - sy]), -1.0);
        const double div = (ue - uw + vn - vso) * f;
        if (all_fluid_) {
          rhs[static_cast<std::size_t>(j) * mesh_.nx + i] = div;
        } else {
          rhs[r++] = div;
        }
      }
    }
    if (!all_fluid_) {
      // Exact mean removal guards the gauge penalty row.
      double mean = 0;
      for (double x : rhs) mean += x;
      mean /= rhs.size();
      for (double& x : rhs) x -= mean;
    }
  }

  void solve_poisson(const std::vector<double>& rhs, std::vector<double>& delta) {
    if (all_fluid_) {
      fft_->solve(rhs, delta);
    } else {
      ldlt_->solve(rhs, delta);
    }
  }

  double delta_at(const std::vector<double>& delta, int i, int j) const {
    if (i < 0 || i >= mesh_.nx || j < 0 || j >= mesh_.ny) return std::nan("");
    if (all_fluid_) return delta[static_cast<std::size_t>(j) * mesh_.nx + i];
    const int f = ldlt_->fluid_of_cell[mesh_.idx(i, j)];
    return f >= 0 ? delta[f] : std::nan("");
  }

  double correct(const std::vector<double>& us, const std::vector<double>& vs,
                 const std::vector<double>& delta, double dt) {
    const double i2 = dt / (2.0 * mesh_.dx);
    double max_change = 0;
    for (int j = 0; j < mesh_.ny; ++j) {
      for (int i = 0; i < mesh_.nx; ++i) {
        const int c = mesh_.idx(i, j);
        if (!fluid_[c]) continue;
        const double dc = delta_at(delta, i, j);
        // Zero-gradient reflection for the correction potential at masked
        // neighbors (sign-flipped where the segment pins the pressure).
        const auto nbval = [&](int ni, int nj) {
          const double dn = delta_at(delta, ni, nj);
          return std::isnan(dn) ? dc : dn;
        };
        const double gx = (nbval(i + 1, j) - nbval(i - 1, j)) * i2;
        const double gy = (nbval(i, j + 1) - nbval(i, j - 1)) * i2;
        const double un = us[c] - gx;
        const double vn = vs[c] - gy;
        max_change = std::max(max_change,
                              std::max(std::abs(un - u_[c]), std::abs(vn - v_[c])));
        u_[c] = un;
        v_[c] = vn;
        p_[c] += dc;
      }
    }
    return max_change;
  }

  void warm_start(const interp::GriddedField& init) {
    for (int j = 0; j < mesh_.ny; ++j) {
      for (int i = 0; i < mesh_.nx; ++i) {
        const int c = mesh_.idx(i, j);
        if (!fluid_[c]) continue;
        const auto val = interp::interpolate(init, mesh_.center(i, j), init.grid.dx,
                                             opts_.kernel);
        u_[c] = val[0];
        v_[c] = val[1];
        p_[c] = val[2];
      }
    }
  }

  /// Max compact divergence of the face velocities after the pressure
  /// correction of the current step (boundary faces flux-balanced, interior
  /// faces corrected by the face-normal delta gradient).
  double corrected_face_divergence(const std::vector<double>& us,
                                   const std::vector<double>& vs,
                                   const std::vector<double>& delta, double dt) const {
    const int sx = 1, sy = mesh_.stride;
    const double fdt = dt / mesh_.dx;
    double dmax = 0;
    for (int j = 0; j < mesh_.ny; ++j) {
      for (int i = 0; i < mesh_.nx; ++i) {
        const int c = mesh_.idx(i, j);
        if (!fluid_[c]) continue;
        const double dc = delta_at(delta, i, j);
        const double ue = fluid_[c + sx]
                              ? 0.5 * (us[c] + us[c + sx]) - fdt * (delta_at(delta, i + 1, j) - dc)
                              : 0.5 * (us[c] + us[c + sx]) - flux_corr_;
        const double uw = fluid_[c - sx]
                              ? 0.5 * (us[c] + us[c - sx]) - fdt * (dc - delta_at(delta, i - 1, j))
                              : 0.5 * (us[c] + us[c - sx]) + flux_corr_;
        const double vn = fluid_[c + sy]
                              ? 0.5 * (vs[c] + vs[c + sy]) - fdt * (delta_at(delta, i, j + 1) - dc)
                              : 0.5 * (vs[c] + vs[c + sy]) - flux_corr_;
        const double vso = fluid_[c - sy]
                               ? 0.5 * (vs[c] + vs[c - sy]) - fdt * (dc - delta_at(delta, i, j - 1))
                               : 0.5 * (vs[c] + vs[c - sy]) + flux_corr_;
        dmax = std::max(dmax, std::abs((ue - uw + vn - vso) / mesh_.dx));
      }
    }
    return dmax;
  }

  ReferenceField finalize(int64_t steps, double residual, double divergence) {
    ReferenceField ref;
    ref.provenance = Provenance::Solver;
    ref.re = physics_.re;
    ref.steady_residual = residual;
    ref.iterations = steps;
    ref.field.grid = {mesh_.origin, mesh_.dx, mesh_.nx, mesh_.ny};
    ref.field.arrangement = Arrangement::CellCentered;
    ref.field.allocate();

    // Zero-mean pressure gauge over the fluid.
    double pmean = 0;
    int n = 0;
    for (int j = 0; j < mesh_.ny; ++j) {
      for (int i = 0; i < mesh_.nx; ++i) {
        const int c = mesh_.idx(i, j);
        if (fluid_[c]) {
          pmean += p_[c];
          ++n;
        }
      }
    }
    pmean /= n;

    for (int j = 0; j < mesh_.ny; ++j) {
      for (int i = 0; i < mesh_.nx; ++i) {
        const int c = mesh_.idx(i, j);
        const int f = ref.field.index(i, j);
        if (!fluid_[c]) {
          ref.field.mask[f] = 0;
          continue;
        }
        ref.field.u[f] = u_[c];
        ref.field.v[f] = v_[c];
        ref.field.p[f] = p_[c] - pmean;
      }
    }
    ref.max_divergence = divergence;
    return ref;
  }

  const geom::LevelSetGeometry& g_;
  loss::PhysicsConfig physics_;
  SolverOptions opts_;
  Mesh mesh_;
  std::vector<uint8_t> fluid_;
  bool all_fluid_ = false;
  std::vector<GhostInfo> ghosts_;
  std::unique_ptr<PoissonFFT> fft_;
  std::unique_ptr<PoissonLDLT> ldlt_;
  std::vector<double> u_, v_, p_;
  double flux_corr_ = 0;
};

}  // namespace

ReferenceField projection_solve(const geom::LevelSetGeometry& g,
                                const sampling::GridSpec& grid,
                                const loss::PhysicsConfig& physics,
                                const SolverOptions& opts) {
  ProjectionSolver solver(g, grid, physics, opts);
  ReferenceField ref = solver.run();
  return ref;
}

}  // namespace pinnflow::oracle
