#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "pinnflow/net.hpp"
#include "pinnflow/sampling.hpp"

namespace pinnflow::loss {

struct PhysicsConfig {
  double re = 100.0;
  double lambda_pde = 1.0;
  double lambda_bc = 1.0;

  void validate() const;
};

enum class LossMode { Bcxn, NdBaseline };

/// Treatment of pressure at external stencil points: mirror reflection
/// (zero normal gradient) or the raw network value at the external
/// coordinate (ablation).
enum class PressureExternal { Mirror, Network };

struct LossOptions {
  LossMode mode = LossMode::Bcxn;
  PressureExternal pressure_external = PressureExternal::Mirror;
};

enum class Provenance : uint8_t { Network, Boundary, BcxnSubstituted };

/// Field values over one 5-point stencil with provenance tags.
struct StencilValues {
  struct Entry {
    double u = 0, v = 0, p = 0;
    Provenance u_prov = Provenance::Network;
    Provenance v_prov = Provenance::Network;
    Provenance p_prov = Provenance::Network;
  };
  Entry center;
  std::array<Entry, 4> nb;  // E, W, N, S
};

struct LossReport {
  double total = 0, pde = 0, bc = 0;
  double r_cont = 0, r_xmom = 0, r_ymom = 0;  // mean squared residual per equation
  int batch = 0;
  int64_t iteration = 0;
};

/// Linear mirror constraint (general ratio form, truncation dropped):
/// u_ES = u_MI + (u_BC - u_MI) * AQ / PQ. Requires PQ > 0 and AQ >= PQ.
double bcxn_general(double u_bc, double u_mi, double aq, double pq);

/// First-order Neumann variant with AP = PQ = d: u_ES = u_MI + 2 d g.
double bcxn_neumann(double g, double u_mi, double d);

using FieldFn = std::function<std::array<double, 3>(Vec2)>;

/// Numeric stencil assembly (diagnostics/export path). In bcxn mode
/// external velocities come from the mirror constraint with u_MI evaluated
/// at the mirror point; in nd-baseline mode external neighbors are raw
/// field evaluations at the out-of-domain coordinates.
StencilValues assemble_stencil_values(const FieldFn& field,
                                      const sampling::StencilRecord& stencil,
                                      const sampling::SampleSet& samples,
                                      const LossOptions& opts);

/// Second-order central differences on the uniform 5-point stencil:
/// (continuity, x-momentum, y-momentum) residuals.
std::array<double, 3> nd_residual(const StencilValues& vals, double dx, double re);

/// Numeric sums used to build LossReports across chunks.
struct LossStats {
  double cont_sq = 0, xmom_sq = 0, ymom_sq = 0;
  double bc_sq = 0;
  int n_stencils = 0;
  int n_bc = 0;

  void merge(const LossStats& o);
};

/// Precomputes the evaluation-point table (deduplicated across stencils)
/// and per-stencil substitution plans for one (SampleSet, mode) pair;
/// builds recorded losses chunk by chunk. Immutable once constructed and
/// safe to use from concurrent workers.
class Assembler {
 public:
  Assembler(const sampling::SampleSet& samples, PhysicsConfig physics, LossOptions opts);

  /// Recorded loss over a subset of batch stencil indices. The chunk root is
  /// pde_scale * sum(stencil residual-square sums) [+ bc_scale * bc sum when
  /// include_bc]; chunk gradients therefore add up to the full batch
  /// gradient. Stats are accumulated numerically.
  net::RecordedLoss build_chunk(const net::MlpSpec& spec, const net::ParamVector& params,
                                std::span<const int> batch, double pde_scale,
                                bool include_bc, double bc_scale, LossStats& stats) const;

  int n_boundary_dirichlet() const { return n_bc_dirichlet_; }
  std::size_t point_table_size() const { return points_.size(); }
  const sampling::SampleSet& samples() const { return samples_; }
  const PhysicsConfig& physics() const { return physics_; }
  const LossOptions& options() const { return opts_; }

 private:
  struct NbPlan {
    sampling::NeighborKind kind;
    geom::BcKind bc_kind;
    int point = -1;      // value-eval point (lattice / mirror)
    int raw_point = -1;  // external lattice point (nd mode & pressure ablation)
    double ubc = 0, vbc = 0;
    bool has_pbc = false;
    double pbc = 0;
    double ratio = 2.0;  // AQ/PQ for the mirror constraint
    double aq = 0;       // |A - Q| (Neumann constraint length)
  };
  struct StencilPlan {
    int center_point = -1;
    std::array<NbPlan, 4> nb;
  };

  const sampling::SampleSet& samples_;
  PhysicsConfig physics_;
  LossOptions opts_;
  std::vector<Vec2> points_;
  std::vector<StencilPlan> plans_;
  std::vector<std::pair<int, Vec2>> bc_points_;  // (point index, dirichlet velocity) pairs
  int n_bc_dirichlet_ = 0;
};

/// Mean-over-batch PINN loss. In bcxn mode the BC term is zero and
/// total = lambda_pde * pde; nd-baseline adds lambda_bc * (mean squared
/// boundary velocity deviation). Throws InvalidArgumentError on empty batch.
LossReport pde_loss(const Assembler& assembler, const net::MlpSpec& spec,
                    const net::ParamVector& params, std::span<const int> batch);

/// Same report plus the exact parameter gradient of the total.
LossReport pde_loss_gradient(const Assembler& assembler, const net::MlpSpec& spec,
                             const net::ParamVector& params, std::span<const int> batch,
                             net::ParamVector& grad, int workers = 1,
                             int chunk_size = 256);

}  // namespace pinnflow::loss
