#include "pinnflow/loss.hpp"

#include <cmath>
#include <unordered_map>

#include "pinnflow/errors.hpp"
#include "pinnflow/parallel.hpp"

namespace pinnflow::loss {

using sampling::NeighborKind;

void PhysicsConfig::validate() const {
  if (!(re > 0)) throw InvalidArgumentError("PhysicsConfig: Re must be > 0");
  if (lambda_pde < 0 || lambda_bc < 0) {
    throw InvalidArgumentError("PhysicsConfig: loss weights must be >= 0");
  }
}

double bcxn_general(double u_bc, double u_mi, double aq, double pq) {
  if (!(pq > 0)) throw InvalidArgumentError("bcxn_general: PQ must be > 0");
  const double r = aq / pq;
  // Affine form: exact reduction to 2 u_BC - u_MI when the ratio is 2.
  return u_mi * (1.0 - r) + u_bc * r;
}

double bcxn_neumann(double g, double u_mi, double d) {
  if (!(d > 0)) throw InvalidArgumentError("bcxn_neumann: distance must be > 0");
  return u_mi + 2.0 * d * g;
}

void LossStats::merge(const LossStats& o) {
  cont_sq += o.cont_sq;
  xmom_sq += o.xmom_sq;
  ymom_sq += o.ymom_sq;
  bc_sq += o.bc_sq;
  n_stencils += o.n_stencils;
  n_bc += o.n_bc;
}

// ---- numeric stencil assembly ------------------------------------------

StencilValues assemble_stencil_values(const FieldFn& field,
                                      const sampling::StencilRecord& stencil,
                                      const sampling::SampleSet& samples,
                                      const LossOptions& opts) {
  StencilValues out;
  const Vec2 center = samples.interior[stencil.center];
  {
    const auto c = field(center);
    out.center = {c[0], c[1], c[2], Provenance::Network, Provenance::Network,
                  Provenance::Network};
  }
  for (int k = 0; k < 4; ++k) {
    const sampling::Neighbor& nb = stencil.nb[k];
    StencilValues::Entry& e = out.nb[k];
    switch (nb.kind) {
      case NeighborKind::Interior: {
        const auto f = field(nb.pos);
        e = {f[0], f[1], f[2], Provenance::Network, Provenance::Network,
             Provenance::Network};
        break;
      }
      case NeighborKind::BoundaryCoincident: {
        const auto f = field(nb.pos);
        if (nb.bc_kind == geom::BcKind::Dirichlet) {
          e.u = nb.bc_value.x;
          e.v = nb.bc_value.y;
          e.u_prov = e.v_prov = Provenance::Boundary;
        } else {
          e.u = f[0];
          e.v = f[1];
        }
        if (nb.pressure_bc) {
          e.p = *nb.pressure_bc;
          e.p_prov = Provenance::Boundary;
        } else {
          e.p = f[2];
        }
        break;
      }
      case NeighborKind::External: {
        if (opts.mode == LossMode::NdBaseline) {
          const auto f = field(nb.pos);
          e = {f[0], f[1], f[2], Provenance::Network, Provenance::Network,
               Provenance::Network};
          break;
        }
        const geom::MirrorRecord& mr = nb.mirror;
        const auto mi = field(mr.mirror);
        const double aq = distance(mr.external, mr.mirror);
        const double pq = distance(mr.boundary, mr.mirror);
        if (nb.bc_kind == geom::BcKind::Dirichlet) {
          if (mr.degenerate) {
            e.u = bcxn_general(nb.bc_value.x, mi[0], aq, pq);
            e.v = bcxn_general(nb.bc_value.y, mi[1], aq, pq);
          } else {
            e.u = bcxn_general(nb.bc_value.x, mi[0], 2.0, 1.0);
            e.v = bcxn_general(nb.bc_value.y, mi[1], 2.0, 1.0);
          }
        } else {
          e.u = mi[0] + aq * nb.bc_value.x;
          e.v = mi[1] + aq * nb.bc_value.y;
        }
        e.u_prov = e.v_prov = Provenance::BcxnSubstituted;
        if (nb.pressure_bc) {
          e.p = mr.degenerate ? bcxn_general(*nb.pressure_bc, mi[2], aq, pq)
                              : bcxn_general(*nb.pressure_bc, mi[2], 2.0, 1.0);
          e.p_prov = Provenance::BcxnSubstituted;
        } else if (opts.pressure_external == PressureExternal::Mirror) {
          e.p = mi[2];
          e.p_prov = Provenance::BcxnSubstituted;
        } else {
          e.p = field(nb.pos)[2];
        }
        break;
      }
    }
  }
  return out;
}

std::array<double, 3> nd_residual(const StencilValues& s, double dx, double re) {
  const auto& C = s.center;
  const auto& E = s.nb[0];
  const auto& W = s.nb[1];
  const auto& N = s.nb[2];
  const auto& S = s.nb[3];
  const double i2 = 1.0 / (2.0 * dx);
  const double id2 = 1.0 / (dx * dx);

  const double ux = (E.u - W.u) * i2, uy = (N.u - S.u) * i2;
  const double vx = (E.v - W.v) * i2, vy = (N.v - S.v) * i2;
  const double px = (E.p - W.p) * i2, py = (N.p - S.p) * i2;
  const double lap_u = (E.u + W.u + N.u + S.u - 4.0 * C.u) * id2;
  const double lap_v = (E.v + W.v + N.v + S.v - 4.0 * C.v) * id2;

  const double r_cont = ux + vy;
  const double r_xmom = C.u * ux + C.v * uy - lap_u / re + px;
  const double r_ymom = C.u * vx + C.v * vy - lap_v / re + py;
  return {r_cont, r_xmom, r_ymom};
}

// ---- assembler -----------------------------------------------------------

namespace {

int64_t lattice_key(int li, int lj) {
  return (static_cast<int64_t>(li) << 32) ^ static_cast<uint32_t>(lj);
}

}  // namespace

Assembler::Assembler(const sampling::SampleSet& samples, PhysicsConfig physics,
                     LossOptions opts)
    : samples_(samples), physics_(physics), opts_(opts) {
  physics_.validate();
  if (samples_.stencils.size() != samples_.interior.size()) {
    throw ConfigError("Assembler: stencils not classified");
  }

  std::unordered_map<int64_t, int> lattice_pt;
  std::unordered_map<int64_t, int> mirror_pt;
  lattice_pt.reserve(samples_.interior.size() * 2);

  const auto add_lattice = [&](int li, int lj, Vec2 pos) {
    auto [it, inserted] = lattice_pt.try_emplace(lattice_key(li, lj), -1);
    if (inserted) {
      it->second = static_cast<int>(points_.size());
      points_.push_back(pos);
    }
    return it->second;
  };
  const auto add_mirror = [&](int li, int lj, Vec2 pos) {
    auto [it, inserted] = mirror_pt.try_emplace(lattice_key(li, lj), -1);
    if (inserted) {
      it->second = static_cast<int>(points_.size());
      points_.push_back(pos);
    }
    return it->second;
  };

  plans_.reserve(samples_.stencils.size());
  for (const auto& st : samples_.stencils) {
    StencilPlan plan;
    const auto [ci, cj] = samples_.interior_idx[st.center];
    plan.center_point = add_lattice(ci, cj, samples_.interior[st.center]);
    for (int k = 0; k < 4; ++k) {
      const sampling::Neighbor& nb = st.nb[k];
      NbPlan& np = plan.nb[k];
      np.kind = nb.kind;
      np.bc_kind = nb.bc_kind;
      np.ubc = nb.bc_value.x;
      np.vbc = nb.bc_value.y;
      np.has_pbc = nb.pressure_bc.has_value();
      np.pbc = nb.pressure_bc.value_or(0.0);
      switch (nb.kind) {
        case NeighborKind::Interior:
        case NeighborKind::BoundaryCoincident:
          np.point = add_lattice(nb.li, nb.lj, nb.pos);
          break;
        case NeighborKind::External:
          if (opts_.mode == LossMode::NdBaseline) {
            np.point = add_lattice(nb.li, nb.lj, nb.pos);
          } else {
            const geom::MirrorRecord& mr = nb.mirror;
            if (mr.degenerate) {
              np.point = add_lattice(ci, cj, samples_.interior[st.center]);
              const double pq = distance(mr.boundary, mr.mirror);
              np.aq = distance(mr.external, mr.mirror);
              if (!(pq > 0)) throw ConfigError("Assembler: degenerate mirror with PQ = 0");
              np.ratio = np.aq / pq;
            } else {
              np.point = add_mirror(nb.li, nb.lj, mr.mirror);
              np.ratio = 2.0;
              np.aq = 2.0 * mr.ap;
            }
            if (opts_.pressure_external == PressureExternal::Network && !np.has_pbc) {
              np.raw_point = add_lattice(nb.li, nb.lj, nb.pos);
            }
          }
          break;
      }
    }
    plans_.push_back(plan);
  }

  for (const auto& b : samples_.boundary) {
    if (b.kind != geom::BcKind::Dirichlet) continue;
    const int pt = static_cast<int>(points_.size());
    points_.push_back(b.pos);
    bc_points_.emplace_back(pt, b.bc_velocity);
  }
  n_bc_dirichlet_ = static_cast<int>(bc_points_.size());
}

net::RecordedLoss Assembler::build_chunk(const net::MlpSpec& spec,
                                         const net::ParamVector& params,
                                         std::span<const int> batch, double pde_scale,
                                         bool include_bc, double bc_scale,
                                         LossStats& stats) const {
  net::RecordedLoss rec;
  Tape& tape = rec.tape;
  tape.reserve(72 * batch.size() + (include_bc ? 8 * bc_points_.size() : 0) + 16);

  // Columns for the points this chunk touches, assigned in a fixed order.
  std::vector<int32_t> col(points_.size(), -1);
  std::vector<int> order;
  order.reserve(5 * batch.size() + (include_bc ? bc_points_.size() : 0));
  const auto touch = [&](int pt) {
    if (col[pt] < 0) {
      col[pt] = static_cast<int32_t>(order.size());
      order.push_back(pt);
    }
    return col[pt];
  };
  for (int idx : batch) {
    const StencilPlan& plan = plans_[idx];
    touch(plan.center_point);
    for (const NbPlan& np : plan.nb) {
      touch(np.point);
      if (np.raw_point >= 0) touch(np.raw_point);
    }
  }
  if (include_bc) {
    for (const auto& [pt, val] : bc_points_) touch(pt);
  }

  Eigen::MatrixXd pts(2, static_cast<Eigen::Index>(order.size()));
  for (std::size_t c = 0; c < order.size(); ++c) {
    pts(0, c) = points_[order[c]].x;
    pts(1, c) = points_[order[c]].y;
  }
  const int ev = order.empty() ? -1 : rec.add_eval(net::forward_batch(spec, params, pts));

  const double dx = samples_.grid.dx;
  const double i2 = 1.0 / (2.0 * dx);
  const double id2 = 1.0 / (dx * dx);
  const double inv_re = 1.0 / physics_.re;

  struct Triple {
    Tape::Var u, v, p;
  };
  const auto net_triple = [&](int pt) -> Triple {
    const int32_t c = col[pt];
    return {rec.output(ev, c, 0), rec.output(ev, c, 1), rec.output(ev, c, 2)};
  };

  Tape::Var pde_sum;
  for (int idx : batch) {
    const StencilPlan& plan = plans_[idx];
    const Triple C = net_triple(plan.center_point);
    Triple nb[4];
    for (int k = 0; k < 4; ++k) {
      const NbPlan& np = plan.nb[k];
      switch (np.kind) {
        case NeighborKind::Interior:
          nb[k] = net_triple(np.point);
          break;
        case NeighborKind::BoundaryCoincident: {
          const Triple at = net_triple(np.point);
          if (np.bc_kind == geom::BcKind::Dirichlet) {
            nb[k].u = tape.constant(np.ubc);
            nb[k].v = tape.constant(np.vbc);
          } else {
            nb[k].u = at.u;
            nb[k].v = at.v;
          }
          nb[k].p = np.has_pbc ? tape.constant(np.pbc) : at.p;
          break;
        }
        case NeighborKind::External: {
          if (opts_.mode == LossMode::NdBaseline) {
            nb[k] = net_triple(np.point);
            break;
          }
          const Triple mi = net_triple(np.point);
          if (np.bc_kind == geom::BcKind::Dirichlet) {
            // u_ES = u_MI (1 - r) + r u_BC; exact 2 u_BC - u_MI when r = 2.
            nb[k].u = tape.add_const(tape.scale(mi.u, 1.0 - np.ratio), np.ratio * np.ubc);
            nb[k].v = tape.add_const(tape.scale(mi.v, 1.0 - np.ratio), np.ratio * np.vbc);
          } else {
            nb[k].u = tape.add_const(mi.u, np.aq * np.ubc);
            nb[k].v = tape.add_const(mi.v, np.aq * np.vbc);
          }
          if (np.has_pbc) {
            nb[k].p = tape.add_const(tape.scale(mi.p, 1.0 - np.ratio), np.ratio * np.pbc);
          } else if (opts_.pressure_external == PressureExternal::Mirror) {
            nb[k].p = mi.p;
          } else {
            nb[k].p = rec.output(ev, col[np.raw_point], 2);
          }
          break;
        }
      }
    }
    const Triple &E = nb[0], &W = nb[1], &N = nb[2], &S = nb[3];
    const Tape::Var ux = tape.scale(tape.sub(E.u, W.u), i2);
    const Tape::Var uy = tape.scale(tape.sub(N.u, S.u), i2);
    const Tape::Var vx = tape.scale(tape.sub(E.v, W.v), i2);
    const Tape::Var vy = tape.scale(tape.sub(N.v, S.v), i2);
    const Tape::Var px = tape.scale(tape.sub(E.p, W.p), i2);
    const Tape::Var py = tape.scale(tape.sub(N.p, S.p), i2);
    const Tape::Var lap_u = tape.scale(
        tape.sub(tape.add(tape.add(E.u, W.u), tape.add(N.u, S.u)), tape.scale(C.u, 4.0)),
        id2);
    const Tape::Var lap_v = tape.scale(
        tape.sub(tape.add(tape.add(E.v, W.v), tape.add(N.v, S.v)), tape.scale(C.v, 4.0)),
        id2);

    const Tape::Var r_cont = tape.add(ux, vy);
    const Tape::Var r_xmom = tape.add(
        tape.sub(tape.add(tape.mul(C.u, ux), tape.mul(C.v, uy)), tape.scale(lap_u, inv_re)),
        px);
    const Tape::Var r_ymom = tape.add(
        tape.sub(tape.add(tape.mul(C.u, vx), tape.mul(C.v, vy)), tape.scale(lap_v, inv_re)),
        py);

    const Tape::Var c2 = tape.square(r_cont);
    const Tape::Var x2 = tape.square(r_xmom);
    const Tape::Var y2 = tape.square(r_ymom);
    stats.cont_sq += tape.value(c2);
    stats.xmom_sq += tape.value(x2);
    stats.ymom_sq += tape.value(y2);
    stats.n_stencils += 1;

    const Tape::Var term = tape.add(tape.add(c2, x2), y2);
    pde_sum = pde_sum.valid() ? tape.add(pde_sum, term) : term;
  }

  Tape::Var root;
  if (pde_sum.valid()) root = tape.scale(pde_sum, pde_scale);

  if (include_bc) {
    Tape::Var bc_sum;
    for (const auto& [pt, val] : bc_points_) {
      const int32_t c = col[pt];
      const Tape::Var du = tape.add_const(rec.output(ev, c, 0), -val.x);
      const Tape::Var dv = tape.add_const(rec.output(ev, c, 1), -val.y);
      const Tape::Var term = tape.add(tape.square(du), tape.square(dv));
      stats.bc_sq += tape.value(term);
      stats.n_bc += 1;
      bc_sum = bc_sum.valid() ? tape.add(bc_sum, term) : term;
    }
    if (bc_sum.valid()) {
      const Tape::Var scaled = tape.scale(bc_sum, bc_scale);
      root = root.valid() ? tape.add(root, scaled) : scaled;
    }
  }
  rec.root = root;
  return rec;
}

// ---- batch loss / gradient ----------------------------------------------

namespace {

LossReport report_from_stats(const Assembler& assembler, const LossStats& stats, int m) {
  const auto& cfg = assembler.physics();
  LossReport rep;
  rep.batch = m;
  rep.r_cont = stats.cont_sq / m;
  rep.r_xmom = stats.xmom_sq / m;
  rep.r_ymom = stats.ymom_sq / m;
  rep.pde = (stats.cont_sq + stats.xmom_sq + stats.ymom_sq) / m;
  rep.bc = stats.n_bc > 0 ? stats.bc_sq / stats.n_bc : 0.0;
  rep.total = cfg.lambda_pde * rep.pde + cfg.lambda_bc * rep.bc;
  return rep;
}

}  // namespace

LossReport pde_loss(const Assembler& assembler, const net::MlpSpec& spec,
                    const net::ParamVector& params, std::span<const int> batch) {
  if (batch.empty()) throw InvalidArgumentError("pde_loss: empty batch");
  const auto& cfg = assembler.physics();
  const int m = static_cast<int>(batch.size());
  const bool include_bc = assembler.options().mode == LossMode::NdBaseline &&
                          assembler.n_boundary_dirichlet() > 0;
  LossStats stats;
  assembler.build_chunk(spec, params, batch, cfg.lambda_pde / m, include_bc,
                        include_bc ? cfg.lambda_bc / assembler.n_boundary_dirichlet() : 0.0,
                        stats);
  return report_from_stats(assembler, stats, m);
}

LossReport pde_loss_gradient(const Assembler& assembler, const net::MlpSpec& spec,
                             const net::ParamVector& params, std::span<const int> batch,
                             net::ParamVector& grad, int workers, int chunk_size) {
  if (batch.empty()) throw InvalidArgumentError("pde_loss_gradient: empty batch");
  if (chunk_size < 1) throw InvalidArgumentError("pde_loss_gradient: chunk_size < 1");
  const auto& cfg = assembler.physics();
  const int m = static_cast<int>(batch.size());
  const bool include_bc = assembler.options().mode == LossMode::NdBaseline &&
                          assembler.n_boundary_dirichlet() > 0;
  const double pde_scale = cfg.lambda_pde / m;
  const double bc_scale =
      include_bc ? cfg.lambda_bc / assembler.n_boundary_dirichlet() : 0.0;

  const int n_pde_chunks = (m + chunk_size - 1) / chunk_size;
  const int n_chunks = n_pde_chunks + (include_bc ? 1 : 0);

  std::vector<net::ParamVector> grads(n_chunks);
  std::vector<LossStats> stats(n_chunks);

  parallel_run(
      n_chunks,
      [&](int c) {
        grads[c].data.assign(params.data.size(), 0.0);
        std::span<const int> part;
        const bool bc = c >= n_pde_chunks;  // the BC term gets its own chunk
        if (!bc) {
          const int b0 = c * chunk_size;
          const int b1 = std::min<int>(m, b0 + chunk_size);
          part = batch.subspan(b0, b1 - b0);
        }
        const net::RecordedLoss rec = assembler.build_chunk(
            spec, params, part, pde_scale, bc, bc_scale, stats[c]);
        if (rec.root.valid()) {
          net::loss_gradient_accumulate(spec, params, rec, grads[c]);
        }
      },
      workers);

  // Deterministic reduction in chunk order.
  grad.data.assign(params.data.size(), 0.0);
  Eigen::Map<Eigen::VectorXd> g(grad.data.data(), grad.data.size());
  LossStats all;
  for (int c = 0; c < n_chunks; ++c) {
    g += Eigen::Map<const Eigen::VectorXd>(grads[c].data.data(), grads[c].data.size());
    all.merge(stats[c]);
  }
  if (!grad.all_finite()) {
    throw NumericFaultError("pde_loss_gradient: non-finite gradient");
  }
  return report_from_stats(assembler, all, m);
}

}  // namespace pinnflow::loss
