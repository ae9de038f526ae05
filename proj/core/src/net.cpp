#include "pinnflow/net.hpp"

#include <cmath>

#include "pinnflow/errors.hpp"
#include "pinnflow/rng.hpp"

namespace pinnflow::net {

namespace {

using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstWMap = Eigen::Map<const RowMajorMatrix>;
using WMap = Eigen::Map<RowMajorMatrix>;
using ConstBMap = Eigen::Map<const Eigen::VectorXd>;
using BMap = Eigen::Map<Eigen::VectorXd>;

}  // namespace

void MlpSpec::validate() const {
  if (trunk.empty()) throw InvalidArgumentError("MlpSpec: empty trunk");
  for (int w : trunk) {
    if (w < 1) throw InvalidArgumentError("MlpSpec: trunk width must be >= 1");
  }
  for (const auto& b : branches) {
    if (b.empty()) throw InvalidArgumentError("MlpSpec: empty branch");
    for (int w : b) {
      if (w < 1) throw InvalidArgumentError("MlpSpec: branch width must be >= 1");
    }
  }
}

MlpSpec MlpSpec::make(std::vector<int> trunk, std::vector<int> branch) {
  MlpSpec s;
  s.trunk = std::move(trunk);
  s.branches = {branch, branch, branch};
  return s;
}

nlohmann::json MlpSpec::to_json() const {
  return {{"trunk", trunk},
          {"branch_u", branches[0]},
          {"branch_v", branches[1]},
          {"branch_p", branches[2]}};
}

MlpSpec MlpSpec::from_json(const nlohmann::json& j) {
  MlpSpec s;
  s.trunk = j.at("trunk").get<std::vector<int>>();
  s.branches[0] = j.at("branch_u").get<std::vector<int>>();
  s.branches[1] = j.at("branch_v").get<std::vector<int>>();
  s.branches[2] = j.at("branch_p").get<std::vector<int>>();
  s.validate();
  return s;
}

LayerMap layer_map(const MlpSpec& spec) {
  spec.validate();
  LayerMap m;
  int64_t off = 0;
  const auto add = [&off](std::vector<LayerShape>& list, int in, int out) {
    LayerShape s;
    s.in = in;
    s.out = out;
    s.w_off = off;
    off += static_cast<int64_t>(in) * out;
    s.b_off = off;
    off += out;
    list.push_back(s);
  };
  int in = MlpSpec::kInput;
  for (int w : spec.trunk) {
    add(m.trunk, in, w);
    in = w;
  }
  const int trunk_out = spec.trunk.back();
  for (int b = 0; b < 3; ++b) {
    in = trunk_out;
    for (int w : spec.branches[b]) {
      add(m.branch[b], in, w);
      in = w;
    }
    std::vector<LayerShape> head;
    add(head, in, 1);
    m.head[b] = head.front();
  }
  m.total = off;
  return m;
}

int64_t MlpSpec::param_count() const { return layer_map(*this).total; }

bool ParamVector::all_finite() const {
  for (double v : data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

ParamVector init_params(const MlpSpec& spec, uint64_t seed) {
  const LayerMap map = layer_map(spec);
  ParamVector p;
  p.data.assign(static_cast<std::size_t>(map.total), 0.0);
  Rng rng(seed);

  bool first_layer = true;
  const auto fill = [&](const LayerShape& s) {
    if (first_layer) {
      for (int64_t k = 0; k < static_cast<int64_t>(s.in) * s.out; ++k) {
        p.data[s.w_off + k] = rng.normal();
      }
      first_layer = false;
    } else {
      const double bound = std::sqrt(6.0 / s.in);
      for (int64_t k = 0; k < static_cast<int64_t>(s.in) * s.out; ++k) {
        p.data[s.w_off + k] = rng.uniform(-bound, bound);
      }
    }
    // biases stay zero
  };
  for (const auto& s : map.trunk) fill(s);
  for (int b = 0; b < 3; ++b) {
    for (const auto& s : map.branch[b]) fill(s);
    fill(map.head[b]);
  }
  return p;
}

namespace {

void check_layer_finite(const ParamVector& params, const LayerShape& s, int layer_index) {
  ConstWMap W(params.data.data() + s.w_off, s.out, s.in);
  ConstBMap b(params.data.data() + s.b_off, s.out);
  if (!W.allFinite() || !b.allFinite()) {
    throw NumericFaultError("non-finite parameter in layer " + std::to_string(layer_index),
                            layer_index);
  }
}

/// pre = act * W^T + b over B-major activations. Each output element
/// accumulates the in-dimension in ascending order via column axpys, so the
/// result per point is independent of the batch size.
Eigen::MatrixXd apply_layer(const ParamVector& params, const LayerShape& s,
                            const Eigen::MatrixXd& act) {
  ConstWMap W(params.data.data() + s.w_off, s.out, s.in);
  ConstBMap b(params.data.data() + s.b_off, s.out);
  Eigen::MatrixXd pre(act.rows(), s.out);
  for (int r = 0; r < s.out; ++r) {
    auto col = pre.col(r);
    col.setConstant(b(r));
    for (int k = 0; k < s.in; ++k) {
      col += W(r, k) * act.col(k);
    }
  }
  return pre;
}

}  // namespace

BatchEval forward_batch(const MlpSpec& spec, const ParamVector& params,
                        const Eigen::MatrixXd& pts) {
  const LayerMap map = layer_map(spec);
  if (static_cast<int64_t>(params.data.size()) != map.total) {
    throw InvalidArgumentError("forward_batch: parameter length mismatch");
  }
  if (pts.rows() != 2) throw InvalidArgumentError("forward_batch: points must be 2 x B");

  BatchEval ev;
  ev.points = pts;
  ev.points_t = pts.transpose();
  const Eigen::Index B = pts.cols();
  ev.out.resize(3, B);

  int layer_index = 0;
  const Eigen::MatrixXd* act = &ev.points_t;
  ev.trunk_pre.reserve(map.trunk.size());
  ev.trunk_act.reserve(map.trunk.size());
  for (const auto& s : map.trunk) {
    check_layer_finite(params, s, layer_index++);
    Eigen::MatrixXd pre = apply_layer(params, s, *act);
    ev.trunk_act.push_back(pre.array().sin().matrix());
    ev.trunk_pre.push_back(std::move(pre));
    act = &ev.trunk_act.back();
  }

  const Eigen::MatrixXd& trunk_act = ev.trunk_act.back();
  for (int br = 0; br < 3; ++br) {
    const Eigen::MatrixXd* a = &trunk_act;
    ev.branch_pre[br].reserve(map.branch[br].size());
    ev.branch_act[br].reserve(map.branch[br].size());
    for (const auto& s : map.branch[br]) {
      check_layer_finite(params, s, layer_index++);
      Eigen::MatrixXd pre = apply_layer(params, s, *a);
      ev.branch_act[br].push_back(pre.array().sin().matrix());
      ev.branch_pre[br].push_back(std::move(pre));
      a = &ev.branch_act[br].back();
    }
    const LayerShape& h = map.head[br];
    check_layer_finite(params, h, layer_index++);
    ev.out.row(br) = apply_layer(params, h, *a).col(0).transpose();
  }
  return ev;
}

std::array<double, 3> forward(const MlpSpec& spec, const ParamVector& params, Vec2 p) {
  Eigen::MatrixXd pts(2, 1);
  pts(0, 0) = p.x;
  pts(1, 0) = p.y;
  const BatchEval ev = forward_batch(spec, params, pts);
  return {ev.out(0, 0), ev.out(1, 0), ev.out(2, 0)};
}

void backward_batch(const MlpSpec& spec, const ParamVector& params, const BatchEval& eval,
                    const Eigen::Matrix<double, 3, Eigen::Dynamic>& out_adjoint,
                    ParamVector& grad) {
  const LayerMap map = layer_map(spec);
  if (static_cast<int64_t>(grad.data.size()) != map.total) {
    grad.data.assign(static_cast<std::size_t>(map.total), 0.0);
  }
  const Eigen::Index B = eval.points.cols();
  if (out_adjoint.cols() != B) {
    throw InvalidArgumentError("backward_batch: adjoint column count mismatch");
  }

  const Eigen::MatrixXd& trunk_act = eval.trunk_act.back();

  // All matrices below are B-major (B x width).
  const auto layer_backward = [&](const LayerShape& s, const Eigen::MatrixXd& ds,
                                  const Eigen::MatrixXd& a_prev, bool want_da) {
    WMap dWl(grad.data.data() + s.w_off, s.out, s.in);
    BMap dbl(grad.data.data() + s.b_off, s.out);
    for (int r = 0; r < s.out; ++r) {
      for (int k = 0; k < s.in; ++k) {
        dWl(r, k) += ds.col(r).dot(a_prev.col(k));
      }
      dbl(r) += ds.col(r).sum();
    }
    Eigen::MatrixXd da;
    if (want_da) {
      ConstWMap Wl(params.data.data() + s.w_off, s.out, s.in);
      da.setZero(ds.rows(), s.in);
      for (int k = 0; k < s.in; ++k) {
        auto col = da.col(k);
        for (int r = 0; r < s.out; ++r) {
          col += Wl(r, k) * ds.col(r);
        }
      }
    }
    return da;
  };

  Eigen::MatrixXd trunk_adj = Eigen::MatrixXd::Zero(B, trunk_act.cols());
  for (int br = 0; br < 3; ++br) {
    const auto& layers = map.branch[br];
    const auto& pres = eval.branch_pre[br];
    const auto& acts = eval.branch_act[br];
    const Eigen::MatrixXd& a_last = acts.empty() ? trunk_act : acts.back();

    // Head: out = W a + b (linear).
    const LayerShape& h = map.head[br];
    const Eigen::MatrixXd g_head = out_adjoint.row(br).transpose();  // B x 1
    Eigen::MatrixXd da = layer_backward(h, g_head, a_last, true);

    for (int l = static_cast<int>(layers.size()) - 1; l >= 0; --l) {
      const LayerShape& s = layers[l];
      const Eigen::MatrixXd ds = (da.array() * pres[l].array().cos()).matrix();
      const Eigen::MatrixXd& a_prev = l == 0 ? trunk_act : acts[l - 1];
      da = layer_backward(s, ds, a_prev, true);
    }
    trunk_adj += da;
  }

  Eigen::MatrixXd da = std::move(trunk_adj);
  for (int l = static_cast<int>(map.trunk.size()) - 1; l >= 0; --l) {
    const LayerShape& s = map.trunk[l];
    const Eigen::MatrixXd ds = (da.array() * eval.trunk_pre[l].array().cos()).matrix();
    const Eigen::MatrixXd& a_prev = l == 0 ? eval.points_t : eval.trunk_act[l - 1];
    da = layer_backward(s, ds, a_prev, l > 0);
  }
}

int RecordedLoss::add_eval(BatchEval eval) {
  const int idx = static_cast<int>(evals.size());
  const int32_t base = slot_base.empty()
                           ? 0
                           : slot_base.back() +
                                 3 * static_cast<int32_t>(evals.back().points.cols());
  slot_base.push_back(base);
  leaf_memo.emplace_back(3 * eval.points.cols(), -1);
  evals.push_back(std::move(eval));
  return idx;
}

Tape::Var RecordedLoss::output(int eval_idx, int col, int comp) {
  auto& memo = leaf_memo[eval_idx];
  const int32_t key = 3 * col + comp;
  if (memo[key] >= 0) return Tape::Var{memo[key]};
  const double value = evals[eval_idx].out(comp, col);
  const Tape::Var v = tape.leaf(value, slot_base[eval_idx] + key);
  memo[key] = v.id;
  return v;
}

void loss_gradient_accumulate(const MlpSpec& spec, const ParamVector& params,
                              const RecordedLoss& rec, ParamVector& grad) {
  if (!rec.root.valid()) throw InvalidArgumentError("loss_gradient: no recorded root");
  if (!std::isfinite(rec.tape.value(rec.root))) {
    throw NumericFaultError("loss_gradient: non-finite loss value");
  }
  std::vector<double> slot_adj;
  rec.tape.backward(rec.root, slot_adj);
  // The tape only tracks slots that became leaves; extend to the full
  // (eval, column, component) range before mapping per-eval blocks.
  if (!rec.evals.empty()) {
    const std::size_t total =
        rec.slot_base.back() + 3 * static_cast<std::size_t>(rec.evals.back().points.cols());
    if (slot_adj.size() < total) slot_adj.resize(total, 0.0);
  }
  for (std::size_t e = 0; e < rec.evals.size(); ++e) {
    const Eigen::Index B = rec.evals[e].points.cols();
    if (B == 0) continue;
    Eigen::Map<const Eigen::Matrix<double, 3, Eigen::Dynamic>> adj(
        slot_adj.data() + rec.slot_base[e], 3, B);
    if (adj.isZero(0.0)) continue;
    backward_batch(spec, params, rec.evals[e], adj, grad);
  }
}

ParamVector loss_gradient(const MlpSpec& spec, const ParamVector& params,
                          const RecordedLoss& rec) {
  ParamVector grad;
  grad.data.assign(params.data.size(), 0.0);
  loss_gradient_accumulate(spec, params, rec, grad);
  if (!grad.all_finite()) {
    throw NumericFaultError("loss_gradient: non-finite gradient");
  }
  return grad;
}

}  // namespace pinnflow::net
