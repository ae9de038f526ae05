#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pinnflow/tape.hpp"
#include "pinnflow/vec2.hpp"

#include "json.hpp"

namespace pinnflow::net {

/// Branched MLP: (x, y) -> trunk (sine activations, sinusoidal first layer)
/// -> three branches (sine) -> linear scalar heads for u, v, p.
struct MlpSpec {
  std::vector<int> trunk;                    // e.g. {64, 30, 30, 30}
  std::array<std::vector<int>, 3> branches;  // u, v, p

  static constexpr int kInput = 2;

  void validate() const;
  int64_t param_count() const;
  nlohmann::json to_json() const;
  static MlpSpec from_json(const nlohmann::json& j);

  /// All three branches set to the same width list.
  static MlpSpec make(std::vector<int> trunk, std::vector<int> branch);
};

struct LayerShape {
  int64_t w_off = 0, b_off = 0;
  int out = 0, in = 0;
};

/// Flat parameter layout: trunk layers, then branch layers (u, v, p), then
/// the three scalar heads. Weights row-major per layer, biases after all
/// weights of that layer.
struct LayerMap {
  std::vector<LayerShape> trunk;
  std::array<std::vector<LayerShape>, 3> branch;
  std::array<LayerShape, 3> head;
  int64_t total = 0;
};

LayerMap layer_map(const MlpSpec& spec);

struct ParamVector {
  std::vector<double> data;

  bool all_finite() const;
};

/// First hidden layer ~ N(0, 1); later layers He-uniform (sqrt(6/fan_in));
/// biases zero. Deterministic under seed.
ParamVector init_params(const MlpSpec& spec, uint64_t seed);

/// Recorded batched forward pass: pre-activations (for the sine derivative)
/// and activations retained for the exact reverse sweep. Internally the
/// batch dimension is the fast (row) dimension and every accumulation runs
/// in a fixed order, so results are bit-identical for any batch size.
struct BatchEval {
  Eigen::MatrixXd points;                              // 2 x B (as given)
  Eigen::MatrixXd points_t;                            // B x 2
  std::vector<Eigen::MatrixXd> trunk_pre;              // per layer, B x width
  std::vector<Eigen::MatrixXd> trunk_act;
  std::array<std::vector<Eigen::MatrixXd>, 3> branch_pre;
  std::array<std::vector<Eigen::MatrixXd>, 3> branch_act;
  Eigen::Matrix<double, 3, Eigen::Dynamic> out;        // (u, v, p) x B
};

/// Throws NumericFaultError (with the offending layer index) when a
/// non-finite parameter is detected.
BatchEval forward_batch(const MlpSpec& spec, const ParamVector& params,
                        const Eigen::MatrixXd& pts);

std::array<double, 3> forward(const MlpSpec& spec, const ParamVector& params, Vec2 p);

/// Accumulates d(loss)/d(params) into grad given d(loss)/d(outputs).
void backward_batch(const MlpSpec& spec, const ParamVector& params, const BatchEval& eval,
                    const Eigen::Matrix<double, 3, Eigen::Dynamic>& out_adjoint,
                    ParamVector& grad);

/// A loss recorded as forward evaluations plus tape arithmetic over their
/// outputs. Output vars are memoized so each (eval, column, component)
/// appears as a single leaf.
struct RecordedLoss {
  Tape tape;
  Tape::Var root;
  std::vector<BatchEval> evals;
  std::vector<int32_t> slot_base;             // per eval
  std::vector<std::vector<int32_t>> leaf_memo;  // per eval: 3*B vars (-1 unset)

  /// Registers a forward pass; its outputs become addressable leaves.
  int add_eval(BatchEval eval);

  /// Tape var for output component `comp` (0=u,1=v,2=p) of column `col`.
  Tape::Var output(int eval_idx, int col, int comp);
};

/// Exact reverse-accumulation gradient of the recorded scalar root with
/// respect to all parameters. Throws NumericFaultError on non-finite
/// intermediates.
ParamVector loss_gradient(const MlpSpec& spec, const ParamVector& params,
                          const RecordedLoss& rec);
void loss_gradient_accumulate(const MlpSpec& spec, const ParamVector& params,
                              const RecordedLoss& rec, ParamVector& grad);

}  // namespace pinnflow::net
