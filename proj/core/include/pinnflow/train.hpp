#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "pinnflow/loss.hpp"
#include "pinnflow/net.hpp"
#include "pinnflow/oracle.hpp"
#include "pinnflow/rng.hpp"

namespace pinnflow::train {

struct TrainConfig {
  int64_t iterations = 1000;
  int batch_size = 1000;
  double lr_init = 1e-3;
  double lr_min = 5e-6;
  int64_t plateau_patience = 10000;
  double plateau_factor = 0.5;
  double plateau_min_improve = 0.01;
  double plateau_smoothing = 0.99;
  uint64_t seed = 1;
  int64_t checkpoint_period = 10000;  // 0: final checkpoint only
  int64_t log_period = 1;
  int64_t eval_period = 5000;         // 0: no periodic evaluation
  int workers = 0;                    // 0: PINNFLOW_WORKERS / hardware
  int chunk_size = 256;

  void validate() const;
};

struct AdamState {
  std::vector<double> m, v;
  int64_t t = 0;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  double lr = 1e-3;
  double lr_min = 5e-6;
  // Plateau schedule state.
  int64_t plateau_patience = 10000;
  double plateau_factor = 0.5;
  double plateau_min_improve = 0.01;
  double smoothing = 0.99;
  double smoothed = std::numeric_limits<double>::quiet_NaN();
  double best_smoothed = std::numeric_limits<double>::infinity();
  int64_t last_improve_t = 0;
};

AdamState make_adam_state(std::size_t n_params, const TrainConfig& cfg);

/// Standard bias-corrected Adam update at the current learning rate.
/// Throws NumericFaultError on a non-finite gradient.
void adam_step(net::ParamVector& params, const net::ParamVector& grad, AdamState& s);

/// Exponential smoothing (returns the updated smoothed loss).
double update_smoothed_loss(AdamState& s, double loss);

/// Halves the learning rate (clamped at lr_min) when the smoothed loss has
/// not improved by >= plateau_min_improve over plateau_patience steps.
void plateau_schedule(AdamState& s, double smoothed_loss);

struct Checkpoint {
  net::MlpSpec spec;
  net::ParamVector params;
  AdamState opt;
  std::string rng_state;
  int64_t iteration = 0;
};

/// Self-describing binary dump; exact round-trip (parameters, moments and
/// schedule scalars stored as raw doubles). Written atomically.
void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

struct TrainInputs {
  const sampling::SampleSet* samples = nullptr;  // classified
  net::MlpSpec spec;
  loss::PhysicsConfig physics;
  loss::LossOptions loss_opts;
  TrainConfig cfg;
  const oracle::ReferenceField* reference = nullptr;  // optional periodic eval
  std::vector<Vec2> eval_points;
  std::filesystem::path run_dir;
  std::optional<std::filesystem::path> resume_from;
};

struct TrainResult {
  std::filesystem::path run_dir, checkpoint, metrics_csv, eval_csv;
  loss::LossReport last_report;
  oracle::Metrics final_metrics;  // points == 0 when no reference was given
  int64_t iterations_run = 0;
};

/// Full training loop: draw batch -> loss/gradient -> Adam -> schedule,
/// with metric logging, periodic evaluation, and atomic checkpoints. On a
/// numeric fault an emergency checkpoint plus a structured failure record
/// are written before the error propagates.
TrainResult train(const TrainInputs& inputs);

/// Batched network evaluation at arbitrary points (outputs only).
std::vector<std::array<double, 3>> forward_values(const net::MlpSpec& spec,
                                                  const net::ParamVector& params,
                                                  std::span<const Vec2> pts);

}  // namespace pinnflow::train
