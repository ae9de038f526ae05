#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pinnflow/geometry.hpp"
#include "pinnflow/interp.hpp"
#include "pinnflow/loss.hpp"
#include "pinnflow/net.hpp"
#include "pinnflow/oracle.hpp"
#include "pinnflow/sampling.hpp"
#include "pinnflow/train.hpp"

#include "json.hpp"

namespace pinnflow::cases {

/// Flat-key experiment description. Parsing is strict: unknown keys and
/// missing required keys are rejected before any compute.
struct ExperimentConfig {
  std::string case_id;  // square-cavity | semicircle-cavity | wavy-channel | kovasznay-cutout
  loss::LossMode mode = loss::LossMode::Bcxn;
  double re = 0;
  double dx = 0;
  sampling::Arrangement arrangement = sampling::Arrangement::CellCentered;
  int boundary_count = 0;  // 0: spacing-based (arclength ~ dx)

  std::vector<int> trunk_widths{64, 30, 30, 30};
  std::vector<int> branch_widths{30, 30, 30};

  double lambda_pde = 1.0;
  double lambda_bc = 1.0;
  loss::PressureExternal pressure_external = loss::PressureExternal::Mirror;
  interp::KernelForm kernel_form = interp::KernelForm::Corrected;

  train::TrainConfig training;  // seed field unused; seeds come from seed_list
  std::vector<uint64_t> seed_list{1};
  std::string out_dir = "runs";

  // Geometry parameters.
  double cavity_size = 1.0;
  double radius = 1.0;
  double lid_velocity = 1.0;
  double channel_length = 8.0;
  double half_height = 1.0;
  double wave_amplitude = 0.2;
  double wavelength = 2.0;
  double kov_x0 = -0.5, kov_x1 = 1.0, kov_y0 = -0.5, kov_y1 = 1.5;

  // Reference oracle.
  double ref_dx = 1.0 / 64.0;
  int64_t ref_max_steps = 2'000'000;
  double ref_steady_tol = 1e-8;

  void validate() const;
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config_file(const std::filesystem::path& path);

/// Canonical echo of the resolved config (includes defaults).
nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// Identity hash over the experiment-defining fields (seeds, output paths
/// and worker/log settings excluded); used to reject mixed-case reports.
uint64_t config_hash(const ExperimentConfig& cfg);

std::string mode_name(loss::LossMode m);

struct CaseSetup {
  geom::LevelSetGeometry geometry;
  sampling::GridSpec grid;
  sampling::SampleSet samples;  // classified
  net::MlpSpec spec;
  loss::PhysicsConfig physics;
  loss::LossOptions loss_opts;
  ExperimentConfig config;
};

CaseSetup make_case(const ExperimentConfig& cfg);

/// Reference field for the case: analytic for kovasznay-cutout, projection
/// solve otherwise (grid from ref_dx; optional warm start).
oracle::ReferenceField solve_reference(const CaseSetup& setup,
                                       const interp::GriddedField* warm_start = nullptr,
                                       int64_t log_every = 0);

std::filesystem::path run_dir_for(const ExperimentConfig& cfg, uint64_t seed);

void write_manifest(const ExperimentConfig& cfg, uint64_t seed,
                    const std::filesystem::path& run_dir);

/// Reads a manifest back into a config (seed returned separately).
std::pair<ExperimentConfig, uint64_t> read_manifest(const std::filesystem::path& file);

// ---- report aggregation ---------------------------------------------------

struct RunSummary {
  std::string run;
  std::string case_id;
  std::string mode;
  uint64_t seed = 0;
  double final_mse = 0;
  double final_rel_l2 = 0;
  double wall_ms_per_1k = 0;  // median of logged values
};

struct ConvergenceRow {
  int64_t iter = 0;
  double mse_median = 0, mse_p10 = 0, mse_p90 = 0;
};

struct ReportResult {
  std::vector<RunSummary> runs;
  std::vector<ConvergenceRow> convergence;
  std::vector<std::string> warnings;  // per-run exclusions
};

/// Aggregates completed run directories (manifest + eval.csv + metrics.csv).
/// Corrupt runs are excluded with a warning; mixing different experiment
/// identities is an error.
ReportResult build_report(const std::vector<std::filesystem::path>& run_dirs);

void write_report_csv(const ReportResult& rep, const std::filesystem::path& summary_csv,
                      const std::filesystem::path& convergence_csv);

/// Field + ND-residual export on a uniform lattice clipped to the interior
/// (about target_cells cells across the longer bounding-box side).
void export_fields_csv(const CaseSetup& setup, const net::ParamVector& params,
                       std::ostream& os, int target_cells = 200);

}  // namespace pinnflow::cases
