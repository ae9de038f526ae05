// Experiment CLI: reference solves, training runs, reports, field exports.
//
// Exit codes: 0 success, 2 usage/config error, 3 numeric fault,
// 4 reference-solver divergence.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "pinnflow/cases.hpp"
#include "pinnflow/errors.hpp"
#include "pinnflow/oracle.hpp"
#include "pinnflow/train.hpp"

namespace fs = std::filesystem;
using namespace pinnflow;

namespace {

struct CommonArgs {
  std::string config;
  std::string out;
  std::string mode;
  int64_t iters_override = 0;
  std::optional<uint64_t> seed;
};

cases::ExperimentConfig load_with_overrides(const CommonArgs& a) {
  cases::ExperimentConfig cfg = cases::load_config_file(a.config);
  if (!a.out.empty()) cfg.out_dir = a.out;
  if (!a.mode.empty()) {
    nlohmann::json j = cases::config_to_json(cfg);
    j["mode"] = a.mode;
    cfg = cases::parse_config(j);
  }
  if (a.iters_override > 0) cfg.training.iterations = a.iters_override;
  if (a.seed) cfg.seed_list = {*a.seed};
  cfg.validate();
  return cfg;
}

uint64_t spec_hash(const net::MlpSpec& spec) {
  const std::string s = spec.to_json().dump();
  uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

int cmd_validate(const CommonArgs& a) {
  const cases::ExperimentConfig cfg = load_with_overrides(a);
  std::cout << cases::config_to_json(cfg).dump(2) << "\n";
  std::cout << "config ok (hash " << std::hex << cases::config_hash(cfg) << std::dec
            << ")\n";
  return 0;
}

int cmd_solve_reference(const CommonArgs& a, const std::string& out_file) {
  const cases::ExperimentConfig cfg = load_with_overrides(a);
  const cases::CaseSetup setup = cases::make_case(cfg);
  fs::path out = out_file.empty()
                     ? fs::path(cfg.out_dir) / (cfg.case_id + "-ref.csv")
                     : fs::path(out_file);
  fs::create_directories(out.parent_path().empty() ? "." : out.parent_path());
  try {
    const oracle::ReferenceField ref = cases::solve_reference(setup, nullptr, 2000);
    oracle::write_field(ref, out);
    std::cout << "reference written: " << out.string() << "\n";
    if (ref.provenance == oracle::Provenance::Solver) {
      std::cout << "  steps " << ref.iterations << ", steady residual "
                << ref.steady_residual << ", max divergence " << ref.max_divergence
                << "\n";
    } else {
      std::cout << "  analytic field, instant\n";
    }
    return 0;
  } catch (const SolverDivergenceError& e) {
    const fs::path hist = out.string() + ".residuals.txt";
    std::ofstream os(hist);
    for (double r : e.residual_history) os << r << "\n";
    std::cerr << "solver divergence: " << e.what() << "\n"
              << "residual history: " << hist.string() << "\n";
    return 4;
  }
}

int cmd_train(const CommonArgs& a, const std::string& ref_file) {
  const cases::ExperimentConfig cfg = load_with_overrides(a);
  const cases::CaseSetup setup = cases::make_case(cfg);

  std::optional<oracle::ReferenceField> reference;
  std::vector<Vec2> eval_points;
  if (cfg.training.eval_period > 0) {
    if (!ref_file.empty()) {
      reference = oracle::read_field(ref_file);
    } else {
      std::cout << "solving reference field (" << cfg.case_id << ", re " << cfg.re
                << ", ref_dx " << cfg.ref_dx << ")...\n";
      reference = cases::solve_reference(setup);
    }
    eval_points = oracle::evaluation_points(setup.geometry, setup.samples);
  }

  for (uint64_t seed : cfg.seed_list) {
    const fs::path run_dir = cases::run_dir_for(cfg, seed);
    cases::write_manifest(cfg, seed, run_dir);

    train::TrainInputs in;
    in.samples = &setup.samples;
    in.spec = setup.spec;
    in.physics = setup.physics;
    in.loss_opts = setup.loss_opts;
    in.cfg = cfg.training;
    in.cfg.seed = seed;
    in.reference = reference ? &*reference : nullptr;
    in.eval_points = eval_points;
    in.run_dir = run_dir;

    std::cout << "train " << cfg.case_id << " [" << cases::mode_name(cfg.mode)
              << "] seed " << seed << " (" << setup.samples.interior.size()
              << " interior, " << setup.samples.external_count << " external tags)\n";
    const train::TrainResult res = train::train(in);
    std::cout << "  done: total loss " << res.last_report.total;
    if (res.final_metrics.points > 0) {
      std::cout << ", velocity mse " << res.final_metrics.mse << ", rel L2 "
                << res.final_metrics.rel_l2;
    }
    std::cout << "\n  run dir: " << run_dir.string() << "\n";
  }
  return 0;
}

int cmd_report(const std::vector<std::string>& dirs, const std::string& out_dir) {
  std::vector<fs::path> run_dirs(dirs.begin(), dirs.end());
  const cases::ReportResult rep = cases::build_report(run_dirs);
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
  const fs::path out = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
  fs::create_directories(out);
  cases::write_report_csv(rep, out / "summary.csv", out / "convergence.csv");
  std::cout << "report over " << rep.runs.size() << " runs -> "
            << (out / "summary.csv").string() << ", "
            << (out / "convergence.csv").string() << "\n";
  return 0;
}

int cmd_export_fields(const CommonArgs& a, const std::string& checkpoint,
                      const std::string& out_file) {
  const cases::ExperimentConfig cfg = load_with_overrides(a);
  const cases::CaseSetup setup = cases::make_case(cfg);
  const train::Checkpoint ck = train::load_checkpoint(checkpoint);
  if (ck.spec.to_json() != setup.spec.to_json()) {
    std::cerr << "spec mismatch: checkpoint spec hash " << std::hex << spec_hash(ck.spec)
              << " vs config spec hash " << spec_hash(setup.spec) << std::dec << "\n";
    return 2;
  }
  const fs::path out = out_file.empty()
                           ? fs::path(cfg.out_dir) / (cfg.case_id + "-fields.csv")
                           : fs::path(out_file);
  fs::create_directories(out.parent_path().empty() ? "." : out.parent_path());
  std::ofstream os(out);
  if (!os) throw ConfigError("cannot open output: " + out.string());
  cases::export_fields_csv(setup, ck.params, os);
  std::cout << "fields written: " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PINN training engine for steady incompressible flows"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string ref_file, checkpoint, out_file;
  std::vector<std::string> report_dirs;
  std::string report_out;

  auto add_common = [&](CLI::App* cmd, bool need_config = true) {
    auto* opt = cmd->add_option("--config", args.config, "experiment config file");
    if (need_config) opt->required();
    cmd->add_option("--out", args.out, "output directory override");
    cmd->add_option("--mode", args.mode, "mode override (bcxn | nd-baseline)");
    cmd->add_option("--iters-override", args.iters_override,
                    "iteration-count override");
    cmd->add_option("--seed", args.seed, "single seed override");
  };

  auto* c_validate = app.add_subcommand("validate-config", "parse and echo a config");
  add_common(c_validate);

  auto* c_solve = app.add_subcommand("solve-reference", "compute the reference field");
  add_common(c_solve);
  c_solve->add_option("--out-file", out_file, "reference file path");

  auto* c_train = app.add_subcommand("train", "run training for each seed");
  add_common(c_train);
  c_train->add_option("--ref", ref_file, "reference field file (skip solving)");

  auto* c_report = app.add_subcommand("report", "aggregate completed runs");
  c_report->add_option("dirs", report_dirs, "run directories")->required();
  c_report->add_option("--out", report_out, "report output directory");

  auto* c_export = app.add_subcommand("export-fields", "field + residual CSV export");
  add_common(c_export);
  c_export->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  c_export->add_option("--out-file", out_file, "export file path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (c_validate->parsed()) return cmd_validate(args);
    if (c_solve->parsed()) return cmd_solve_reference(args, out_file);
    if (c_train->parsed()) return cmd_train(args, ref_file);
    if (c_report->parsed()) return cmd_report(report_dirs, report_out);
    if (c_export->parsed()) return cmd_export_fields(args, checkpoint, out_file);
  } catch (const NumericFaultError& e) {
    std::cerr << "numeric fault: " << e.what() << "\n";
    return 3;
  } catch (const SolverDivergenceError& e) {
    std::cerr << "solver divergence: " << e.what() << "\n";
    return 4;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidArgumentError& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
