#include "pinnflow/cases.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <unordered_map>

#include "pinnflow/errors.hpp"

namespace pinnflow::cases {

using nlohmann::json;

namespace {

const std::vector<std::string> kCases = {"square-cavity", "semicircle-cavity",
                                         "wavy-channel", "kovasznay-cutout"};

loss::LossMode parse_mode(const std::string& s) {
  if (s == "bcxn") return loss::LossMode::Bcxn;
  if (s == "nd-baseline") return loss::LossMode::NdBaseline;
  throw ConfigError("unknown mode: " + s + " (expected bcxn | nd-baseline)");
}

sampling::Arrangement parse_arrangement(const std::string& s) {
  if (s == "cell-centered") return sampling::Arrangement::CellCentered;
  if (s == "node-centered") return sampling::Arrangement::NodeCentered;
  throw ConfigError("unknown arrangement: " + s);
}

}  // namespace

std::string mode_name(loss::LossMode m) {
  return m == loss::LossMode::Bcxn ? "bcxn" : "nd-baseline";
}

void ExperimentConfig::validate() const {
  if (std::find(kCases.begin(), kCases.end(), case_id) == kCases.end()) {
    throw ConfigError("unknown case: " + case_id);
  }
  if (!(re > 0)) throw ConfigError("re must be > 0");
  if (!(dx > 0)) throw ConfigError("dx must be > 0");
  if (seed_list.empty()) throw ConfigError("seed_list must not be empty");
  if (boundary_count < 0) throw ConfigError("boundary_count must be >= 0");
  if (!(ref_dx > 0)) throw ConfigError("ref_dx must be > 0");
  training.validate();
  net::MlpSpec::make(trunk_widths, branch_widths).validate();
}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  bool has_case = false, has_mode = false, has_re = false, has_dx = false;
  bool has_iters = false, has_batch = false;

  for (const auto& [key, val] : j.items()) {
    try {
      if (key == "case") {
        c.case_id = val.get<std::string>();
        has_case = true;
      } else if (key == "mode") {
        c.mode = parse_mode(val.get<std::string>());
        has_mode = true;
      } else if (key == "re") {
        c.re = val.get<double>();
        has_re = true;
      } else if (key == "dx") {
        c.dx = val.get<double>();
        has_dx = true;
      } else if (key == "arrangement") {
        c.arrangement = parse_arrangement(val.get<std::string>());
      } else if (key == "boundary_count") {
        c.boundary_count = val.get<int>();
      } else if (key == "trunk_widths") {
        c.trunk_widths = val.get<std::vector<int>>();
      } else if (key == "branch_widths") {
        c.branch_widths = val.get<std::vector<int>>();
      } else if (key == "lambda_pde") {
        c.lambda_pde = val.get<double>();
      } else if (key == "lambda_bc") {
        c.lambda_bc = val.get<double>();
      } else if (key == "pressure_external") {
        const auto s = val.get<std::string>();
        if (s == "mirror") {
          c.pressure_external = loss::PressureExternal::Mirror;
        } else if (s == "network") {
          c.pressure_external = loss::PressureExternal::Network;
        } else {
          throw ConfigError("unknown pressure_external: " + s);
        }
      } else if (key == "kernel_form") {
        const auto s = val.get<std::string>();
        if (s == "corrected") {
          c.kernel_form = interp::KernelForm::Corrected;
        } else if (s == "as-printed") {
          c.kernel_form = interp::KernelForm::AsPrinted;
        } else {
          throw ConfigError("unknown kernel_form: " + s);
        }
      } else if (key == "iterations") {
        c.training.iterations = val.get<int64_t>();
        has_iters = true;
      } else if (key == "batch_size") {
        c.training.batch_size = val.get<int>();
        has_batch = true;
      } else if (key == "lr_init") {
        c.training.lr_init = val.get<double>();
      } else if (key == "lr_min") {
        c.training.lr_min = val.get<double>();
      } else if (key == "plateau_patience") {
        c.training.plateau_patience = val.get<int64_t>();
      } else if (key == "plateau_factor") {
        c.training.plateau_factor = val.get<double>();
      } else if (key == "plateau_min_improve") {
        c.training.plateau_min_improve = val.get<double>();
      } else if (key == "plateau_smoothing") {
        c.training.plateau_smoothing = val.get<double>();
      } else if (key == "checkpoint_period") {
        c.training.checkpoint_period = val.get<int64_t>();
      } else if (key == "log_period") {
        c.training.log_period = val.get<int64_t>();
      } else if (key == "eval_period") {
        c.training.eval_period = val.get<int64_t>();
      } else if (key == "workers") {
        c.training.workers = val.get<int>();
      } else if (key == "chunk_size") {
        c.training.chunk_size = val.get<int>();
      } else if (key == "seed_list") {
        c.seed_list = val.get<std::vector<uint64_t>>();
      } else if (key == "seed") {
        c.seed_list = {val.get<uint64_t>()};
      } else if (key == "out_dir") {
        c.out_dir = val.get<std::string>();
      } else if (key == "cavity_size") {
        c.cavity_size = val.get<double>();
      } else if (key == "radius") {
        c.radius = val.get<double>();
      } else if (key == "lid_velocity") {
        c.lid_velocity = val.get<double>();
      } else if (key == "channel_length") {
        c.channel_length = val.get<double>();
      } else if (key == "half_height") {
        c.half_height = val.get<double>();
      } else if (key == "wave_amplitude") {
        c.wave_amplitude = val.get<double>();
      } else if (key == "wavelength") {
        c.wavelength = val.get<double>();
      } else if (key == "kov_x0") {
        c.kov_x0 = val.get<double>();
      } else if (key == "kov_x1") {
        c.kov_x1 = val.get<double>();
      } else if (key == "kov_y0") {
        c.kov_y0 = val.get<double>();
      } else if (key == "kov_y1") {
        c.kov_y1 = val.get<double>();
      } else if (key == "ref_dx") {
        c.ref_dx = val.get<double>();
      } else if (key == "ref_max_steps") {
        c.ref_max_steps = val.get<int64_t>();
      } else if (key == "ref_steady_tol") {
        c.ref_steady_tol = val.get<double>();
      } else {
        throw ConfigError("unknown config key: " + key);
      }
    } catch (const json::exception& e) {
      throw ConfigError("bad value for key '" + key + "': " + e.what());
    }
  }
  if (!has_case) throw ConfigError("missing required key: case");
  if (!has_mode) throw ConfigError("missing required key: mode");
  if (!has_re) throw ConfigError("missing required key: re");
  if (!has_dx) throw ConfigError("missing required key: dx");
  if (!has_iters) throw ConfigError("missing required key: iterations");
  if (!has_batch) throw ConfigError("missing required key: batch_size");
  c.validate();
  return c;
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path.string());
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path.string() + ": " + e.what());
  }
  return parse_config(j);
}

json config_to_json(const ExperimentConfig& c) {
  return json{
      {"case", c.case_id},
      {"mode", mode_name(c.mode)},
      {"re", c.re},
      {"dx", c.dx},
      {"arrangement", c.arrangement == sampling::Arrangement::CellCentered
                          ? "cell-centered"
                          : "node-centered"},
      {"boundary_count", c.boundary_count},
      {"trunk_widths", c.trunk_widths},
      {"branch_widths", c.branch_widths},
      {"lambda_pde", c.lambda_pde},
      {"lambda_bc", c.lambda_bc},
      {"pressure_external",
       c.pressure_external == loss::PressureExternal::Mirror ? "mirror" : "network"},
      {"kernel_form",
       c.kernel_form == interp::KernelForm::Corrected ? "corrected" : "as-printed"},
      {"iterations", c.training.iterations},
      {"batch_size", c.training.batch_size},
      {"lr_init", c.training.lr_init},
      {"lr_min", c.training.lr_min},
      {"plateau_patience", c.training.plateau_patience},
      {"plateau_factor", c.training.plateau_factor},
      {"plateau_min_improve", c.training.plateau_min_improve},
      {"plateau_smoothing", c.training.plateau_smoothing},
      {"checkpoint_period", c.training.checkpoint_period},
      {"log_period", c.training.log_period},
      {"eval_period", c.training.eval_period},
      {"workers", c.training.workers},
      {"chunk_size", c.training.chunk_size},
      {"seed_list", c.seed_list},
      {"out_dir", c.out_dir},
      {"cavity_size", c.cavity_size},
      {"radius", c.radius},
      {"lid_velocity", c.lid_velocity},
      {"channel_length", c.channel_length},
      {"half_height", c.half_height},
      {"wave_amplitude", c.wave_amplitude},
      {"wavelength", c.wavelength},
      {"kov_x0", c.kov_x0},
      {"kov_x1", c.kov_x1},
      {"kov_y0", c.kov_y0},
      {"kov_y1", c.kov_y1},
      {"ref_dx", c.ref_dx},
      {"ref_max_steps", c.ref_max_steps},
      {"ref_steady_tol", c.ref_steady_tol},
  };
}

uint64_t config_hash(const ExperimentConfig& c) {
  json j = config_to_json(c);
  j.erase("seed_list");
  j.erase("out_dir");
  j.erase("workers");
  j.erase("chunk_size");
  j.erase("log_period");
  j.erase("checkpoint_period");
  j.erase("eval_period");
  const std::string s = j.dump();
  uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

CaseSetup make_case(const ExperimentConfig& cfg) {
  cfg.validate();

  const auto build_geometry = [&]() -> geom::LevelSetGeometry {
    if (cfg.case_id == "square-cavity") {
      return geom::make_square_cavity(cfg.cavity_size, cfg.lid_velocity);
    }
    if (cfg.case_id == "semicircle-cavity") {
      return geom::make_semicircle_cavity(cfg.radius, cfg.lid_velocity);
    }
    if (cfg.case_id == "wavy-channel") {
      return geom::make_wavy_channel(cfg.channel_length, cfg.half_height,
                                     cfg.wave_amplitude, cfg.wavelength);
    }
    const double re = cfg.re;
    return geom::make_rect_dirichlet(
        {cfg.kov_x0, cfg.kov_y0}, {cfg.kov_x1, cfg.kov_y1}, [re](Vec2 p) {
          const auto k = oracle::kovasznay(re, p);
          return Vec2{k[0], k[1]};
        });
  };

  geom::LevelSetGeometry geometry = build_geometry();
  const auto [lo, hi] = geometry.bounding_box();
  sampling::GridSpec grid = sampling::grid_covering(lo, hi, cfg.dx, cfg.arrangement);
  sampling::SampleSet samples = sampling::build_samples(
      geometry, grid, cfg.arrangement,
      cfg.boundary_count > 0 ? std::optional<int>(cfg.boundary_count) : std::nullopt);
  sampling::classify_stencils(geometry, samples);

  CaseSetup setup{std::move(geometry),
                  grid,
                  std::move(samples),
                  net::MlpSpec::make(cfg.trunk_widths, cfg.branch_widths),
                  loss::PhysicsConfig{cfg.re, cfg.lambda_pde, cfg.lambda_bc},
                  loss::LossOptions{cfg.mode, cfg.pressure_external},
                  cfg};
  return setup;
}

oracle::ReferenceField solve_reference(const CaseSetup& setup,
                                       const interp::GriddedField* warm_start,
                                       int64_t log_every) {
  const auto& cfg = setup.config;
  const auto [lo, hi] = setup.geometry.bounding_box();
  const sampling::GridSpec grid =
      sampling::grid_covering(lo, hi, cfg.ref_dx, sampling::Arrangement::CellCentered);

  oracle::ReferenceField ref;
  if (cfg.case_id == "kovasznay-cutout") {
    const double re = cfg.re;
    ref = oracle::sample_analytic(
        [re](Vec2 p) { return oracle::kovasznay(re, p); }, grid, re, &setup.geometry);
  } else {
    oracle::SolverOptions opts;
    opts.max_steps = cfg.ref_max_steps;
    opts.steady_tol = cfg.ref_steady_tol;
    opts.kernel = cfg.kernel_form;
    opts.warm_start = warm_start;
    opts.log_every = log_every;
    ref = oracle::projection_solve(setup.geometry, grid, setup.physics, opts);
  }
  ref.case_name = cfg.case_id;
  return ref;
}

std::filesystem::path run_dir_for(const ExperimentConfig& cfg, uint64_t seed) {
  std::ostringstream name;
  name << cfg.case_id << '-' << mode_name(cfg.mode) << "-seed" << seed;
  return std::filesystem::path(cfg.out_dir) / name.str();
}

void write_manifest(const ExperimentConfig& cfg, uint64_t seed,
                    const std::filesystem::path& run_dir) {
  json j = config_to_json(cfg);
  j.erase("seed_list");
  j["seed"] = seed;
  json manifest = {{"pinnflow_manifest", 1},
                   {"config_hash", config_hash(cfg)},
                   {"config", j}};
  std::filesystem::create_directories(run_dir);
  std::ofstream os(run_dir / "manifest.json");
  os << manifest.dump(2) << "\n";
  if (!os.good()) throw ConfigError("cannot write manifest in " + run_dir.string());
}

std::pair<ExperimentConfig, uint64_t> read_manifest(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw ConfigError("cannot open manifest: " + file.string());
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw ConfigError("manifest parse error: " + std::string(e.what()));
  }
  if (!j.contains("config")) throw ConfigError("not a manifest: " + file.string());
  json cj = j.at("config");
  uint64_t seed = cj.value("seed", 1ull);
  ExperimentConfig cfg = parse_config(cj);
  return {cfg, seed};
}

// ---- report ---------------------------------------------------------------

namespace {

struct EvalSeries {
  std::vector<int64_t> iters;
  std::vector<double> mse;
};

bool read_eval_csv(const std::filesystem::path& path, EvalSeries& out) {
  std::ifstream is(path);
  if (!is) return false;
  std::string line;
  if (!std::getline(is, line)) return false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tok;
    try {
      if (!std::getline(ss, tok, ',')) return false;
      const int64_t it = std::stoll(tok);
      if (!std::getline(ss, tok, ',')) return false;
      const double mse = std::stod(tok);
      out.iters.push_back(it);
      out.mse.push_back(mse);
    } catch (...) {
      return false;
    }
  }
  return !out.iters.empty();
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double quantile_of(std::vector<double> v, double q) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const double pos = q * (v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - lo;
  return v[lo] * (1 - frac) + v[hi] * frac;
}

bool wall_median_from_metrics(const std::filesystem::path& path, double& out) {
  std::ifstream is(path);
  if (!is) return false;
  std::string line;
  if (!std::getline(is, line)) return false;
  std::vector<double> wall;
  while (std::getline(is, line)) {
    const auto pos = line.rfind(',');
    if (pos == std::string::npos) continue;
    try {
      wall.push_back(std::stod(line.substr(pos + 1)));
    } catch (...) {
      return false;
    }
  }
  if (wall.empty()) return false;
  out = median_of(wall);
  return true;
}

}  // namespace

ReportResult build_report(const std::vector<std::filesystem::path>& run_dirs) {
  if (run_dirs.empty()) throw InvalidArgumentError("build_report: no run dirs");
  ReportResult rep;
  std::optional<uint64_t> identity;
  std::map<int64_t, std::vector<double>> per_iter;

  for (const auto& dir : run_dirs) {
    ExperimentConfig cfg;
    uint64_t seed = 0;
    try {
      std::tie(cfg, seed) = read_manifest(dir / "manifest.json");
    } catch (const std::exception& e) {
      rep.warnings.push_back("excluded (" + std::string(e.what()) + "): " + dir.string());
      continue;
    }
    const uint64_t h = config_hash(cfg);
    if (identity && *identity != h) {
      throw ConfigError("mixed experiment identities in report: " + dir.string());
    }
    try {
      EvalSeries series;
      if (!read_eval_csv(dir / "eval.csv", series)) {
        rep.warnings.push_back("excluded (missing/corrupt eval.csv): " + dir.string());
        continue;
      }
      double wall = 0;
      if (!wall_median_from_metrics(dir / "metrics.csv", wall)) {
        rep.warnings.push_back("excluded (missing/corrupt metrics.csv): " + dir.string());
        continue;
      }
      identity = h;  // only adopt the identity once the run is accepted
      RunSummary rs;
      rs.run = dir.string();
      rs.case_id = cfg.case_id;
      rs.mode = mode_name(cfg.mode);
      rs.seed = seed;
      rs.final_mse = series.mse.back();
      rs.final_rel_l2 = 0;
      {
        // rel_l2 is the third eval.csv column; re-read the last row fully.
        std::ifstream is(dir / "eval.csv");
        std::string line, last;
        std::getline(is, line);
        while (std::getline(is, line)) {
          if (!line.empty()) last = line;
        }
        const auto p = last.rfind(',');
        if (p != std::string::npos) rs.final_rel_l2 = std::stod(last.substr(p + 1));
      }
      rs.wall_ms_per_1k = wall;
      rep.runs.push_back(std::move(rs));
      for (std::size_t k = 0; k < series.iters.size(); ++k) {
        per_iter[series.iters[k]].push_back(series.mse[k]);
      }
    } catch (const std::exception& e) {
      rep.warnings.push_back("excluded (" + std::string(e.what()) + "): " + dir.string());
    }
  }
  if (rep.runs.empty()) {
    throw ConfigError("build_report: all runs excluded");
  }
  for (const auto& [iter, vals] : per_iter) {
    ConvergenceRow row;
    row.iter = iter;
    row.mse_median = median_of(vals);
    row.mse_p10 = quantile_of(vals, 0.10);
    row.mse_p90 = quantile_of(vals, 0.90);
    rep.convergence.push_back(row);
  }
  return rep;
}

void write_report_csv(const ReportResult& rep, const std::filesystem::path& summary_csv,
                      const std::filesystem::path& convergence_csv) {
  {
    std::ofstream os(summary_csv);
    os.precision(10);
    os << "run,case,mode,seed,final_mse,final_rel_l2,wall_ms_per_1k\n";
    for (const auto& r : rep.runs) {
      os << r.run << ',' << r.case_id << ',' << r.mode << ',' << r.seed << ','
         << r.final_mse << ',' << r.final_rel_l2 << ',' << r.wall_ms_per_1k << '\n';
    }
  }
  {
    std::ofstream os(convergence_csv);
    os.precision(10);
    os << "iter,mse_median,mse_p10,mse_p90\n";
    for (const auto& row : rep.convergence) {
      os << row.iter << ',' << row.mse_median << ',' << row.mse_p10 << ','
         << row.mse_p90 << '\n';
    }
  }
}

void export_fields_csv(const CaseSetup& setup, const net::ParamVector& params,
                       std::ostream& os, int target_cells) {
  const auto [lo, hi] = setup.geometry.bounding_box();
  const double extent = std::max(hi.x - lo.x, hi.y - lo.y);
  const double dx = extent / target_cells;
  const sampling::GridSpec grid =
      sampling::grid_covering(lo, hi, dx, sampling::Arrangement::CellCentered);
  sampling::SampleSet lattice = sampling::build_samples(
      setup.geometry, grid, sampling::Arrangement::CellCentered);
  sampling::classify_stencils(setup.geometry, lattice);

  // Lattice values batched once; off-lattice (mirror) queries memoized.
  const auto lattice_vals = train::forward_values(setup.spec, params, lattice.interior);
  std::unordered_map<int64_t, std::array<double, 3>> memo;
  memo.reserve(lattice.interior.size() * 2);
  const auto key_of = [](Vec2 p) {
    int64_t k;
    static_assert(sizeof(double) == 8);
    std::memcpy(&k, &p.x, 8);
    int64_t k2;
    std::memcpy(&k2, &p.y, 8);
    return k * 1000003 ^ k2;
  };
  for (std::size_t i = 0; i < lattice.interior.size(); ++i) {
    memo[key_of(lattice.interior[i])] = lattice_vals[i];
  }
  const loss::FieldFn field = [&](Vec2 p) {
    const int64_t k = key_of(p);
    const auto it = memo.find(k);
    if (it != memo.end()) return it->second;
    const auto val = net::forward(setup.spec, params, p);
    memo.emplace(k, val);
    return val;
  };

  os << "x,y,u,v,p,r_cont,r_xmom,r_ymom\n";
  os.precision(10);
  for (std::size_t s = 0; s < lattice.stencils.size(); ++s) {
    const auto vals = loss::assemble_stencil_values(field, lattice.stencils[s], lattice,
                                                    setup.loss_opts);
    const auto r = loss::nd_residual(vals, grid.dx, setup.physics.re);
    const Vec2 c = lattice.interior[s];
    os << c.x << ',' << c.y << ',' << vals.center.u << ',' << vals.center.v << ','
       << vals.center.p << ',' << r[0] << ',' << r[1] << ',' << r[2] << '\n';
  }
}

}  // namespace pinnflow::cases
