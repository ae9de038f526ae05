// Acceptance suite: one pass/fail line per criterion.
//
//   acceptance [--criterion N] [--work-dir DIR]
//
// Heavy artifacts (reference fields, training run logs) are cached in the
// work dir so dependent criteria can reuse them.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <vector>

#include "pinnflow/cases.hpp"
#include "pinnflow/errors.hpp"
#include "pinnflow/interp.hpp"
#include "pinnflow/loss.hpp"
#include "pinnflow/net.hpp"
#include "pinnflow/oracle.hpp"
#include "pinnflow/parallel.hpp"
#include "pinnflow/rng.hpp"
#include "pinnflow/train.hpp"

#include "json.hpp"

namespace fs = std::filesystem;
using namespace pinnflow;
using nlohmann::json;

namespace {

fs::path g_work = "acceptance-work";

struct Outcome {
  bool pass = false;
  std::string detail;
};

double now_s() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

// Desk-scale training knobs shared by criteria 6 and 7 (within the
// budget stated there; tolerances themselves are pinned per criterion).
constexpr int64_t kDeskIters = 20000;
const std::vector<int> kDeskTrunk = {48, 24, 24, 24};
const std::vector<int> kDeskBranch = {24, 24, 24};

cases::ExperimentConfig desk_config(const std::string& case_id, loss::LossMode mode,
                                    double re, double dx,
                                    sampling::Arrangement arrangement, int batch) {
  cases::ExperimentConfig cfg;
  cfg.case_id = case_id;
  cfg.mode = mode;
  cfg.re = re;
  cfg.dx = dx;
  cfg.arrangement = arrangement;
  cfg.trunk_widths = kDeskTrunk;
  cfg.branch_widths = kDeskBranch;
  cfg.training.iterations = kDeskIters;
  cfg.training.batch_size = batch;
  cfg.training.plateau_patience = 2500;
  cfg.training.plateau_factor = 0.5;
  cfg.training.eval_period = 4000;
  cfg.training.checkpoint_period = 0;
  cfg.training.log_period = 10;
  cfg.training.workers = 0;  // PINNFLOW_WORKERS / hardware
  return cfg;
}

/// Reference field cached in the work dir, keyed by name.
oracle::ReferenceField cached_reference(const std::string& key,
                                        const cases::CaseSetup& setup,
                                        const interp::GriddedField* warm = nullptr) {
  const fs::path file = g_work / (key + ".field.csv");
  if (fs::exists(file)) return oracle::read_field(file);
  oracle::ReferenceField ref = cases::solve_reference(setup, warm);
  oracle::write_field(ref, file);
  return ref;
}

struct RunRecord {
  uint64_t seed;
  std::string mode;
  double mse;
  double wall_median;
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double wall_median_of(const fs::path& metrics_csv) {
  std::ifstream is(metrics_csv);
  std::string line;
  std::getline(is, line);
  std::vector<double> wall;
  std::vector<int64_t> iters;
  while (std::getline(is, line)) {
    const auto first = line.find(',');
    const auto last = line.rfind(',');
    if (first == std::string::npos || last == std::string::npos) continue;
    const int64_t it = std::stoll(line.substr(0, first));
    if (it < 1000) continue;  // full trailing window only
    wall.push_back(std::stod(line.substr(last + 1)));
    iters.push_back(it);
  }
  return wall.empty() ? 0.0 : median(wall);
}

train::TrainResult run_training(const cases::CaseSetup& setup,
                                const oracle::ReferenceField& ref, uint64_t seed,
                                const fs::path& run_dir) {
  train::TrainInputs in;
  in.samples = &setup.samples;
  in.spec = setup.spec;
  in.physics = setup.physics;
  in.loss_opts = setup.loss_opts;
  in.cfg = setup.config.training;
  in.cfg.seed = seed;
  in.reference = &ref;
  in.eval_points = oracle::evaluation_points(setup.geometry, setup.samples);
  in.run_dir = run_dir;
  cases::write_manifest(setup.config, seed, run_dir);
  return train::train(in);
}

// ---- criterion 1 -----------------------------------------------------------

Outcome criterion1() {
  Rng rng(101);
  const int n = 1000000;
  const double t0 = now_s();
  int exact = 0;
  for (int k = 0; k < n; ++k) {
    const double ubc = rng.uniform(-100, 100);
    const double umi = rng.uniform(-100, 100);
    const double pq = rng.uniform(1e-9, 10.0);
    const double via_general = loss::bcxn_general(ubc, umi, 2.0 * pq, pq);
    exact += via_general == 2.0 * ubc - umi;
  }
  const double dt = now_s() - t0;
  std::ostringstream os;
  os << exact << "/" << n << " exact reductions in " << dt << " s";
  return {exact == n && dt < 1.0, os.str()};
}

// ---- criterion 2 -----------------------------------------------------------

Outcome criterion2() {
  using interp::kernel_phi;
  bool ok = true;
  std::ostringstream os;

  const double gap1 = std::abs(kernel_phi(std::nextafter(1.0, 0.0)) -
                               kernel_phi(std::nextafter(1.0, 2.0)));
  const double gap2 = std::abs(kernel_phi(std::nextafter(2.0, 0.0)) -
                               kernel_phi(std::nextafter(2.0, 3.0)));
  ok &= gap1 < 1e-12 && gap2 < 1e-12;
  os << "gaps " << gap1 << "/" << gap2;

  for (int i = 0; i <= 4000; ++i) {
    const double r = -2.0 + 4.0 * i / 4000;
    ok &= kernel_phi(r) >= 0.0;
    ok &= std::abs(kernel_phi(r) - kernel_phi(-r)) < 1e-15;
  }

  // Partition of unity via constant-field reproduction on a masked grid.
  interp::GriddedField f;
  f.grid = {{0, 0}, 0.1, 31, 31};
  f.arrangement = sampling::Arrangement::NodeCentered;
  f.allocate(4.25);
  for (int j = 0; j < 31; ++j) {
    for (int i = 20; i < 31; ++i) f.mask[f.index(i, j)] = 0;
  }
  Rng rng(22);
  double worst = 0;
  for (int k = 0; k < 2000; ++k) {
    const Vec2 q{rng.uniform(0.05, 1.95), rng.uniform(0.05, 2.95)};
    const auto v = interp::interpolate(f, q, 0.1);
    worst = std::max(worst, std::abs(v[0] - 4.25) / 4.25);
  }
  ok &= worst < 1e-12;
  os << ", constant-field err " << worst;
  return {ok, os.str()};
}

// ---- criterion 3 -----------------------------------------------------------

Outcome criterion3() {
  bool ok = true;
  std::ostringstream os;

  // (a) ND residuals on Kovasznay.
  const double re = 40;
  const loss::FieldFn kov = [re](Vec2 p) { return oracle::kovasznay(re, p); };
  std::vector<double> errs;
  for (double dx : {0.04, 0.02, 0.01}) {
    double worst = 0;
    for (int i = 0; i < 20; ++i) {
      for (int j = 0; j < 20; ++j) {
        const Vec2 c{-0.4 + i * 0.06, -0.4 + j * 0.09};
        loss::StencilValues vals;
        const auto set = [&](loss::StencilValues::Entry& e, Vec2 p) {
          const auto v = kov(p);
          e.u = v[0];
          e.v = v[1];
          e.p = v[2];
        };
        set(vals.center, c);
        set(vals.nb[0], {c.x + dx, c.y});
        set(vals.nb[1], {c.x - dx, c.y});
        set(vals.nb[2], {c.x, c.y + dx});
        set(vals.nb[3], {c.x, c.y - dx});
        const auto r = loss::nd_residual(vals, dx, re);
        worst = std::max({worst, std::abs(r[0]), std::abs(r[1]), std::abs(r[2])});
      }
    }
    errs.push_back(worst);
  }
  const double s1 = std::log2(errs[0] / errs[1]);
  const double s2 = std::log2(errs[1] / errs[2]);
  ok &= std::abs(s1 - 2.0) <= 0.15 && std::abs(s2 - 2.0) <= 0.15;
  os << "nd slopes " << s1 << "/" << s2;

  // (b) Dirichlet mirror constraint on a quadratic normal profile
  //     u(n) = a + b n + c n^2: error |u(d) - (2 u(0) - u(-d))| = 2 c d^2.
  // (c) Neumann constraint in the stencil-center mirror configuration
  //     (unequal distances, u_ES = u_MI + AQ g): error (d^2 - pq^2)/... c.
  //     The symmetric configuration is superconvergent (even terms cancel),
  //     so the order is measured at pq = d/2.
  const double a = 0.3, b = -1.1, c = 0.8;
  const auto u = [&](double nn) { return a + b * nn + c * nn * nn; };
  std::vector<double> derr, nerr;
  for (double d : {0.1, 0.05, 0.025}) {
    derr.push_back(std::abs(loss::bcxn_general(u(0.0), u(-d), 2 * d, d) - u(d)));
    const double pq = 0.5 * d;
    nerr.push_back(std::abs(u(-pq) + (d + pq) * b - u(d)));
  }
  const double sd = std::log2(derr[0] / derr[1]);
  const double sn = std::log2(nerr[0] / nerr[1]);
  const double sd2 = std::log2(derr[1] / derr[2]);
  const double sn2 = std::log2(nerr[1] / nerr[2]);
  for (double s : {sd, sn, sd2, sn2}) ok &= std::abs(s - 2.0) <= 0.15;
  os << ", mirror slopes " << sd << "/" << sn;
  return {ok, os.str()};
}

// ---- criterion 4 -----------------------------------------------------------

Outcome criterion4() {
  const auto g = geom::make_semicircle_cavity(1.0);
  const auto [lo, hi] = g.bounding_box();
  const auto grid = sampling::grid_covering(lo, hi, 0.2, sampling::Arrangement::CellCentered);
  auto samples = sampling::build_samples(g, grid, sampling::Arrangement::CellCentered);
  sampling::classify_stencils(g, samples);
  std::vector<int> batch(samples.interior.size());
  std::iota(batch.begin(), batch.end(), 0);

  double worst = 0;
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    const auto spec = net::MlpSpec::make({6, 5}, {4});
    const auto params = net::init_params(spec, seed);
    loss::Assembler assembler(samples, {75.0, 1.0, 1.0}, {loss::LossMode::Bcxn});
    net::ParamVector grad;
    loss::pde_loss_gradient(assembler, spec, params, batch, grad, 1, 64);

    net::ParamVector probe = params;
    std::vector<double> fd(params.data.size());
    const double h = 1e-5;
    for (std::size_t i = 0; i < params.data.size(); ++i) {
      const double saved = probe.data[i];
      probe.data[i] = saved + h;
      const double fp = loss::pde_loss(assembler, spec, probe, batch).total;
      probe.data[i] = saved - h;
      const double fm = loss::pde_loss(assembler, spec, probe, batch).total;
      probe.data[i] = saved;
      fd[i] = (fp - fm) / (2 * h);
    }
    for (std::size_t i = 0; i < fd.size(); ++i) {
      const double scale = std::max({std::abs(fd[i]), std::abs(grad.data[i]), 1e-6});
      worst = std::max(worst, std::abs(fd[i] - grad.data[i]) / scale);
    }
  }
  std::ostringstream os;
  os << "max relative gradient error " << worst << " over 20 seeds";
  return {worst < 1e-5, os.str()};
}

// ---- criterion 5 -----------------------------------------------------------

Outcome criterion5() {
  bool ok = true;
  std::ostringstream os;

  // (a) Kovasznay box, Re = 40, 128-class grid, Dirichlet sides.
  {
    const double re = 40;
    cases::ExperimentConfig cfg;
    cfg.case_id = "kovasznay-cutout";
    cfg.mode = loss::LossMode::Bcxn;
    cfg.re = re;
    cfg.dx = 0.1;
    cfg.training.iterations = 1;
    cfg.training.batch_size = 1;
    cfg.ref_dx = 1.5 / 128;
    auto setup = cases::make_case(cfg);
    // Solver-based reference for the analytic box (bypasses the analytic
    // shortcut): call the projection solver directly.
    const auto [lo, hi] = setup.geometry.bounding_box();
    const auto grid =
        sampling::grid_covering(lo, hi, cfg.ref_dx, sampling::Arrangement::CellCentered);
    const fs::path file = g_work / "kov128.field.csv";
    oracle::ReferenceField ref;
    if (fs::exists(file)) {
      ref = oracle::read_field(file);
    } else {
      ref = oracle::projection_solve(setup.geometry, grid, setup.physics, {});
      ref.case_name = "kovasznay-cutout";
      oracle::write_field(ref, file);
    }
    std::vector<std::array<double, 3>> pred, truth;
    for (int j = 0; j < ref.field.grid.ny; ++j) {
      for (int i = 0; i < ref.field.grid.nx; ++i) {
        const int k = ref.field.index(i, j);
        pred.push_back({ref.field.u[k], ref.field.v[k], ref.field.p[k]});
        truth.push_back(oracle::kovasznay(re, ref.field.pos(i, j)));
      }
    }
    const auto m = oracle::velocity_metrics(pred, truth);
    ok &= m.rel_l2 < 1e-2;
    os << "kovasznay rel L2 " << m.rel_l2;
  }

  // (b) Square cavity Re = 100 self-refinement, centerline u-profile.
  {
    const auto g = geom::make_square_cavity();
    const loss::PhysicsConfig phys{100.0, 1.0, 1.0};
    const fs::path f128 = g_work / "cavity128.field.csv";
    oracle::ReferenceField r128;
    if (fs::exists(f128)) {
      r128 = oracle::read_field(f128);
    } else {
      r128 = oracle::projection_solve(g, {{0, 0}, 1.0 / 128, 128, 128}, phys, {});
      r128.case_name = "square-cavity";
      oracle::write_field(r128, f128);
    }
    const fs::path f256 = g_work / "cavity256.field.csv";
    oracle::ReferenceField r256;
    if (fs::exists(f256)) {
      r256 = oracle::read_field(f256);
    } else {
      oracle::SolverOptions opts;
      opts.warm_start = &r128.field;
      r256 = oracle::projection_solve(g, {{0, 0}, 1.0 / 256, 256, 256}, phys, opts);
      r256.case_name = "square-cavity";
      oracle::write_field(r256, f256);
    }
    double num = 0, den = 0;
    for (int k = 0; k < 100; ++k) {
      const Vec2 p{0.5, (k + 0.5) / 100.0};
      const double uc = oracle::reference_at(r128, std::vector<Vec2>{p})[0][0];
      const double uf = oracle::reference_at(r256, std::vector<Vec2>{p})[0][0];
      num += (uc - uf) * (uc - uf);
      den += uf * uf;
    }
    const double rel = std::sqrt(num / den);
    ok &= rel < 0.02;
    os << ", cavity centerline rel L2 " << rel;
  }
  return {ok, os.str()};
}

// ---- criterion 6 -----------------------------------------------------------

Outcome criterion6() {
  // Semicircle cavity, Re = 100, cell-centered dx = 0.04, batch 1000
  // (capped at n), identical seeds for both methods, <= 60k iterations.
  auto cfg_bcxn = desk_config("semicircle-cavity", loss::LossMode::Bcxn, 100.0, 0.04,
                              sampling::Arrangement::CellCentered, 1000);
  cfg_bcxn.ref_dx = 1.0 / 64;
  auto cfg_nd = cfg_bcxn;
  cfg_nd.mode = loss::LossMode::NdBaseline;

  const auto setup_bcxn = cases::make_case(cfg_bcxn);
  const auto setup_nd = cases::make_case(cfg_nd);
  const auto ref = cached_reference("semicircle-re100", setup_bcxn);

  json results = json::array();
  int bcxn_hits = 0, separation_hits = 0;
  std::ostringstream os;
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    const auto res_b = run_training(setup_bcxn, ref, seed,
                                    g_work / ("c6/bcxn-seed" + std::to_string(seed)));
    const auto res_n = run_training(setup_nd, ref, seed,
                                    g_work / ("c6/nd-seed" + std::to_string(seed)));
    const double mse_b = res_b.final_metrics.mse;
    const double mse_n = res_n.final_metrics.mse;
    const bool hit_b = mse_b <= 1e-3;
    const bool hit_sep = mse_n >= 10.0 * mse_b;
    bcxn_hits += hit_b;
    separation_hits += hit_b && hit_sep;
    results.push_back({{"seed", seed},
                       {"bcxn_mse", mse_b},
                       {"nd_mse", mse_n},
                       {"bcxn_wall", wall_median_of(res_b.metrics_csv)},
                       {"nd_wall", wall_median_of(res_n.metrics_csv)}});
    std::cerr << "  c6 seed " << seed << ": bcxn " << mse_b << ", nd " << mse_n << "\n";
  }
  std::ofstream(g_work / "c6-results.json") << results.dump(2) << "\n";
  os << "BCXN mse<=1e-3 and >=10x separation in " << separation_hits
     << "/10 seeds (bcxn hits " << bcxn_hits << ")";
  return {separation_hits >= 8, os.str()};
}

// ---- criterion 7 -----------------------------------------------------------

Outcome criterion7() {
  // Square cavity Re = 100 at the 50x50 sampling scale.
  auto cfg_node_nd = desk_config("square-cavity", loss::LossMode::NdBaseline, 100.0,
                                 1.0 / 49, sampling::Arrangement::NodeCentered, 1000);
  cfg_node_nd.ref_dx = 1.0 / 128;
  auto cfg_cell_nd = desk_config("square-cavity", loss::LossMode::NdBaseline, 100.0,
                                 0.02, sampling::Arrangement::CellCentered, 500);
  cfg_cell_nd.ref_dx = 1.0 / 128;
  auto cfg_cell_bcxn = desk_config("square-cavity", loss::LossMode::Bcxn, 100.0, 0.02,
                                   sampling::Arrangement::CellCentered, 1000);
  cfg_cell_bcxn.ref_dx = 1.0 / 128;

  const auto setup_node_nd = cases::make_case(cfg_node_nd);
  const auto setup_cell_nd = cases::make_case(cfg_cell_nd);
  const auto setup_cell_bcxn = cases::make_case(cfg_cell_bcxn);
  const auto ref = cached_reference("cavity-re100", setup_node_nd);

  const std::vector<uint64_t> seeds = {1, 2, 3};
  std::vector<double> node_nd, cell_nd, cell_bcxn;
  for (uint64_t seed : seeds) {
    node_nd.push_back(run_training(setup_node_nd, ref, seed,
                                   g_work / ("c7/node-nd-seed" + std::to_string(seed)))
                          .final_metrics.mse);
    cell_nd.push_back(run_training(setup_cell_nd, ref, seed,
                                   g_work / ("c7/cell-nd-seed" + std::to_string(seed)))
                          .final_metrics.mse);
    cell_bcxn.push_back(run_training(setup_cell_bcxn, ref, seed,
                                     g_work / ("c7/cell-bcxn-seed" + std::to_string(seed)))
                            .final_metrics.mse);
    std::cerr << "  c7 seed " << seed << ": node-nd " << node_nd.back() << ", cell-nd "
              << cell_nd.back() << ", cell-bcxn " << cell_bcxn.back() << "\n";
  }
  const double m_node = median(node_nd);
  const double m_cell = median(cell_nd);
  const double m_bcxn = median(cell_bcxn);
  std::ostringstream os;
  os << "median mse: node-nd " << m_node << ", cell-nd " << m_cell << ", cell-bcxn "
     << m_bcxn;
  const bool ok = m_node <= 1e-3 && m_cell >= 10.0 * m_node && m_bcxn <= m_node;
  return {ok, os.str()};
}

// ---- criterion 8 -----------------------------------------------------------

Outcome criterion8() {
  const fs::path file = g_work / "c6-results.json";
  if (!fs::exists(file)) {
    return {false, "criterion 6 results missing (run criterion 6 first)"};
  }
  json results;
  std::ifstream(file) >> results;
  std::vector<double> bcxn, nd;
  for (const auto& r : results) {
    bcxn.push_back(r.at("bcxn_wall").get<double>());
    nd.push_back(r.at("nd_wall").get<double>());
  }
  const double mb = median(bcxn);
  const double mn = median(nd);
  const double rel = std::abs(mb - mn) / mn;
  std::ostringstream os;
  os << "median wall ms/1k iters: bcxn " << mb << ", nd " << mn << " (diff "
     << rel * 100 << "%)";
  return {rel <= 0.10, os.str()};
}

// ---- criterion 9 -----------------------------------------------------------

Outcome criterion9() {
  cases::ExperimentConfig cfg;
  cfg.case_id = "kovasznay-cutout";
  cfg.mode = loss::LossMode::Bcxn;
  cfg.re = 40;
  cfg.dx = 0.125;
  cfg.trunk_widths = {10, 8};
  cfg.branch_widths = {6};
  cfg.training.iterations = 40;
  cfg.training.batch_size = 64;
  cfg.training.eval_period = 0;
  cfg.training.checkpoint_period = 0;
  cfg.training.workers = 1;  // serial mode
  const auto setup = cases::make_case(cfg);

  const auto run = [&](const fs::path& dir, int64_t iters,
                       std::optional<fs::path> resume) {
    train::TrainInputs in;
    in.samples = &setup.samples;
    in.spec = setup.spec;
    in.physics = setup.physics;
    in.loss_opts = setup.loss_opts;
    in.cfg = setup.config.training;
    in.cfg.iterations = iters;
    in.cfg.seed = 7;
    in.run_dir = dir;
    in.resume_from = resume;
    return train::train(in);
  };

  fs::remove_all(g_work / "c9");
  const auto a = run(g_work / "c9/straight", 40, {});
  const auto b1 = run(g_work / "c9/resumed", 18, {});
  const auto b2 = run(g_work / "c9/resumed", 40, g_work / "c9/resumed/checkpoint.bin");
  const auto c = run(g_work / "c9/repeat", 40, {});

  const auto ck_a = train::load_checkpoint(a.checkpoint);
  const auto ck_b = train::load_checkpoint(b2.checkpoint);
  const auto ck_c = train::load_checkpoint(c.checkpoint);

  const bool repeat_ok = ck_a.params.data == ck_c.params.data &&
                         ck_a.rng_state == ck_c.rng_state;
  const bool resume_ok = ck_a.params.data == ck_b.params.data &&
                         ck_a.opt.m == ck_b.opt.m && ck_a.opt.v == ck_b.opt.v &&
                         ck_a.rng_state == ck_b.rng_state;
  std::ostringstream os;
  os << "repeat bit-identical: " << (repeat_ok ? "yes" : "no")
     << ", resume bit-identical: " << (resume_ok ? "yes" : "no");
  return {repeat_ok && resume_ok, os.str()};
}

struct Criterion {
  int id;
  const char* title;
  Outcome (*fn)();
};

const Criterion kCriteria[] = {
    {1, "constraint algebra (Eq. reduction, 1e6 inputs, < 1 s)", criterion1},
    {2, "kernel continuity/symmetry/partition of unity", criterion2},
    {3, "FD and mirror-constraint order 2.0 +- 0.15", criterion3},
    {4, "gradient exactness vs central differences (< 1e-5)", criterion4},
    {5, "reference solver validation (Kovasznay + cavity refinement)", criterion5},
    {6, "headline separation on the semicircle cavity (desk scale)", criterion6},
    {7, "cell/node sampling study on the square cavity", criterion7},
    {8, "BCXN wall-clock overhead <= 10%", criterion8},
    {9, "determinism and checkpoint resume", criterion9},
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else if (std::strcmp(argv[i], "--work-dir") == 0 && i + 1 < argc) {
      g_work = argv[++i];
    } else {
      std::cerr << "usage: acceptance [--criterion N] [--work-dir DIR]\n";
      return 2;
    }
  }
  fs::create_directories(g_work);

  bool all_pass = true;
  for (const auto& c : kCriteria) {
    if (only != 0 && c.id != only) continue;
    const double t0 = now_s();
    Outcome out;
    try {
      out = c.fn();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double dt = now_s() - t0;
    std::cout << (out.pass ? "PASS" : "FAIL") << " criterion-" << c.id << ": " << c.title
              << " [" << out.detail << "] (" << dt << " s)\n";
    all_pass &= out.pass;
  }
  return all_pass ? 0 : 1;
}
