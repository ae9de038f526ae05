#include <benchmark/benchmark.h>

#include "pinnflow/cases.hpp"
#include "pinnflow/interp.hpp"
#include "pinnflow/loss.hpp"
#include "pinnflow/net.hpp"
#include "pinnflow/oracle.hpp"
#include "pinnflow/train.hpp"

using namespace pinnflow;

namespace {

net::MlpSpec desk_spec() { return net::MlpSpec::make({48, 24, 24, 24}, {24, 24, 24}); }

sampling::SampleSet semicircle_samples(double dx) {
  const auto g = geom::make_semicircle_cavity(1.0);
  const auto [lo, hi] = g.bounding_box();
  auto grid = sampling::grid_covering(lo, hi, dx, sampling::Arrangement::CellCentered);
  auto s = sampling::build_samples(g, grid, sampling::Arrangement::CellCentered);
  sampling::classify_stencils(g, s);
  return s;
}

void BM_KernelPhi(benchmark::State& state) {
  double acc = 0, r = -2.0;
  for (auto _ : state) {
    acc += interp::kernel_phi(r);
    r += 1e-4;
    if (r > 2.0) r = -2.0;
  }
  benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_KernelPhi);

void BM_SignedDistanceWavy(benchmark::State& state) {
  const auto g = geom::make_wavy_channel();
  double acc = 0, x = 0.1;
  for (auto _ : state) {
    acc += g.signed_distance({x, 0.3});
    x += 0.01;
    if (x > 7.9) x = 0.1;
  }
  benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_SignedDistanceWavy);

void BM_MlpForwardBatch(benchmark::State& state) {
  const auto spec = desk_spec();
  const auto params = net::init_params(spec, 1);
  const Eigen::Index B = state.range(0);
  Eigen::MatrixXd pts = Eigen::MatrixXd::Random(2, B);
  for (auto _ : state) {
    auto ev = net::forward_batch(spec, params, pts);
    benchmark::DoNotOptimize(ev.out.data());
  }
  state.SetItemsProcessed(state.iterations() * B);
}
BENCHMARK(BM_MlpForwardBatch)->Arg(256)->Arg(1024)->Arg(4096);

void BM_LossGradientBcxn(benchmark::State& state) {
  static const auto samples = semicircle_samples(0.04);
  const auto spec = desk_spec();
  const auto params = net::init_params(spec, 1);
  const loss::Assembler assembler(samples, {100.0, 1.0, 1.0},
                                  {loss::LossMode::Bcxn, loss::PressureExternal::Mirror});
  std::vector<int> batch(samples.interior.size());
  for (std::size_t i = 0; i < batch.size(); ++i) batch[i] = static_cast<int>(i);
  net::ParamVector grad;
  for (auto _ : state) {
    auto rep = loss::pde_loss_gradient(assembler, spec, params, batch, grad, 1, 256);
    benchmark::DoNotOptimize(rep.total);
  }
  state.SetItemsProcessed(state.iterations() * batch.size());
}
BENCHMARK(BM_LossGradientBcxn)->Unit(benchmark::kMillisecond);

void BM_AdamStep(benchmark::State& state) {
  const auto spec = desk_spec();
  auto params = net::init_params(spec, 1);
  net::ParamVector grad;
  grad.data.assign(params.data.size(), 1e-4);
  train::TrainConfig cfg;
  auto adam = train::make_adam_state(params.data.size(), cfg);
  for (auto _ : state) {
    train::adam_step(params, grad, adam);
  }
  benchmark::DoNotOptimize(params.data.data());
}
BENCHMARK(BM_AdamStep);

void BM_ProjectionStep(benchmark::State& state) {
  // One coarse cavity solve per iteration; reports time per solve.
  const auto g = geom::make_square_cavity();
  const sampling::GridSpec grid{{0, 0}, 1.0 / 32, 32, 32};
  for (auto _ : state) {
    oracle::SolverOptions opts;
    opts.steady_tol = 1e-3;  // partial march; fixed amount of work
    auto ref = oracle::projection_solve(g, grid, {100.0, 1.0, 1.0}, opts);
    benchmark::DoNotOptimize(ref.iterations);
  }
}
BENCHMARK(BM_ProjectionStep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
