#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "pinnflow/errors.hpp"
#include "pinnflow/net.hpp"
#include "pinnflow/rng.hpp"
#include "support/test_oracles.hpp"

using namespace pinnflow;
using namespace pinnflow::net;

TEST_CASE("spec validation and closed-form parameter count") {
  CHECK_THROWS_AS(MlpSpec::make({0}, {4}).validate(), InvalidArgumentError);
  CHECK_THROWS_AS(MlpSpec::make({}, {4}).validate(), InvalidArgumentError);

  // Closed-form count for the semicircle architecture, computed here
  // independently: trunk 2->64->30->30->30, three branches 30-30-30 + heads.
  const MlpSpec spec = MlpSpec::make({64, 30, 30, 30}, {30, 30, 30});
  int64_t expect = 0;
  int in = 2;
  for (int w : {64, 30, 30, 30}) {
    expect += static_cast<int64_t>(in) * w + w;
    in = w;
  }
  for (int b = 0; b < 3; ++b) {
    in = 30;
    for (int w : {30, 30, 30}) {
      expect += static_cast<int64_t>(in) * w + w;
      in = w;
    }
    expect += in * 1 + 1;
  }
  CHECK(spec.param_count() == expect);
}

TEST_CASE("spec serializes losslessly") {
  const MlpSpec spec = MlpSpec::make({8, 5}, {4, 3});
  const auto j = spec.to_json();
  const MlpSpec back = MlpSpec::from_json(j);
  CHECK(back.to_json() == j);
}

TEST_CASE("init determinism and bias zeros") {
  const MlpSpec spec = MlpSpec::make({16, 8}, {6});
  const auto a = init_params(spec, 99);
  const auto b = init_params(spec, 99);
  CHECK(a.data == b.data);
  const auto c = init_params(spec, 100);
  CHECK(a.data != c.data);

  const LayerMap map = layer_map(spec);
  for (const auto& s : map.trunk) {
    for (int k = 0; k < s.out; ++k) CHECK(a.data[s.b_off + k] == 0.0);
  }
}

TEST_CASE("first layer is N(0,1), later layers He-uniform (100 seeds)") {
  const MlpSpec spec = MlpSpec::make({64, 8}, {4});
  const LayerMap map = layer_map(spec);
  double sum = 0, sum2 = 0;
  int n = 0;
  double he_max = 0;
  const double he_bound = std::sqrt(6.0 / 64.0);
  for (uint64_t seed = 0; seed < 100; ++seed) {
    const auto p = init_params(spec, seed);
    const auto& first = map.trunk[0];
    for (int64_t k = 0; k < static_cast<int64_t>(first.in) * first.out; ++k) {
      const double w = p.data[first.w_off + k];
      sum += w;
      sum2 += w * w;
      ++n;
    }
    const auto& second = map.trunk[1];
    for (int64_t k = 0; k < static_cast<int64_t>(second.in) * second.out; ++k) {
      he_max = std::max(he_max, std::abs(p.data[second.w_off + k]));
    }
  }
  const double mean = sum / n;
  const double stdev = std::sqrt(sum2 / n - mean * mean);
  CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(stdev == doctest::Approx(1.0).epsilon(0.05));
  CHECK(he_max <= he_bound + 1e-12);
  CHECK(he_max > 0.8 * he_bound);  // the bound is actually approached
}

TEST_CASE("forward: zero params give zero outputs; sine bound holds") {
  const MlpSpec spec = MlpSpec::make({8, 6}, {5});
  ParamVector zero;
  zero.data.assign(static_cast<std::size_t>(spec.param_count()), 0.0);
  const auto out = forward(spec, zero, {0.3, -0.7});
  CHECK(out[0] == 0.0);
  CHECK(out[1] == 0.0);
  CHECK(out[2] == 0.0);

  // |output| <= sum |head weights| + |head bias| since sine is in [-1, 1].
  const auto params = init_params(spec, 3);
  const LayerMap map = layer_map(spec);
  Rng rng(8);
  for (int k = 0; k < 50; ++k) {
    const Vec2 p{rng.uniform(-5, 5), rng.uniform(-5, 5)};
    const auto o = forward(spec, params, p);
    for (int b = 0; b < 3; ++b) {
      double bound = std::abs(params.data[map.head[b].b_off]);
      for (int c = 0; c < map.head[b].in; ++c) {
        bound += std::abs(params.data[map.head[b].w_off + c]);
      }
      CHECK(std::abs(o[b]) <= bound + 1e-12);
    }
  }
}

TEST_CASE("batched forward matches the naive-loop oracle") {
  const MlpSpec spec = MlpSpec::make({16, 8, 8}, {6, 6});
  const auto params = init_params(spec, 21);
  Rng rng(22);
  for (int k = 0; k < 100; ++k) {
    const Vec2 p{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const auto lib = forward(spec, params, p);
    const auto ora = pinnflow::testing::naive_forward(spec, params, p);
    for (int c = 0; c < 3; ++c) {
      CHECK(lib[c] == doctest::Approx(ora[c]).epsilon(1e-12));
    }
  }
}

TEST_CASE("batch forward equals per-point forward element-exactly") {
  const MlpSpec spec = MlpSpec::make({32, 16}, {8, 8});
  const auto params = init_params(spec, 5);
  Rng rng(6);
  Eigen::MatrixXd pts(2, 1000);
  for (int k = 0; k < 1000; ++k) {
    pts(0, k) = rng.uniform(-2, 2);
    pts(1, k) = rng.uniform(-2, 2);
  }
  const BatchEval ev = forward_batch(spec, params, pts);
  for (int k = 0; k < 1000; ++k) {
    const auto single = forward(spec, params, {pts(0, k), pts(1, k)});
    CHECK(ev.out(0, k) == single[0]);
    CHECK(ev.out(1, k) == single[1]);
    CHECK(ev.out(2, k) == single[2]);
  }
}

TEST_CASE("non-finite parameters raise a numeric fault with a layer index") {
  const MlpSpec spec = MlpSpec::make({8, 6}, {5});
  auto params = init_params(spec, 1);
  const LayerMap map = layer_map(spec);
  params.data[map.trunk[1].w_off + 3] = std::nan("");
  Eigen::MatrixXd pts = Eigen::MatrixXd::Zero(2, 1);
  try {
    forward_batch(spec, params, pts);
    FAIL("expected NumericFaultError");
  } catch (const NumericFaultError& e) {
    CHECK(e.layer_index == 1);
  }
}

TEST_CASE("loss_gradient: (u(x0))^2 matches finite differences") {
  const MlpSpec spec = MlpSpec::make({10, 7}, {5});
  const auto params = init_params(spec, 31);
  const Vec2 x0{0.4, -0.2};

  const auto loss_value = [&](const ParamVector& p) {
    const auto o = pinnflow::testing::naive_forward(spec, p, x0);
    return o[0] * o[0];
  };

  RecordedLoss rec;
  Eigen::MatrixXd pts(2, 1);
  pts << x0.x, x0.y;
  const int e = rec.add_eval(forward_batch(spec, params, pts));
  const auto u = rec.output(e, 0, 0);
  rec.root = rec.tape.square(u);
  const auto grad = loss_gradient(spec, params, rec);

  const auto fd = pinnflow::testing::fd_gradient(loss_value, params);
  CHECK(pinnflow::testing::max_rel_err(grad.data, fd, 1e-6) < 1e-5);
}

TEST_CASE("loss independent of a branch has a zero gradient block there") {
  const MlpSpec spec = MlpSpec::make({8, 6}, {5});
  const auto params = init_params(spec, 13);
  RecordedLoss rec;
  Eigen::MatrixXd pts(2, 1);
  pts << 0.2, 0.3;
  const int e = rec.add_eval(forward_batch(spec, params, pts));
  rec.root = rec.output(e, 0, 0);  // loss = u only
  const auto grad = loss_gradient(spec, params, rec);

  const LayerMap map = layer_map(spec);
  const auto block_zero = [&](const LayerShape& s) {
    for (int64_t k = 0; k < static_cast<int64_t>(s.in) * s.out + s.out; ++k) {
      if (grad.data[s.w_off + k] != 0.0) return false;
    }
    return true;
  };
  for (int b : {1, 2}) {
    for (const auto& s : map.branch[b]) CHECK(block_zero(s));
    CHECK(block_zero(map.head[b]));
  }
  CHECK_FALSE(block_zero(map.head[0]));
}

TEST_CASE("gradient of a sum equals the sum of gradients") {
  const MlpSpec spec = MlpSpec::make({8, 6}, {4});
  const auto params = init_params(spec, 44);
  const Vec2 a{0.1, 0.9}, b{-0.4, 0.2};

  const auto grad_of = [&](std::vector<Vec2> points, bool sum_both) {
    RecordedLoss rec;
    Eigen::MatrixXd pts(2, static_cast<Eigen::Index>(points.size()));
    for (std::size_t k = 0; k < points.size(); ++k) {
      pts(0, k) = points[k].x;
      pts(1, k) = points[k].y;
    }
    const int e = rec.add_eval(forward_batch(spec, params, pts));
    Tape::Var v = rec.tape.square(rec.output(e, 0, 1));
    if (sum_both) {
      v = rec.tape.add(v, rec.tape.square(rec.output(e, 1, 2)));
    }
    rec.root = v;
    return loss_gradient(spec, params, rec);
  };

  const auto g_sum = grad_of({a, b}, true);
  const auto g_a = grad_of({a, b}, false);
  // g_b: only the second term.
  RecordedLoss rec;
  Eigen::MatrixXd pts(2, 2);
  pts << a.x, b.x, a.y, b.y;
  const int e = rec.add_eval(forward_batch(spec, params, pts));
  rec.root = rec.tape.square(rec.output(e, 1, 2));
  const auto g_b = loss_gradient(spec, params, rec);

  for (std::size_t i = 0; i < g_sum.data.size(); ++i) {
    CHECK(g_sum.data[i] == doctest::Approx(g_a.data[i] + g_b.data[i]).epsilon(1e-12));
  }
}

TEST_CASE("finite-difference agreement across 20 random seeds") {
  // Random single-sample losses mixing all outputs, the structural shape of
  // an ND residual term.
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    const MlpSpec spec = MlpSpec::make({6, 5}, {4});
    const auto params = init_params(spec, seed);
    Rng rng(seed * 7 + 1);
    const Vec2 x{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const Vec2 y{rng.uniform(-1, 1), rng.uniform(-1, 1)};

    RecordedLoss rec;
    Eigen::MatrixXd pts(2, 2);
    pts << x.x, y.x, x.y, y.y;
    const int e = rec.add_eval(forward_batch(spec, params, pts));
    auto& t = rec.tape;
    const auto u0 = rec.output(e, 0, 0), v0 = rec.output(e, 0, 1), p0 = rec.output(e, 0, 2);
    const auto u1 = rec.output(e, 1, 0), v1 = rec.output(e, 1, 1);
    const auto r = t.add(t.mul(u0, t.sub(u1, v0)), t.scale(t.sub(p0, t.mul(v1, v1)), 0.5));
    rec.root = t.square(r);
    const auto grad = loss_gradient(spec, params, rec);

    const auto loss_value = [&](const ParamVector& p) {
      const auto ox = pinnflow::testing::naive_forward(spec, p, x);
      const auto oy = pinnflow::testing::naive_forward(spec, p, y);
      const double rr =
          ox[0] * (oy[0] - ox[1]) + 0.5 * (ox[2] - oy[1] * oy[1]);
      return rr * rr;
    };
    const auto fd = pinnflow::testing::fd_gradient(loss_value, params);
    CHECK(pinnflow::testing::max_rel_err(grad.data, fd, 1e-6) < 1e-5);
  }
}
