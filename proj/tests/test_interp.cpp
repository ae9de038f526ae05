#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "pinnflow/errors.hpp"
#include "pinnflow/interp.hpp"
#include "pinnflow/rng.hpp"

using namespace pinnflow;
using namespace pinnflow::interp;

namespace {

GriddedField make_field(Vec2 origin, double dx, int nx, int ny,
                        const std::function<double(Vec2)>& fu) {
  GriddedField f;
  f.grid = {origin, dx, nx, ny};
  f.arrangement = sampling::Arrangement::NodeCentered;
  f.allocate();
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const Vec2 p = f.pos(i, j);
      f.u[f.index(i, j)] = fu(p);
      f.v[f.index(i, j)] = 2.0 * fu(p);
      f.p[f.index(i, j)] = -fu(p);
    }
  }
  return f;
}

}  // namespace

TEST_CASE("kernel values and continuity (corrected form)") {
  CHECK(kernel_phi(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(kernel_phi(2.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(kernel_phi(2.5) == 0.0);
  CHECK(kernel_phi(-3.0) == 0.0);
  // Both branches meet at |r| = 1 with value 1/4.
  CHECK(kernel_phi(1.0 - 1e-13) == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(kernel_phi(1.0 + 1e-13) == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(std::abs(kernel_phi(std::nextafter(1.0, 0.0)) -
                 kernel_phi(std::nextafter(1.0, 2.0))) < 1e-12);
  CHECK(std::abs(kernel_phi(std::nextafter(2.0, 0.0)) - 0.0) < 1e-12);
}

TEST_CASE("printed-form kernel keeps the documented discontinuity") {
  CHECK(kernel_phi(0.5, KernelForm::AsPrinted) == doctest::Approx(0.5));
  CHECK(kernel_phi(std::nextafter(1.0, 0.0), KernelForm::AsPrinted) ==
        doctest::Approx(0.5));
  CHECK(kernel_phi(std::nextafter(1.0, 2.0), KernelForm::AsPrinted) ==
        doctest::Approx(0.25).epsilon(1e-6));
}

TEST_CASE("kernel symmetry and nonnegativity") {
  for (int i = 0; i <= 400; ++i) {
    const double r = -2.0 + 4.0 * i / 400;
    CHECK(kernel_phi(r) >= 0.0);
    CHECK(kernel_phi(r) == doctest::Approx(kernel_phi(-r)).epsilon(1e-15));
  }
}

TEST_CASE("interpolation: node-exact, constants, weight normalization") {
  const auto f = make_field({0, 0}, 0.1, 21, 21, [](Vec2) { return 3.5; });
  // Node coincidence.
  const auto at_node = interpolate(f, f.pos(7, 9), 0.1);
  CHECK(at_node[0] == doctest::Approx(3.5).epsilon(1e-14));
  // Constant reproduction anywhere (partition of unity after normalization).
  Rng rng(5);
  for (int k = 0; k < 200; ++k) {
    const Vec2 q{rng.uniform(0.1, 1.9), rng.uniform(0.1, 1.9)};
    const auto v = interpolate(f, q, 0.1);
    CHECK(v[0] == doctest::Approx(3.5).epsilon(1e-13));
    CHECK(v[1] == doctest::Approx(7.0).epsilon(1e-13));
  }
}

TEST_CASE("bilinear fields are reproduced to 1e-10") {
  const auto f = make_field({0, 0}, 0.05, 41, 41,
                            [](Vec2 p) { return 2.0 * p.x + 3.0 * p.y; });
  Rng rng(17);
  double worst = 0;
  for (int k = 0; k < 1000; ++k) {
    const Vec2 q{rng.uniform(0.15, 1.85), rng.uniform(0.15, 1.85)};
    const auto v = interpolate(f, q, 0.05);
    worst = std::max(worst, std::abs(v[0] - (2.0 * q.x + 3.0 * q.y)));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("smooth-field error decreases at order >= 2") {
  const auto test_field = [](double h) {
    const int n = static_cast<int>(std::round(2.0 / h)) + 1;
    const auto f = make_field({0, 0}, h, n, n,
                              [](Vec2 p) { return std::sin(p.x) * std::cos(p.y); });
    Rng rng(3);
    double worst = 0;
    for (int k = 0; k < 500; ++k) {
      const Vec2 q{rng.uniform(0.3, 1.7), rng.uniform(0.3, 1.7)};
      const auto v = interpolate(f, q, h);
      worst = std::max(worst, std::abs(v[0] - std::sin(q.x) * std::cos(q.y)));
    }
    return worst;
  };
  const double e1 = test_field(0.1);
  const double e2 = test_field(0.05);
  const double e3 = test_field(0.025);
  const double slope1 = std::log2(e1 / e2);
  const double slope2 = std::log2(e2 / e3);
  CHECK(slope1 >= 1.9);
  CHECK(slope2 >= 1.9);
}

TEST_CASE("masked nodes are excluded and weights renormalized") {
  auto f = make_field({0, 0}, 0.1, 21, 21, [](Vec2) { return 1.0; });
  // Poison the masked region; results must not see it.
  for (int j = 0; j < 21; ++j) {
    for (int i = 11; i < 21; ++i) {
      f.mask[f.index(i, j)] = 0;
      f.u[f.index(i, j)] = 1e9;
    }
  }
  const auto v = interpolate(f, {1.04, 0.77}, 0.1);  // support straddles the mask
  CHECK(v[0] == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("no-support and out-of-range queries raise errors") {
  auto f = make_field({0, 0}, 0.1, 5, 5, [](Vec2) { return 1.0; });
  CHECK_THROWS_AS(interpolate(f, {10.0, 10.0}, 0.1), InterpSupportError);
  for (auto& m : f.mask) m = 0;
  CHECK_THROWS_AS(interpolate(f, {0.2, 0.2}, 0.1), InterpSupportError);
  CHECK_THROWS_AS(interpolate(f, {std::nan(""), 0.2}, 0.1), InvalidArgumentError);
}
