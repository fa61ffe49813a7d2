#include <cmath>
#include <cstdlib>
#include <numbers>
#include <random>

#include "doctest.h"
#include "mbo/kernel.hpp"
#include "oracle_kernel.hpp"

using namespace mbo;

namespace {

RealField random_field(const Grid& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RealField f(g);
  for (auto& v : f.values) v = u(rng);
  return f;
}

double dot(const RealField& a, const RealField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) s += a.values[i] * b.values[i];
  return s;
}

}  // namespace

TEST_CASE("constants are preserved exactly") {
  for (int dim : {2, 3}) {
    const Grid g = Grid::cube(dim, 16);
    HeatKernelPlan plan(g, 0.003);
    const auto out = convolve(plan, PhaseField(g, 1));
    for (double v : out.values) REQUIRE(v == 1.0);
    const auto raw = convolve(plan, RealField(g, 1.0));
    for (double v : raw.values) REQUIRE(v == 1.0);
    for (const auto& c : grad_convolve(plan, RealField(g, 1.0))) {
      for (double v : c.values) REQUIRE(v == 0.0);
    }
  }
}

TEST_CASE("single cell matches the periodic image sum") {
  const Grid g = Grid::cube(2, 64);
  const double h = 0.01;
  HeatKernelPlan plan(g, h);
  RealField delta(g);
  const std::size_t c = g.index({20, 40, 0});
  delta.values[c] = 1.0;
  const auto out = convolve(plan, delta);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto p = g.cell_center(i), q = g.cell_center(c);
    const double ref = oracle::periodic_gaussian(g, {p[0] - q[0], p[1] - q[1], 0}, h) * g.cell_volume();
    worst = std::max(worst, std::abs(out.values[i] - ref));
  }
  CHECK(worst < 1e-14);
}

TEST_CASE("ball center value") {
  const Grid g = Grid::cube(2, 512);
  const double dx = g.dx(0);
  const double r = 0.2, h = 0.01;
  const Point c{0.5 + dx / 2, 0.5 + dx / 2, 0};
  const auto ball = rasterize_ball(g, c, r);
  HeatKernelPlan plan(g, h);
  const auto phi = convolve(plan, ball);
  const double at_center = phi.values[g.index({256, 256, 0})];
  CHECK(std::abs(at_center - (1 - std::exp(-1.0))) < 1e-3);
}

TEST_CASE("flat interface sits at one half") {
  const Grid g = Grid::cube(2, 256);
  HeatKernelPlan plan(g, 1e-3);
  const auto slab = rasterize_half_space(g, 0, 0.25, 0.5);
  const auto phi = convolve(plan, slab);
  // cells 63 and 64 straddle the interface at x = 0.25
  const double left = phi.values[g.index({63, 10, 0})];
  const double right = phi.values[g.index({64, 10, 0})];
  CHECK(left + right == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(0.5 * (left + right) - 0.5) < g.dx(0));
}

TEST_CASE("gradient peak at a flat interface") {
  const Grid g = Grid::cube(2, 1024);
  const double h = 1e-3;
  HeatKernelPlan plan(g, h);
  const auto grad = grad_convolve(plan, rasterize_half_space(g, 0, 0.25, 0.5));
  double peak = 0.0;
  std::size_t at = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (std::abs(grad[0].values[i]) > peak) {
      peak = std::abs(grad[0].values[i]);
      at = i;
    }
  }
  const double expected = 1.0 / std::sqrt(4 * std::numbers::pi * h);
  CHECK(expected == doctest::Approx(8.921).epsilon(1e-3));
  CHECK(peak == doctest::Approx(expected).epsilon(0.02));
  const double x = g.cell_center(at)[0];
  CHECK((std::abs(x - 0.25) < 2 * g.dx(0) || std::abs(x - 0.75) < 2 * g.dx(0)));
  // rises into the slab at 0.25, falls at 0.75; no y-component
  CHECK(grad[0].values[g.index({256, 7, 0})] > 0);
  CHECK(grad[0].values[g.index({767, 7, 0})] < 0);
  CHECK(grad[0].values[g.index({255, 7, 0})] == doctest::Approx(-grad[0].values[g.index({768, 7, 0})]));
  double ymax = 0.0;
  for (double v : grad[1].values) ymax = std::max(ymax, std::abs(v));
  CHECK(ymax < 1e-10);
}

TEST_CASE("self-adjoint, semigroup, mass preserving") {
  const Grid g(2, {32, 24, 1}, {1.0, 0.75, 0});
  const auto u = random_field(g, 1), v = random_field(g, 2);
  HeatKernelPlan plan(g, 2e-3), twice(g, 4e-3);
  CHECK(dot(convolve(plan, u), v) == doctest::Approx(dot(u, convolve(plan, v))).epsilon(1e-12));
  const auto gg = convolve(plan, convolve(plan, u));
  const auto g2 = convolve(twice, u);
  for (std::size_t i = 0; i < g.size(); ++i) REQUIRE(gg.values[i] == doctest::Approx(g2.values[i]).epsilon(1e-10));
  double su = 0.0, sg = 0.0;
  const auto gu = convolve(plan, u);
  for (std::size_t i = 0; i < g.size(); ++i) {
    su += u.values[i];
    sg += gu.values[i];
  }
  CHECK(sg == doctest::Approx(su).epsilon(1e-10));
  // positive semi-definite
  CHECK(dot(convolve(plan, u), u) >= 0.0);
}

TEST_CASE("gradient of a sine is exact") {
  const Grid g = Grid::cube(2, 32);
  const double h = 1e-3;
  HeatKernelPlan plan(g, h);
  RealField u(g);
  const double k = 2 * std::numbers::pi * 3;
  for (std::size_t i = 0; i < g.size(); ++i) u.values[i] = std::sin(k * g.cell_center(i)[1]);
  const auto s = convolve_with_gradient(plan, u);
  const double damp = std::exp(-h * k * k);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double y = g.cell_center(i)[1];
    REQUIRE(s.value.values[i] == doctest::Approx(damp * std::sin(k * y)).epsilon(1e-10));
    REQUIRE(s.gradient[1].values[i] == doctest::Approx(damp * k * std::cos(k * y)).epsilon(1e-10));
    REQUIRE(std::abs(s.gradient[0].values[i]) < 1e-10);
  }
  const auto plain = spectral_gradient(g, u);
  for (std::size_t i = 0; i < g.size(); ++i) {
    REQUIRE(plain[1].values[i] == doctest::Approx(k * std::cos(k * g.cell_center(i)[1])).epsilon(1e-10));
  }
}

TEST_CASE("clamping applies to indicators only") {
  const Grid g = Grid::cube(2, 64);
  HeatKernelPlan plan(g, 1e-4);
  const auto ball = rasterize_ball(g, {0.5, 0.5, 0}, 0.2);
  double excess = -1.0;
  const auto phi = convolve(plan, ball, &excess);
  CHECK(excess >= 0.0);
  for (double v : phi.values) REQUIRE((v >= 0.0 && v <= 1.0));
  const auto raw = convolve(plan, RealField::from(ball));
  double lo = 0.0, hi = 1.0;
  for (double v : raw.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(std::max(-lo, hi - 1.0) == doctest::Approx(excess));
}

TEST_CASE("convolve_many is deterministic across thread counts") {
  const Grid g = Grid::cube(3, 16);
  HeatKernelPlan plan(g, 2e-3);
  std::vector<RealField> in;
  for (unsigned s = 0; s < 5; ++s) in.push_back(random_field(g, s));
  setenv("MBO_THREADS", "1", 1);
  CHECK(parallel_threads() == 1);
  const auto serial = convolve_many(plan, in);
  setenv("MBO_THREADS", "4", 1);
  const auto parallel = convolve_many(plan, in);
  unsetenv("MBO_THREADS");
  for (std::size_t f = 0; f < in.size(); ++f) {
    CHECK(serial[f].values == parallel[f].values);
    CHECK(serial[f].values == convolve(plan, in[f]).values);
  }
}

TEST_CASE("plan validation") {
  const Grid g = Grid::cube(2, 64);
  CHECK_THROWS_AS(HeatKernelPlan(g, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(HeatKernelPlan(g, -1.0), std::invalid_argument);
  CHECK(HeatKernelPlan(g, 1e-2).well_resolved());
  CHECK_FALSE(HeatKernelPlan(g, 1e-3).well_resolved());
  HeatKernelPlan plan(g, 1e-3);
  CHECK_THROWS_AS(convolve(plan, RealField(Grid::cube(2, 32))), GridMismatch);
  CHECK(plan.multipliers()[0] == 1.0);
  CHECK(plan.spectrum_size() == 33 * 64);
}
