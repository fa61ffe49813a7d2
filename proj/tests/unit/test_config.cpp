#include "doctest.h"
#include "mbo/experiment.hpp"

using namespace mbo;

namespace {

const char* kMinimal =
    "scheme = mbo\n"
    "n = 64\n"
    "side = 1\n"
    "h = 1e-3\n"
    "steps = 5\n"
    "init = ball\n"
    "init.center = 0.5, 0.5\n"
    "init.radius = 0.25\n";

std::string error_of(const std::string& text) {
  try {
    parse_config(text, "test.cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("minimal config parses") {
  const auto c = parse_config(kMinimal);
  CHECK(c.scheme == SchemeKind::mbo);
  CHECK(c.n == std::vector<int>{64, 64});
  CHECK(c.h == 1e-3);
  CHECK(c.steps == 5);
  CHECK(c.init.radius == 0.25);
  const auto state = build_initial_state(c);
  CHECK(std::get<PhaseField>(state) == rasterize_ball(c.grid(), {0.5, 0.5, 0}, 0.25));
  CHECK(c.scheme_config().grid == Grid::cube(2, 64));
}

TEST_CASE("config errors carry line numbers") {
  const std::string dup = std::string(kMinimal) + "h = 2e-3\n";
  const auto e = error_of(dup);
  CHECK(e.find("duplicate key 'h'") != std::string::npos);
  CHECK(e.find("lines 4 and 9") != std::string::npos);

  CHECK(error_of(std::string(kMinimal) + "colour = red\n").find("test.cfg:9: unknown key") != std::string::npos);
  CHECK(error_of("scheme = mbo\nn = many\n").find("test.cfg:2") != std::string::npos);
  CHECK(error_of("scheme = mbo\n").find("missing required key") != std::string::npos);
  CHECK(error_of(std::string(kMinimal) + "steps2\n").find("expected 'key = value'") != std::string::npos);
}

TEST_CASE("surface tensions are validated while parsing") {
  const std::string grains =
      "scheme = grain_growth\nn = 64\nside = 1\nh = 1e-3\nsteps = 2\ninit = voronoi\ngrains = 2\n"
      "sigma.1.2 = 3.5\n";
  const auto e = error_of(grains);
  CHECK(e.find("sigma_ij < 2") != std::string::npos);
  CHECK(e.find("test.cfg:8") != std::string::npos);

  const auto ok = parse_config(
      "scheme = grain_growth\nn = 64\nside = 1\nh = 1e-3\nsteps = 2\ninit = voronoi\ngrains = 3\nseed = 4\n"
      "sigma.default = 0.9\nsigma.1.3 = 1.1\n");
  const auto t = ok.tensions();
  REQUIRE(t.has_value());
  CHECK((*t)(1, 3) == 1.1);
  CHECK((*t)(2, 3) == 0.9);
  const auto a = build_initial_state(ok), b = build_initial_state(ok);
  CHECK(std::get<MultiPhaseState>(a) == std::get<MultiPhaseState>(b));
  CHECK(std::get<MultiPhaseState>(a).grains == 3);
}

TEST_CASE("force and sweep sections") {
  const auto c = parse_config(
      "scheme = forced\nn = 64\nside = 2\nh = 1e-3\nsteps = 3\ninit = slab\ninit.axis = 1\ninit.offset = 0.5\n"
      "init.thickness = 1\nforce.value = 2\nforce.rate = 10\nforce.wave = 0.5\n");
  const auto f = c.force_function();
  CHECK(f({0.0, 0.3, 0}, 0.1) == doctest::Approx(2 + 1 + 0.5));
  CHECK(f({1.0, 0.3, 0}, 0.0) == doctest::Approx(2 - 0.5));
  CHECK_FALSE(c.force.time_independent());

  const auto s = parse_config(
      "scheme = mbo\nn = 64\nside = 1\ninit = ball\ninit.center = 0.5,0.5\ninit.radius = 0.3\n"
      "sweep.kind = circle_eoc\nsweep.h = 1e-3, 5e-4, 2.5e-4\nsweep.time = 0.01\n");
  REQUIRE(s.sweep.has_value());
  CHECK(s.sweep->hs.size() == 3);
  CHECK(s.sweep->min_order == 0.8);
}
