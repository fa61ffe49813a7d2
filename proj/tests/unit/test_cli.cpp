#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "mbo/diagnostics.hpp"
#include "mbo/dump.hpp"
#include "mbo/experiment.hpp"

using namespace mbo;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mbo_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(MBO_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string vp_config(const fs::path& dir, int steps) {
  std::ostringstream os;
  os << "scheme = volume_preserving\nn = 64\nside = 1\nh = 4e-3\nsteps = " << steps
     << "\ninit = balls\ninit.centers = 0.27, 0.5; 0.77, 0.5\ninit.radii = 0.2, 0.12\noutput.dir = " << dir.string() << "\n";
  return os.str();
}

}  // namespace

TEST_CASE("run writes dumps and the ledger") {
  const auto dir = scratch("run");
  std::ostringstream out, err;
  CHECK(cmd_run(parse_config(vp_config(dir / "out", 4)), out, err) == kExitPass);
  CHECK(out.str().find("ledger: PASS") != std::string::npos);
  const std::string csv = slurp(dir / "out" / "ledger.csv");
  CHECK(csv.rfind("n,t,lambda,E_h,D_h,slack,radius\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  for (int k = 0; k <= 4; ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "step_%06d.mbof", k);
    CHECK(fs::exists(dir / "out" / name));
  }

  // same config twice: identical bytes
  std::ostringstream o2, e2;
  CHECK(cmd_run(parse_config(vp_config(dir / "again", 4)), o2, e2) == kExitPass);
  CHECK(slurp(dir / "again" / "ledger.csv") == csv);
  CHECK(slurp(dir / "again" / "step_000004.mbof") == slurp(dir / "out" / "step_000004.mbof"));

  // the stored trajectory audits clean
  std::vector<std::string> dumps;
  for (int k = 0; k <= 4; ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "step_%06d.mbof", k);
    dumps.push_back((dir / "out" / name).string());
  }
  std::ostringstream o3, e3;
  CHECK(cmd_check(dumps, std::nullopt, o3, e3) == kExitPass);
}

TEST_CASE("zero steps writes the initial snapshot only") {
  const auto dir = scratch("zero");
  std::ostringstream out, err;
  CHECK(cmd_run(parse_config(vp_config(dir, 0)), out, err) == kExitPass);
  CHECK(fs::exists(dir / "step_000000.mbof"));
  CHECK_FALSE(fs::exists(dir / "step_000001.mbof"));
  CHECK(slurp(dir / "ledger.csv") == "n,t,lambda,E_h,D_h,slack,radius\n");
}

TEST_CASE("check flags a tampered trajectory") {
  const Grid g = Grid::cube(2, 64);
  const auto dir = scratch("tamper");
  const auto a = rasterize_ball(g, {0.5, 0.5, 0}, 0.25);
  const auto b = shift(a, {6, 0, 0});
  write_dump_file((dir / "a.mbof").string(), a, 4e-3, 0);
  write_dump_file((dir / "b.mbof").string(), b, 4e-3, 1);
  std::ostringstream out, err;
  CHECK(cmd_check({(dir / "a.mbof").string(), (dir / "b.mbof").string()}, std::nullopt, out, err) == kExitLedgerFail);
  CHECK(out.str().find("ledger: FAIL") != std::string::npos);
}

TEST_CASE("energy of a dump") {
  const Grid g = Grid::cube(2, 128);
  const auto dir = scratch("energy");
  const auto slab = rasterize_half_space(g, 0, 0.25, 0.5);
  write_dump_file((dir / "slab.mbof").string(), slab, 0.0, 0);
  std::ostringstream out, err;
  CHECK(cmd_energy((dir / "slab.mbof").string(), 1e-3, std::nullopt, out, err) == kExitPass);
  CHECK(std::stod(out.str()) == doctest::Approx(energy_two_phase(HeatKernelPlan(g, 1e-3), slab)));
}

TEST_CASE("sweep with identical h gives identical rows") {
  const auto dir = scratch("sweep");
  const std::string cfg =
      "scheme = mbo\nn = 64\nside = 1\ninit = ball\ninit.center = 0.5, 0.5\ninit.radius = 0.3\n"
      "sweep.kind = circle_eoc\nsweep.h = 2e-3, 2e-3, 2e-3\nsweep.time = 0.01\noutput.dir = " +
      dir.string() + "\n";
  std::ostringstream out, err;
  cmd_sweep(parse_config(cfg), out, err);
  CHECK(out.str().find("rows identical") != std::string::npos);
  std::ostringstream o2, e2;
  const std::string two = cfg.substr(0, cfg.find("sweep.h")) + "sweep.h = 2e-3, 1e-3\nsweep.time = 0.01\n";
  CHECK(cmd_sweep(parse_config(two), o2, e2) == kExitConfigError);
}

TEST_CASE("exit codes of the executable") {
  const auto dir = scratch("exe");
  {
    std::ofstream(dir / "ok.cfg") << vp_config(dir / "out", 2);
    std::ofstream(dir / "dup.cfg") << vp_config(dir / "out", 2) << "h = 1e-3\n";
    std::ofstream(dir / "sigma.cfg") << "scheme = grain_growth\nn = 64\nside = 1\nh = 1e-3\nsteps = 2\n"
                                        "init = voronoi\ngrains = 2\nsigma.1.2 = 3.5\n";
  }
  CHECK(run_cli("run " + (dir / "ok.cfg").string()) == kExitPass);
  CHECK(run_cli("run " + (dir / "dup.cfg").string()) == kExitConfigError);
  CHECK(run_cli("run " + (dir / "sigma.cfg").string()) == kExitConfigError);
  CHECK(run_cli("run " + (dir / "missing.cfg").string()) == kExitConfigError);
  CHECK(run_cli("frobnicate") == kExitConfigError);

  // truncated dump used to resume a run
  const std::string good = slurp(dir / "out" / "step_000002.mbof");
  std::ofstream(dir / "broken.mbof", std::ios::binary) << good.substr(0, good.size() - 10);
  std::ofstream(dir / "resume.cfg") << "scheme = volume_preserving\nn = 64\nside = 1\nh = 4e-3\nsteps = 2\n"
                                       "init = dump\ninit.file = "
                                    << (dir / "broken.mbof").string() << "\noutput.dir = " << (dir / "r").string()
                                    << "\n";
  CHECK(run_cli("run " + (dir / "resume.cfg").string()) == kExitConfigError);
  CHECK(run_cli("energy " + (dir / "broken.mbof").string() + " --h 1e-3") != 0);
  CHECK(run_cli("energy " + (dir / "out" / "step_000002.mbof").string() + " --h 1e-3") == kExitPass);

  // degenerate input: an empty phase for the volume-preserving step
  std::ofstream(dir / "empty.cfg") << "scheme = volume_preserving\nn = 64\nside = 1\nh = 4e-3\nsteps = 2\n"
                                      "init = ball\ninit.center = 0.5, 0.5\ninit.radius = 0\noutput.dir = "
                                   << (dir / "e").string() << "\n";
  CHECK(run_cli("run " + (dir / "empty.cfg").string()) == kExitRuntimeError);
}
