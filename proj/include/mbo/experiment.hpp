#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mbo/schemes.hpp"

namespace mbo {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Exit codes shared by every command.
enum ExitCode : int { kExitPass = 0, kExitLedgerFail = 2, kExitConfigError = 3, kExitRuntimeError = 4 };

struct InitSpec {
  std::string kind;  // ball, balls, slab, voronoi, voronoi_ball, dump
  Point center{};
  double radius = 0.0;
  std::vector<Point> centers;
  std::vector<double> radii;
  int axis = 0;
  double offset = 0.0;
  double thickness = 0.0;
  std::vector<Point> seeds;  // explicit Voronoi seeds; random when empty
  double margin = 0.0;
  std::string file;
};

/// f(x, t) = value + rate * t + wave * cos(2 pi x_0 / L_0).
struct ForceSpec {
  double value = 0.0;
  double rate = 0.0;
  double wave = 0.0;
  bool time_independent() const { return rate == 0.0; }
};

struct SweepSpec {
  std::string kind;  // circle_eoc or lambda_scaling
  std::vector<double> hs;
  std::vector<int> ns;
  double time = 0.0;
  double min_order = 0.8;
};

struct ExperimentConfig {
  SchemeKind scheme = SchemeKind::mbo;
  int dim = 2;
  std::vector<int> n;
  double side = 1.0;
  double h = 0.0;
  int steps = 0;
  InitSpec init;
  ForceSpec force;
  int grains = 0;
  std::map<std::pair<int, int>, double> sigma;  // explicit entries, i < j
  double sigma_default = 1.0;
  std::uint64_t seed = 1;
  std::string output_dir = "mbo_out";
  int output_every = 1;  // 0 keeps only the first and last dump
  std::optional<Point> monitor_center;
  std::optional<SweepSpec> sweep;
  std::string source;  // file name for messages

  Grid grid() const;
  Grid grid(int cells) const;  // same box, `cells` per axis
  ForceFunction force_function() const;
  std::optional<SurfaceTensionMatrix> tensions() const;
  SchemeConfig scheme_config() const;
};

/// `key = value` lines, `#` starts a comment. Unknown, duplicate, missing or
/// mistyped keys raise ConfigError with line numbers.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);

/// Initial state described by config.init (reads the dump for init = dump).
State build_initial_state(const ExperimentConfig& config);
State build_initial_state(const ExperimentConfig& config, const Grid& grid);

int cmd_run(const ExperimentConfig& config, std::ostream& out, std::ostream& err);
int cmd_sweep(const ExperimentConfig& config, std::ostream& out, std::ostream& err);
int cmd_check(const std::vector<std::string>& dumps, const std::optional<ExperimentConfig>& config, std::ostream& out,
              std::ostream& err);
int cmd_energy(const std::string& dump, double h, const std::optional<ExperimentConfig>& config, std::ostream& out,
               std::ostream& err);

}  // namespace mbo
