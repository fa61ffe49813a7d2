#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "mbo/dump.hpp"
#include "mbo/experiment.hpp"

namespace mbo {

namespace {

struct Entry {
  std::string value;
  int line = 0;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "scheme",       "dim",         "n",           "side",        "h",           "steps",
      "init",         "init.center", "init.radius", "init.centers", "init.radii", "init.axis",
      "init.offset",  "init.thickness", "init.seeds", "init.margin", "init.file", "force.value",
      "force.rate",   "force.wave",  "grains",      "sigma.default", "seed",     "output.dir",
      "output.every", "monitor.center", "sweep.kind", "sweep.h",    "sweep.n",    "sweep.time",
      "sweep.min_order"};
  return keys;
}

// sigma.<i>.<j>
bool parse_sigma_key(const std::string& key, int& i, int& j) {
  if (key.rfind("sigma.", 0) != 0 || key == "sigma.default") return false;
  const std::string rest = key.substr(6);
  const auto dot = rest.find('.');
  if (dot == std::string::npos) return false;
  const std::string a = rest.substr(0, dot), b = rest.substr(dot + 1);
  auto ok = [](const std::string& s, int& v) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return !s.empty() && ec == std::errc() && p == s.data() + s.size();
  };
  return ok(a, i) && ok(b, j);
}

class Reader {
 public:
  Reader(std::map<std::string, Entry> entries, std::string source)
      : entries_(std::move(entries)), source_(std::move(source)) {}

  bool has(const std::string& key) const { return entries_.count(key) > 0; }
  int line(const std::string& key) const { return entries_.at(key).line; }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    throw ConfigError(source_ + ":" + std::to_string(line(key)) + ": " + key + ": " + msg);
  }
  [[noreturn]] void missing(const std::string& key, const std::string& why = "") const {
    throw ConfigError(source_ + ": missing required key '" + key + "'" + (why.empty() ? "" : " (" + why + ")"));
  }

  const std::string& raw(const std::string& key) const {
    if (!has(key)) missing(key);
    return entries_.at(key).value;
  }

  double number(const std::string& key) const { return to_double(key, raw(key)); }
  double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

  long integer(const std::string& key) const { return to_long(key, raw(key)); }
  long integer(const std::string& key, long fallback) const { return has(key) ? integer(key) : fallback; }

  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    for (const auto& part : split(raw(key), ',')) out.push_back(to_double(key, part));
    return out;
  }

  std::vector<long> integers(const std::string& key) const {
    std::vector<long> out;
    for (const auto& part : split(raw(key), ',')) out.push_back(to_long(key, part));
    return out;
  }

  Point point(const std::string& key, int dim) const { return to_point(key, raw(key), dim); }

  std::vector<Point> points(const std::string& key, int dim) const {
    std::vector<Point> out;
    for (const auto& part : split(raw(key), ';')) out.push_back(to_point(key, part, dim));
    return out;
  }

 private:
  static std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(trim(cur));
    return out;
  }

  double to_double(const std::string& key, const std::string& text) const {
    double v = 0.0;
    const std::string t = trim(text);
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || p != t.data() + t.size() || !std::isfinite(v)) {
      fail(key, "expected a number, got '" + text + "'");
    }
    return v;
  }

  long to_long(const std::string& key, const std::string& text) const {
    long v = 0;
    const std::string t = trim(text);
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || p != t.data() + t.size()) {
      fail(key, "expected an integer, got '" + text + "'");
    }
    return v;
  }

  Point to_point(const std::string& key, const std::string& text, int dim) const {
    const auto parts = split(text, ',');
    if (static_cast<int>(parts.size()) != dim) {
      fail(key, "expected " + std::to_string(dim) + " coordinates, got '" + text + "'");
    }
    Point p{0, 0, 0};
    for (int a = 0; a < dim; ++a) p[a] = to_double(key, parts[a]);
    return p;
  }

  std::map<std::string, Entry> entries_;
  std::string source_;
};

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  std::map<std::string, Entry> entries;
  std::istringstream in(text);
  std::string raw_line;
  int line_no = 0;
  while (std::getline(in, raw_line)) {
    ++line_no;
    const auto hash = raw_line.find('#');
    const std::string line = trim(hash == std::string::npos ? raw_line : raw_line.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": expected 'key = value', got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    int si = 0, sj = 0;
    if (!known_keys().count(key) && !parse_sigma_key(key, si, sj)) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (value.empty()) throw ConfigError(source + ":" + std::to_string(line_no) + ": key '" + key + "' has no value");
    if (auto it = entries.find(key); it != entries.end()) {
      throw ConfigError(source + ": duplicate key '" + key + "' on lines " + std::to_string(it->second.line) +
                        " and " + std::to_string(line_no));
    }
    entries[key] = {value, line_no};
  }

  const Reader r(entries, source);
  ExperimentConfig c;
  c.source = source;

  try {
    c.scheme = scheme_kind_from_string(r.raw("scheme"));
  } catch (const std::invalid_argument& e) {
    r.fail("scheme", e.what());
  }
  c.dim = static_cast<int>(r.integer("dim", 2));
  if (c.dim != 2 && c.dim != 3) r.fail("dim", "must be 2 or 3");
  for (long v : r.integers("n")) {
    if (v < Grid::kMinCellsPerAxis || v > (1 << 15)) r.fail("n", "cell counts must lie in [8, 32768]");
    c.n.push_back(static_cast<int>(v));
  }
  if (c.n.size() == 1) c.n.assign(c.dim, c.n[0]);
  if (static_cast<int>(c.n.size()) != c.dim) r.fail("n", "give one cell count or one per axis");
  c.side = r.number("side");
  if (!(c.side > 0.0)) r.fail("side", "must be positive");

  if (r.has("sweep.kind")) {
    SweepSpec s;
    s.kind = r.raw("sweep.kind");
    if (s.kind != "circle_eoc" && s.kind != "lambda_scaling") {
      r.fail("sweep.kind", "expected circle_eoc or lambda_scaling");
    }
    if (r.has("sweep.h")) s.hs = r.numbers("sweep.h");
    if (r.has("sweep.n")) {
      for (long v : r.integers("sweep.n")) {
        if (v < Grid::kMinCellsPerAxis) r.fail("sweep.n", "cell counts must be at least 8");
        s.ns.push_back(static_cast<int>(v));
      }
    }
    for (double h : s.hs) {
      if (!(h > 0.0)) r.fail("sweep.h", "time steps must be positive");
    }
    s.time = r.number("sweep.time");
    if (!(s.time > 0.0)) r.fail("sweep.time", "must be positive");
    s.min_order = r.number("sweep.min_order", 0.8);
    c.sweep = s;
  }
  const bool sweeping = c.sweep.has_value();
  c.h = (sweeping && !r.has("h")) ? 0.0 : r.number("h");
  if (!sweeping && !(c.h > 0.0)) r.fail("h", "must be positive");
  c.steps = static_cast<int>((sweeping && !r.has("steps")) ? 0 : r.integer("steps"));
  if (c.steps < 0) r.fail("steps", "must be non-negative");

  InitSpec& init = c.init;
  init.kind = r.raw("init");
  const bool multi = c.scheme == SchemeKind::grain_growth;
  if (init.kind == "ball") {
    init.center = r.point("init.center", c.dim);
    init.radius = r.number("init.radius");
  } else if (init.kind == "balls") {
    init.centers = r.points("init.centers", c.dim);
    init.radii = r.numbers("init.radii");
    if (init.radii.size() != init.centers.size()) r.fail("init.radii", "need one radius per center");
  } else if (init.kind == "slab") {
    init.axis = static_cast<int>(r.integer("init.axis"));
    if (init.axis < 0 || init.axis >= c.dim) r.fail("init.axis", "axis out of range");
    init.offset = r.number("init.offset");
    init.thickness = r.number("init.thickness");
  } else if (init.kind == "voronoi" || init.kind == "voronoi_ball") {
    if (r.has("init.seeds")) init.seeds = r.points("init.seeds", c.dim);
    init.margin = r.number("init.margin", 0.0);
    if (init.kind == "voronoi_ball") {
      init.center = r.point("init.center", c.dim);
      init.radius = r.number("init.radius");
    }
  } else if (init.kind == "dump") {
    init.file = r.raw("init.file");
  } else {
    r.fail("init", "expected ball, balls, slab, voronoi, voronoi_ball or dump");
  }
  const bool grain_init = init.kind == "voronoi" || init.kind == "voronoi_ball";
  if (multi && !(grain_init || init.kind == "dump")) r.fail("init", "grain growth needs voronoi, voronoi_ball or dump");
  if (!multi && grain_init) r.fail("init", "voronoi initial data needs scheme = grain_growth");

  c.seed = static_cast<std::uint64_t>(r.integer("seed", 1));
  if (r.has("grains")) {
    c.grains = static_cast<int>(r.integer("grains"));
    if (c.grains < 1 || c.grains > MultiPhaseState::kMaxGrains) r.fail("grains", "must lie in [1, 255]");
  } else if (grain_init && !init.seeds.empty()) {
    c.grains = static_cast<int>(init.seeds.size());
  } else if (grain_init) {
    r.missing("grains", "random Voronoi seeds need a grain count");
  }
  if (!init.seeds.empty() && static_cast<int>(init.seeds.size()) != c.grains) {
    r.fail("init.seeds", "seed count differs from grains");
  }

  if (r.has("force.value") || r.has("force.rate") || r.has("force.wave")) {
    if (c.scheme != SchemeKind::forced) {
      throw ConfigError(source + ": force.* keys need scheme = forced");
    }
  }
  c.force.value = r.number("force.value", 0.0);
  c.force.rate = r.number("force.rate", 0.0);
  c.force.wave = r.number("force.wave", 0.0);

  c.sigma_default = r.number("sigma.default", 1.0);
  std::vector<int> sigma_lines;
  for (const auto& [key, entry] : entries) {
    int i = 0, j = 0;
    if (!parse_sigma_key(key, i, j)) continue;
    if (!multi) r.fail(key, "surface tensions need scheme = grain_growth");
    if (i == j) r.fail(key, "diagonal tensions are fixed at 0");
    if (i < 1 || j < 1 || (c.grains > 0 && (i > c.grains || j > c.grains))) {
      r.fail(key, "grain labels must lie in 1..grains");
    }
    const auto pair = std::make_pair(std::min(i, j), std::max(i, j));
    const double v = r.number(key);
    if (auto it = c.sigma.find(pair); it != c.sigma.end() && it->second != v) {
      r.fail(key, "conflicts with the symmetric entry");
    }
    c.sigma[pair] = v;
    sigma_lines.push_back(entry.line);
  }
  if (multi && c.grains > 0) {
    try {
      c.tensions();
    } catch (const InadmissibleTensions& e) {
      std::string where;
      std::sort(sigma_lines.begin(), sigma_lines.end());
      for (int l : sigma_lines) where += (where.empty() ? "" : ", ") + std::to_string(l);
      throw ConfigError(source + (where.empty() ? "" : ":" + where) + ": " + e.what());
    }
  }

  c.output_dir = r.has("output.dir") ? r.raw("output.dir") : c.output_dir;
  c.output_every = static_cast<int>(r.integer("output.every", 1));
  if (c.output_every < 0) r.fail("output.every", "must be non-negative");
  if (r.has("monitor.center")) c.monitor_center = r.point("monitor.center", c.dim);

  try {
    (void)c.grid();
  } catch (const std::exception& e) {
    throw ConfigError(source + ": invalid grid: " + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

Grid ExperimentConfig::grid() const {
  std::array<int, 3> cells{1, 1, 1};
  std::array<double, 3> sides{0, 0, 0};
  for (int a = 0; a < dim; ++a) {
    cells[a] = n[a];
    sides[a] = side;
  }
  return Grid(dim, cells, sides);
}

Grid ExperimentConfig::grid(int cells) const { return Grid::cube(dim, cells, side); }

ForceFunction ExperimentConfig::force_function() const {
  const ForceSpec f = force;
  const double length = side;
  return [f, length](const Point& x, double t) {
    return f.value + f.rate * t + f.wave * std::cos(2.0 * std::numbers::pi * x[0] / length);
  };
}

std::optional<SurfaceTensionMatrix> ExperimentConfig::tensions() const {
  if (scheme != SchemeKind::grain_growth || grains < 1) return std::nullopt;
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(grains, grains, sigma_default);
  m.diagonal().setZero();
  for (const auto& [pair, v] : sigma) {
    if (pair.second > grains) throw InadmissibleTensions("surface tensions: label exceeds the grain count");
    m(pair.first - 1, pair.second - 1) = v;
    m(pair.second - 1, pair.first - 1) = v;
  }
  return SurfaceTensionMatrix(std::move(m));
}

SchemeConfig ExperimentConfig::scheme_config() const {
  SchemeConfig s;
  s.kind = scheme;
  s.h = h;
  s.steps = steps;
  s.grid = grid();
  if (scheme == SchemeKind::forced) {
    s.force = force_function();
    s.force_time_independent = force.time_independent();
  }
  s.tensions = tensions();
  s.monitor_center = monitor_center;
  return s;
}

State build_initial_state(const ExperimentConfig& c) { return build_initial_state(c, c.grid()); }

State build_initial_state(const ExperimentConfig& c, const Grid& grid) {
  const InitSpec& init = c.init;
  if (init.kind == "ball") return rasterize_ball(grid, init.center, init.radius);
  if (init.kind == "balls") {
    PhaseField out(grid);
    for (std::size_t k = 0; k < init.centers.size(); ++k) {
      const PhaseField b = rasterize_ball(grid, init.centers[k], init.radii[k]);
      for (std::size_t i = 0; i < out.mask.size(); ++i) out.mask[i] |= b.mask[i];
    }
    return out;
  }
  if (init.kind == "slab") return rasterize_half_space(grid, init.axis, init.offset, init.thickness);
  if (init.kind == "dump") {
    Dump d = [&] {
      try {
        return read_dump_file(init.file);
      } catch (const DumpError& e) {
        throw ConfigError(std::string("init.file: ") + e.what());
      }
    }();
    const Grid& g = std::holds_alternative<PhaseField>(d.state) ? std::get<PhaseField>(d.state).grid
                                                                 : std::get<MultiPhaseState>(d.state).grid;
    if (g != grid) throw ConfigError("init.file: dump grid does not match the configured grid");
    if (c.scheme == SchemeKind::grain_growth) {
      MultiPhaseState s = as_multiphase(d.state);
      if (c.grains > 0 && s.grains != c.grains) throw ConfigError("init.file: grain count differs from 'grains'");
      return s;
    }
    if (!std::holds_alternative<PhaseField>(d.state)) throw ConfigError("init.file: multiphase dump for a two-phase scheme");
    return d.state;
  }

  std::vector<Point> seeds = init.seeds;
  if (seeds.empty()) {
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    while (static_cast<int>(seeds.size()) < c.grains) {
      Point p{0, 0, 0};
      for (int a = 0; a < grid.dim(); ++a) p[a] = unit(rng) * grid.side(a);
      if (init.kind == "voronoi_ball" && grid.periodic_distance(p, init.center) >= init.radius) continue;
      seeds.push_back(p);
    }
  }
  if (init.kind == "voronoi") return voronoi_labels(grid, seeds, init.margin);
  return voronoi_labels_in_ball(grid, seeds, init.center, init.radius);
}

}  // namespace mbo
