#include "mbo/dump.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace mbo {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const Grid& grid_of(const State& s) {
  return std::holds_alternative<PhaseField>(s) ? std::get<PhaseField>(s).grid : std::get<MultiPhaseState>(s).grid;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

double parse_double(const std::string& text, int line) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || p != end) {
    throw DumpError("dump line " + std::to_string(line) + ": expected a number, got '" + text + "'");
  }
  return v;
}

long parse_int(const std::string& text, int line) {
  long v = 0;
  const char* end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || p != end) {
    throw DumpError("dump line " + std::to_string(line) + ": expected an integer, got '" + text + "'");
  }
  return v;
}

std::string expect_field(std::istream& in, const std::string& key, int line) {
  std::string text;
  if (!std::getline(in, text)) {
    throw DumpError("dump line " + std::to_string(line) + ": unexpected end of file, expected '" + key + "='");
  }
  const std::string prefix = key + "=";
  if (text.rfind(prefix, 0) != 0) {
    throw DumpError("dump line " + std::to_string(line) + ": expected '" + prefix + "...', got '" + text + "'");
  }
  return text.substr(prefix.size());
}

}  // namespace

void write_dump(std::ostream& out, const State& state, double h, int step) {
  const Grid& g = grid_of(state);
  const int d = g.dim();
  std::string header = "MBOF1\ndim=" + std::to_string(d) + "\nn=";
  for (int a = 0; a < d; ++a) header += (a ? "," : "") + std::to_string(g.cells(a));
  header += "\nside=";
  bool uniform = true;
  for (int a = 1; a < d; ++a) uniform = uniform && g.side(a) == g.side(0);
  for (int a = 0; a < (uniform ? 1 : d); ++a) header += (a ? "," : "") + fmt17(g.side(a));
  const int phases = std::holds_alternative<PhaseField>(state) ? 2 : std::get<MultiPhaseState>(state).grains + 1;
  header += "\nh=" + fmt17(h) + "\nstep=" + std::to_string(step) + "\nphases=" + std::to_string(phases) + "\n\n";
  out << header;
  const auto& bytes = std::holds_alternative<PhaseField>(state) ? std::get<PhaseField>(state).mask
                                                                : std::get<MultiPhaseState>(state).labels;
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void write_dump_file(const std::string& path, const State& state, double h, int step) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DumpError("cannot open '" + path + "' for writing");
  write_dump(out, state, h, step);
  if (!out) throw DumpError("write to '" + path + "' failed");
}

Dump read_dump(std::istream& in) {
  std::string magic;
  if (!std::getline(in, magic) || magic != "MBOF1") throw DumpError("dump line 1: missing 'MBOF1' magic");

  const long dim = parse_int(expect_field(in, "dim", 2), 2);
  if (dim != 2 && dim != 3) throw DumpError("dump line 2: dim must be 2 or 3");
  const auto n_text = split(expect_field(in, "n", 3), ',');
  if (static_cast<long>(n_text.size()) != dim) throw DumpError("dump line 3: need one cell count per axis");
  std::array<int, 3> cells{1, 1, 1};
  for (long a = 0; a < dim; ++a) {
    const long v = parse_int(n_text[a], 3);
    if (v < Grid::kMinCellsPerAxis || v > (1 << 16)) throw DumpError("dump line 3: cell count out of range");
    cells[a] = static_cast<int>(v);
  }
  const auto side_text = split(expect_field(in, "side", 4), ',');
  if (side_text.size() != 1 && static_cast<long>(side_text.size()) != dim) {
    throw DumpError("dump line 4: need one side length or one per axis");
  }
  std::array<double, 3> side{0, 0, 0};
  for (long a = 0; a < dim; ++a) {
    side[a] = parse_double(side_text[side_text.size() == 1 ? 0 : a], 4);
    if (!(side[a] > 0.0)) throw DumpError("dump line 4: side lengths must be positive");
  }
  const double h = parse_double(expect_field(in, "h", 5), 5);
  const long step = parse_int(expect_field(in, "step", 6), 6);
  if (step < 0) throw DumpError("dump line 6: step must be non-negative");
  const long phases = parse_int(expect_field(in, "phases", 7), 7);
  if (phases < 2 || phases > MultiPhaseState::kMaxGrains + 1) throw DumpError("dump line 7: phases out of range");
  std::string blank;
  if (!std::getline(in, blank) || !blank.empty()) throw DumpError("dump line 8: expected a blank line");

  const Grid grid(static_cast<int>(dim), cells, side);
  std::vector<std::uint8_t> bytes(grid.size());
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (static_cast<std::size_t>(in.gcount()) != bytes.size()) {
    throw DumpError("dump body: expected " + std::to_string(bytes.size()) + " cells, found " +
                    std::to_string(in.gcount()));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw DumpError("dump body: trailing bytes after the last cell");
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    if (bytes[i] >= phases) {
      throw DumpError("dump body: cell " + std::to_string(i) + " has label " + std::to_string(bytes[i]) +
                      " but phases=" + std::to_string(phases));
    }
  }

  Dump out{PhaseField(grid), h, static_cast<int>(step)};
  if (phases == 2) {
    std::get<PhaseField>(out.state).mask = std::move(bytes);
  } else {
    MultiPhaseState s(grid, static_cast<int>(phases - 1));
    s.labels = std::move(bytes);
    out.state = std::move(s);
  }
  return out;
}

Dump read_dump_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DumpError("cannot open '" + path + "'");
  try {
    return read_dump(in);
  } catch (const DumpError& e) {
    throw DumpError(path + ": " + e.what());
  }
}

MultiPhaseState as_multiphase(const State& state) {
  if (std::holds_alternative<MultiPhaseState>(state)) return std::get<MultiPhaseState>(state);
  const PhaseField& f = std::get<PhaseField>(state);
  MultiPhaseState s(f.grid, 1);
  s.labels = f.mask;
  return s;
}

}  // namespace mbo
