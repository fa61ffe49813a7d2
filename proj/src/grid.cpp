#include "mbo/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mbo {

Grid::Grid(int dim, std::array<int, 3> cells, std::array<double, 3> side)
    : dim_(dim), cells_(cells), side_(side), size_(1), cell_volume_(1.0) {
  if (dim != 2 && dim != 3) {
    throw std::invalid_argument("Grid: dim must be 2 or 3");
  }
  for (int a = 0; a < 3; ++a) {
    if (a >= dim) {
      cells_[a] = 1;
      side_[a] = 0.0;
      continue;
    }
    if (cells_[a] < kMinCellsPerAxis) {
      throw std::invalid_argument("Grid: need at least 8 cells per axis");
    }
    if (!(side_[a] > 0.0) || !std::isfinite(side_[a])) {
      throw std::invalid_argument("Grid: side length must be positive and finite");
    }
    size_ *= static_cast<std::size_t>(cells_[a]);
    cell_volume_ *= side_[a] / cells_[a];
  }
}

Grid Grid::cube(int dim, int cells, double side) {
  return Grid(dim, {cells, cells, dim == 3 ? cells : 1}, {side, side, dim == 3 ? side : 0.0});
}

double Grid::min_side() const {
  double m = side_[0];
  for (int a = 1; a < dim_; ++a) m = std::min(m, side_[a]);
  return m;
}

Point Grid::center() const { return {side_[0] / 2, side_[1] / 2, side_[2] / 2}; }

double Grid::max_dx() const {
  double m = 0.0;
  for (int a = 0; a < dim_; ++a) m = std::max(m, dx(a));
  return m;
}

std::array<int, 3> Grid::coords(std::size_t idx) const {
  std::array<int, 3> c{0, 0, 0};
  c[0] = static_cast<int>(idx % cells_[0]);
  idx /= cells_[0];
  c[1] = static_cast<int>(idx % cells_[1]);
  c[2] = static_cast<int>(idx / cells_[1]);
  return c;
}

std::size_t Grid::index(std::array<int, 3> c) const {
  std::size_t idx = 0;
  for (int a = 2; a >= 0; --a) {
    int v = c[a] % cells_[a];
    if (v < 0) v += cells_[a];
    idx = idx * cells_[a] + static_cast<std::size_t>(v);
  }
  return idx;
}

Point Grid::cell_center(std::size_t idx) const {
  const auto c = coords(idx);
  Point p{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a) p[a] = (c[a] + 0.5) * dx(a);
  return p;
}

Point Grid::periodic_delta(const Point& a, const Point& b) const {
  Point d{0.0, 0.0, 0.0};
  for (int k = 0; k < dim_; ++k) {
    double v = std::fmod(b[k] - a[k], side_[k]);
    if (v > 0.5 * side_[k]) v -= side_[k];
    if (v < -0.5 * side_[k]) v += side_[k];
    d[k] = v;
  }
  return d;
}

double Grid::periodic_distance(const Point& a, const Point& b) const {
  const Point d = periodic_delta(a, b);
  return std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
}

bool Grid::operator==(const Grid& other) const {
  return dim_ == other.dim_ && cells_ == other.cells_ && side_ == other.side_;
}

void require_same_grid(const Grid& a, const Grid& b, const char* where) {
  if (a != b) throw GridMismatch(std::string(where) + ": grid mismatch");
}

std::size_t PhaseField::count() const {
  std::size_t n = 0;
  for (auto v : mask) n += v;
  return n;
}

RealField RealField::from(const PhaseField& field) {
  RealField r(field.grid);
  for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] = field.mask[i];
  return r;
}

MultiPhaseState::MultiPhaseState(const Grid& g, int grains_, std::uint8_t fill)
    : grid(g), labels(g.size(), fill), grains(grains_) {
  if (grains < 1 || grains > kMaxGrains) {
    throw std::invalid_argument("MultiPhaseState: grain count must be in [1, 255]");
  }
  if (fill > grains) throw std::invalid_argument("MultiPhaseState: fill label out of range");
}

std::size_t MultiPhaseState::solid_count() const {
  std::size_t n = 0;
  for (auto l : labels) n += (l != 0);
  return n;
}

std::size_t MultiPhaseState::count(int label) const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
}

PhaseField MultiPhaseState::indicator(int label) const {
  PhaseField f(grid);
  for (std::size_t i = 0; i < labels.size(); ++i) f.mask[i] = (labels[i] == label);
  return f;
}

PhaseField MultiPhaseState::solid() const {
  PhaseField f(grid);
  for (std::size_t i = 0; i < labels.size(); ++i) f.mask[i] = (labels[i] != 0);
  return f;
}

namespace {

void check_center(const Grid& grid, const Point& center) {
  for (int a = 0; a < grid.dim(); ++a) {
    if (!(center[a] >= 0.0 && center[a] <= grid.side(a))) {
      throw std::invalid_argument("center must lie inside the torus box");
    }
  }
}

}  // namespace

PhaseField rasterize_ball(const Grid& grid, const Point& center, double radius) {
  if (!(radius >= 0.0)) throw std::invalid_argument("rasterize_ball: negative radius");
  if (radius >= 0.5 * grid.min_side()) {
    throw std::invalid_argument("rasterize_ball: radius must be below half the side length");
  }
  check_center(grid, center);
  PhaseField f(grid);
  const double r2 = radius * radius;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point d = grid.periodic_delta(center, grid.cell_center(i));
    f.mask[i] = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2] < r2);
  }
  return f;
}

PhaseField rasterize_half_space(const Grid& grid, int axis, double offset, double thickness,
                                int sign) {
  if (axis < 0 || axis >= grid.dim()) throw std::invalid_argument("rasterize_half_space: bad axis");
  const double side = grid.side(axis);
  if (!(offset >= 0.0 && offset < side)) {
    throw std::invalid_argument("rasterize_half_space: offset outside [0, side)");
  }
  if (!(thickness >= 0.0 && thickness <= side)) {
    throw std::invalid_argument("rasterize_half_space: thickness outside [0, side]");
  }
  if (sign != 1 && sign != -1) throw std::invalid_argument("rasterize_half_space: sign must be +-1");
  PhaseField f(grid);
  const double dx = grid.dx(axis);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = (grid.coords(i)[axis] + 0.5) * dx;
    double rel = std::fmod(x - offset, side);
    if (rel < 0) rel += side;
    const bool inside = rel < thickness;
    f.mask[i] = (sign > 0) ? inside : !inside;
  }
  return f;
}

namespace {

std::uint8_t nearest_seed(const Grid& grid, std::span<const Point> seeds, const Point& p) {
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    const Point d = grid.periodic_delta(seeds[s], p);
    const double d2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
    if (d2 < best_d2) {
      best_d2 = d2;
      best = s;
    }
  }
  return static_cast<std::uint8_t>(best + 1);
}

void check_seeds(const Grid& grid, std::span<const Point> seeds) {
  if (seeds.empty()) throw std::invalid_argument("voronoi_labels: need at least one seed");
  if (seeds.size() > static_cast<std::size_t>(MultiPhaseState::kMaxGrains)) {
    throw std::invalid_argument("voronoi_labels: at most 255 seeds");
  }
  for (std::size_t a = 0; a < seeds.size(); ++a) {
    check_center(grid, seeds[a]);
    for (std::size_t b = a + 1; b < seeds.size(); ++b) {
      if (grid.periodic_distance(seeds[a], seeds[b]) == 0.0) {
        throw std::invalid_argument("voronoi_labels: seeds must be pairwise distinct");
      }
    }
  }
}

}  // namespace

MultiPhaseState voronoi_labels(const Grid& grid, std::span<const Point> seeds, double vapor_margin) {
  check_seeds(grid, seeds);
  if (!(vapor_margin >= 0.0)) throw std::invalid_argument("voronoi_labels: negative margin");
  MultiPhaseState state(grid, static_cast<int>(seeds.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point p = grid.cell_center(i);
    bool vapor = false;
    for (int a = 0; a < grid.dim(); ++a) {
      const double to_face = std::min(p[a], grid.side(a) - p[a]);
      vapor = vapor || to_face < vapor_margin;
    }
    state.labels[i] = vapor ? 0 : nearest_seed(grid, seeds, p);
  }
  return state;
}

MultiPhaseState voronoi_labels_in_ball(const Grid& grid, std::span<const Point> seeds,
                                       const Point& center, double radius) {
  check_seeds(grid, seeds);
  const PhaseField solid = rasterize_ball(grid, center, radius);
  MultiPhaseState state(grid, static_cast<int>(seeds.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    state.labels[i] = solid.mask[i] ? nearest_seed(grid, seeds, grid.cell_center(i)) : 0;
  }
  return state;
}

double volume(const PhaseField& field) {
  return static_cast<double>(field.count()) * field.grid.cell_volume();
}

double bounding_radius(const PhaseField& field, const Point& center) {
  double r2 = -1.0;
  const Grid& g = field.grid;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!field.mask[i]) continue;
    const Point d = g.periodic_delta(center, g.cell_center(i));
    r2 = std::max(r2, d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
  }
  if (r2 < 0.0) throw DegeneratePhase("bounding_radius: empty phase");
  return std::sqrt(r2);
}

namespace {

template <class Vec>
Vec shifted(const Grid& g, const Vec& in, std::array<int, 3> by) {
  Vec out(in.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    auto c = g.coords(i);
    for (int a = 0; a < 3; ++a) c[a] += by[a];
    out[g.index(c)] = in[i];
  }
  return out;
}

}  // namespace

PhaseField shift(const PhaseField& field, std::array<int, 3> by) {
  PhaseField out(field.grid);
  out.mask = shifted(field.grid, field.mask, by);
  return out;
}

RealField shift(const RealField& field, std::array<int, 3> by) {
  RealField out(field.grid);
  out.values = shifted(field.grid, field.values, by);
  return out;
}

MultiPhaseState shift(const MultiPhaseState& state, std::array<int, 3> by) {
  MultiPhaseState out(state.grid, state.grains);
  out.labels = shifted(state.grid, state.labels, by);
  return out;
}

}  // namespace mbo
