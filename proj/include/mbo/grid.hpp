#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mbo {

/// Point in physical coordinates. Unused trailing components are zero in 2-d.
using Point = std::array<double, 3>;

/// Raised when two fields (or a field and a plan) live on different grids.
class GridMismatch : public std::invalid_argument {
 public:
  explicit GridMismatch(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised when a phase is empty (or full) where the operation needs an
/// interface, e.g. the volume-preserving step or bounding_radius.
class DegeneratePhase : public std::runtime_error {
 public:
  explicit DegeneratePhase(const std::string& what) : std::runtime_error(what) {}
};

/// Uniform periodic grid on a box torus. Cell index is row-major with x
/// varying fastest: idx = i + n0 * (j + n1 * k).
class Grid {
 public:
  static constexpr int kMinCellsPerAxis = 8;

  Grid(int dim, std::array<int, 3> cells, std::array<double, 3> side);

  /// Same resolution and side length on every axis.
  static Grid cube(int dim, int cells, double side = 1.0);

  int dim() const { return dim_; }
  int cells(int axis) const { return cells_[axis]; }
  double side(int axis) const { return side_[axis]; }
  double dx(int axis) const { return side_[axis] / cells_[axis]; }
  const std::array<int, 3>& cells() const { return cells_; }
  const std::array<double, 3>& sides() const { return side_; }

  std::size_t size() const { return size_; }
  double cell_volume() const { return cell_volume_; }
  double total_volume() const { return cell_volume_ * static_cast<double>(size_); }
  /// Largest cell spacing over the axes.
  double max_dx() const;
  /// Smallest side length over the used axes.
  double min_side() const;
  /// Center of the box.
  Point center() const;

  std::array<int, 3> coords(std::size_t idx) const;
  std::size_t index(std::array<int, 3> c) const;  // wraps periodically
  Point cell_center(std::size_t idx) const;

  /// Shortest displacement b - a on the torus, componentwise in [-L/2, L/2].
  Point periodic_delta(const Point& a, const Point& b) const;
  double periodic_distance(const Point& a, const Point& b) const;

  bool operator==(const Grid& other) const;
  bool operator!=(const Grid& other) const { return !(*this == other); }

 private:
  int dim_;
  std::array<int, 3> cells_;
  std::array<double, 3> side_;
  std::size_t size_;
  double cell_volume_;
};

void require_same_grid(const Grid& a, const Grid& b, const char* where);

/// Indicator of one phase, one byte per cell (0 or 1).
struct PhaseField {
  Grid grid;
  std::vector<std::uint8_t> mask;

  explicit PhaseField(const Grid& g, std::uint8_t fill = 0) : grid(g), mask(g.size(), fill) {}

  std::size_t count() const;
  bool operator==(const PhaseField& o) const { return grid == o.grid && mask == o.mask; }
};

struct RealField {
  Grid grid;
  std::vector<double> values;

  explicit RealField(const Grid& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}
  static RealField from(const PhaseField& field);
};

/// Grain labels 1..P, vapor label 0. Labels are stored in 8 bits, which caps
/// P at 255 (matching the dump format).
struct MultiPhaseState {
  static constexpr int kMaxGrains = 255;

  Grid grid;
  std::vector<std::uint8_t> labels;
  int grains;

  MultiPhaseState(const Grid& g, int grains, std::uint8_t fill = 0);

  std::size_t solid_count() const;
  double solid_volume() const { return static_cast<double>(solid_count()) * grid.cell_volume(); }
  std::size_t count(int label) const;
  PhaseField indicator(int label) const;
  PhaseField solid() const;
  bool operator==(const MultiPhaseState& o) const {
    return grid == o.grid && grains == o.grains && labels == o.labels;
  }
};

// --- rasterizers ----------------------------------------------------------

/// Cells whose centers lie strictly inside the periodic ball.
PhaseField rasterize_ball(const Grid& grid, const Point& center, double radius);

/// Slab {offset <= x_axis < offset + thickness} (mod side) along `axis`.
/// Interfaces sit at x_axis = offset and x_axis = offset + thickness. With
/// sign = -1 the complement is returned, i.e. the slab starting at
/// offset + thickness.
PhaseField rasterize_half_space(const Grid& grid, int axis, double offset, double thickness,
                                int sign = +1);

/// Nearest-seed labelling (periodic distance, lowest index wins ties) of the
/// solid region. Solid = cells at distance >= vapor_margin from the torus
/// seam (the box faces). With vapor_margin = 0 every cell is solid.
MultiPhaseState voronoi_labels(const Grid& grid, std::span<const Point> seeds, double vapor_margin);

/// Nearest-seed labelling restricted to a solid ball; outside is vapor.
MultiPhaseState voronoi_labels_in_ball(const Grid& grid, std::span<const Point> seeds,
                                       const Point& center, double radius);

// --- measurements ---------------------------------------------------------

double volume(const PhaseField& field);

/// Max periodic distance from `center` to an occupied cell center.
double bounding_radius(const PhaseField& field, const Point& center);

/// Shift by an integer number of cells per axis (periodic).
PhaseField shift(const PhaseField& field, std::array<int, 3> by);
RealField shift(const RealField& field, std::array<int, 3> by);
MultiPhaseState shift(const MultiPhaseState& state, std::array<int, 3> by);

}  // namespace mbo
