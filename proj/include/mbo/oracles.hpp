#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mbo/grid.hpp"

namespace mbo {

/// Radius of a ball under mean-curvature flow: sqrt(R0^2 - 2 (d - 1) t),
/// and 0 after extinction.
double circle_mcf(double r0, double t, int dim = 2);

/// Radii sampled at the requested times.
struct BallTrajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> radii;  // radii[k][ball]
  std::optional<double> extinction_time;   // first ball to vanish
  /// max |R(dt) - R(dt/2)| over samples: a step-size error estimate.
  double richardson_error = 0.0;
};

/// Two balls under volume-preserving mean-curvature flow with a shared
/// multiplier Lambda = (d - 1) sum R^{d-2} / sum R^{d-1}, so that
/// R_i' = -(d - 1)/R_i + Lambda. Integrated in A_i = R_i^2 with fixed-step
/// RK4; in 2-d the total area is conserved exactly. Once a ball vanishes it
/// stays at radius 0 and the survivor is stationary.
BallTrajectory two_ball_vp(std::array<double, 2> r0, std::span<const double> times, int dim = 2, double dt = 1e-5);

/// One ball under forced mean-curvature flow R' = -(d - 1)/R + f(t).
BallTrajectory forced_ball(double r0, const std::function<double(double)>& force, std::span<const double> times,
                           int dim = 2, double dt = 1e-5);

/// Sector angles at a triple junction of a 2-d grain configuration.
struct JunctionAngles {
  Point junction{};
  std::array<int, 3> labels{};       // grain labels, ascending
  std::array<double, 3> degrees{};   // opening angle of each grain, summing to 360
};

/// Locates a 2x2 cell block carrying three distinct grain labels (the one
/// nearest `hint` if given), fits a line to each of the three grain
/// boundaries within `window` of the junction (skipping the inner 3 cells),
/// orients it away from the junction and returns the angles between
/// consecutive directions. Throws DegeneratePhase
/// when no triple junction exists.
JunctionAngles junction_angles(const MultiPhaseState& state, double window, std::optional<Point> hint = std::nullopt);

}  // namespace mbo
