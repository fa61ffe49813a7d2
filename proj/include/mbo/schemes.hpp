#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mbo/grid.hpp"
#include "mbo/kernel.hpp"
#include "mbo/surface_tension.hpp"

namespace mbo {

/// Space-time force f(x, t) for the forced scheme.
using ForceFunction = std::function<double(const Point&, double)>;

RealField sample_force(const Grid& grid, const ForceFunction& force, double t);

// --- single steps -----------------------------------------------------------

/// Plain MBO: {G_h * chi > 1/2}, strict.
PhaseField step_mbo(const HeatKernelPlan& plan, const PhaseField& chi);

struct VolumePreservingStep {
  PhaseField next;
  double lambda;
};

/// Keeps the #ones(chi) cells with the largest G_h * chi (index tie-break).
/// Throws DegeneratePhase on an empty or full input.
VolumePreservingStep step_volume_preserving(const HeatKernelPlan& plan, const PhaseField& chi);

/// {G_h * chi > 1/2 - f_n sqrt(h) / (2 sqrt(pi))}, strict.
PhaseField step_forced(const HeatKernelPlan& plan, const PhaseField& chi, const RealField& force_n);

struct GrainGrowthStep {
  MultiPhaseState next;
  double lambda;
};

/// Grain growth with a vapor phase at fixed solid volume. With
/// phi_0 = G_h * 1_solid and phi_i = G_h * (sum_j sigma_ij chi_j + chi_0), a
/// cell keeps solid iff min_i phi_i - phi_0 is among the #solid smallest
/// scores and then takes the label argmin_i phi_i (lowest label on ties).
GrainGrowthStep step_grain_growth(const HeatKernelPlan& plan, const MultiPhaseState& state,
                                  const SurfaceTensionMatrix& sigma);

// --- trajectories -------------------------------------------------------

enum class SchemeKind { mbo, volume_preserving, forced, grain_growth };

std::string to_string(SchemeKind kind);
SchemeKind scheme_kind_from_string(const std::string& name);

struct SchemeConfig {
  SchemeKind kind = SchemeKind::mbo;
  double h = 0.0;
  int steps = 0;
  Grid grid = Grid::cube(2, 8);
  ForceFunction force;                          // forced scheme only
  bool force_time_independent = false;          // enables the "pinned" stop for forced runs
  std::optional<SurfaceTensionMatrix> tensions;  // grain growth only
  std::optional<Point> monitor_center;           // bounding radius center; default box center
  bool store_states = true;                      // false keeps only the first and last state
  bool stop_when_pinned = true;
};

/// One entry of the energy-dissipation audit.
///
/// dissipation is D_h(chi^n - chi^{n-1}) for two-phase schemes and
/// -E_h(chi^n - chi^{n-1}) for grain growth. forcing_work is
/// (1/sqrt(pi)) int f(nh) (chi^n - chi^{n-1}) for the forced scheme, else 0.
/// ed_slack = energy_before - energy_after - dissipation + forcing_work.
struct StepRecord {
  int n = 0;
  double t = 0.0;
  std::optional<double> lambda;
  double energy_before = 0.0;
  double energy_after = 0.0;
  double dissipation = 0.0;
  double forcing_work = 0.0;
  double ed_slack = 0.0;
  std::optional<double> bounding_radius;
  std::optional<bool> good_iteration;  // |lambda - 1/2| < 1/4, volume-preserving only
  std::size_t cell_count = 0;          // phase (or solid) cells after the step
  double clamp_excess = 0.0;           // largest excursion of G_h * chi outside [0, 1]
};

/// Relative tolerance for inequalities that hold exactly for the discrete scheme.
inline constexpr double kExactSlackTolerance = 1e-9;

using State = std::variant<PhaseField, MultiPhaseState>;

enum class RunStatus { completed, extinct, pinned };
std::string to_string(RunStatus status);

struct Trajectory {
  SchemeConfig config;
  std::vector<State> states;  // t = 0, h, ..., unless store_states is false
  std::vector<StepRecord> records;
  RunStatus status = RunStatus::completed;
  std::vector<std::string> warnings;

  /// True when every intermediate state was kept.
  bool complete() const { return states.size() == records.size() + 1; }
  const State& initial() const { return states.front(); }
  const State& final_state() const { return states.back(); }
};

/// Iterates the configured scheme from `initial`, recording a StepRecord per
/// step. Stops early with status "extinct" when the two-phase set empties or
/// fills the box, and "pinned" when a step reproduces its input exactly (only
/// for autonomous schemes, and only if stop_when_pinned).
Trajectory run(const SchemeConfig& config, const State& initial);

}  // namespace mbo
