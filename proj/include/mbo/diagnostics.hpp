#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mbo/grid.hpp"
#include "mbo/kernel.hpp"
#include "mbo/schemes.hpp"
#include "mbo/surface_tension.hpp"

namespace mbo {

// --- energies -----------------------------------------------------------

/// E_h(chi) = (1/sqrt h) int (1 - chi) G_h * chi.
double energy_two_phase(const HeatKernelPlan& plan, const PhaseField& chi);
/// Same functional for a real-valued u.
double energy_two_phase(const HeatKernelPlan& plan, const RealField& u);

/// D_h(omega) = (1/sqrt h) int omega G_h * omega for omega with values in
/// {-1, 0, 1}; anything else throws std::invalid_argument.
double dissipation_two_phase(const HeatKernelPlan& plan, const RealField& omega);
/// D_h(after - before).
double dissipation_two_phase(const HeatKernelPlan& plan, const PhaseField& after, const PhaseField& before);

/// (1/sqrt h) int (1 - chi) phi + chi (2 lambda - phi), with phi = G_h * chi^{n-1}.
/// Among sets of the same volume the volume-preserving step minimizes it.
double linearized_energy(const RealField& phi, const PhaseField& chi, double lambda, double h);

/// E_h(chi) = (1/sqrt h) sum_{i,j >= 0} sigma_ij int chi_i G_h * chi_j.
double energy_multiphase(const HeatKernelPlan& plan, const MultiPhaseState& state,
                         const SurfaceTensionMatrix& sigma);

/// -E_h(omega) for omega = (omega_0, ..., omega_P) with sum_i omega_i = 0
/// (checked, else std::invalid_argument). Non-negative by the conditional
/// negativity of sigma.
double dissipation_multiphase(const HeatKernelPlan& plan, std::span<const RealField> omega,
                              const SurfaceTensionMatrix& sigma);
double dissipation_multiphase(const HeatKernelPlan& plan, const MultiPhaseState& after,
                              const MultiPhaseState& before, const SurfaceTensionMatrix& sigma);

/// Per-phase differences chi_i(after) - chi_i(before), i = 0..P.
std::vector<RealField> phase_differences(const MultiPhaseState& after, const MultiPhaseState& before);

// --- energy-dissipation audit -----------------------------------------------

struct LedgerReport {
  bool pass = true;
  std::vector<double> slacks;          // per step; >= -tolerance is required
  std::optional<int> first_failure;    // step number n
  double worst_slack = 0.0;
  double initial_energy = 0.0;
  double final_energy = 0.0;
  double total_dissipation = 0.0;
  double total_forcing_work = 0.0;
  /// E(chi^0) + total_forcing_work - E(chi^N) - total_dissipation.
  double cumulative_slack = 0.0;
  bool recomputed = false;  // true when re-derived from the stored states
};

/// Tolerance for a slack of the energy scale `energy`.
double slack_tolerance(double energy);

/// Audits every step. With all states stored (and `recompute`) the energies
/// are recomputed from the states; otherwise the recorded values are checked.
LedgerReport ledger_check(const Trajectory& trajectory, bool recompute = true);

// --- Lagrange multiplier scaling ------------------------------------------

struct LagrangeScalingPoint {
  double h = 0.0;
  double m = 0.0;  // h * sum_n (lambda_n - 1/2)^2
  int bad_iterations = 0;
  std::size_t steps = 0;
};

struct LagrangeScalingReport {
  std::vector<LagrangeScalingPoint> points;
  double slope = 0.0;  // least-squares slope of log M against log h
};

double lagrange_sum(std::span<const double> lambdas, double h);

/// One multiplier sequence per time step size; sequences must cover the
/// same final time.
LagrangeScalingReport lagrange_scaling(std::span<const std::vector<double>> lambdas, std::span<const double> hs);

// --- tightness ---------------------------------------------------------------

/// C_0 with int_0^{C_0} G^1(z) dz = 1/4, i.e. C_0 = 2 erfinv(1/2).
double half_space_constant();
/// 1 / G^1(C_0) = sqrt(4 pi) exp(C_0^2 / 4): a good iteration moves the
/// bounding radius by at most this times sqrt(h) |lambda - 1/2|.
double good_iteration_constant();
/// Inverse error function on (-1, 1).
double erfinv(double y);

struct TightnessEntry {
  int n = 0;
  double lambda = 0.0;
  double radius_before = 0.0;
  double radius_after = 0.0;
  bool good = false;
  double allowed = 0.0;  // largest admissible radius_after
  bool within = true;
};

struct TightnessReport {
  std::vector<TightnessEntry> entries;
  int good_iterations = 0;
  int bad_iterations = 0;
  int warnings = 0;
  /// Largest (R_n - R_{n-1}) / (sqrt(h) |lambda_n - 1/2|) over good steps
  /// with lambda_n != 1/2.
  double observed_constant = 0.0;
  std::vector<std::string> messages;
};

/// Checks R_n <= R_{n-1} + C sqrt(h) |lambda_n - 1/2| + lattice slack on good
/// iterations and R_n <= 3 R_{n-1} + lattice slack on bad ones. Violations
/// are warnings; the bound is informative, not a hard invariant.
TightnessReport tightness_monitor(const Trajectory& trajectory);

// --- approximate monotonicity -------------------------------------------

struct ApproxMonotonicity {
  double energy_h = 0.0;
  double energy_h0 = 0.0;
  double factor = 0.0;  // (sqrt h0 / (sqrt h + sqrt h0))^{d+1}
  bool holds = true;
};

/// E_h(chi) >= factor * E_{h0}(chi) for 0 < h <= h0.
ApproxMonotonicity approx_monotonicity_check(const Grid& grid, const PhaseField& chi, double h, double h0);

// --- first variations ------------------------------------------------------

/// Smooth periodic test field xi together with its divergence.
struct TestVectorField {
  Grid grid;
  std::vector<RealField> components;
  RealField divergence;

  static TestVectorField constant(const Grid& grid, const Point& value);
  /// xi(x) = exp(-(r - r0)^2 / (2 w^2)) (x - c), r = |x - c| on the torus.
  /// Needs r0 + 6 w below half the shortest side so xi is effectively
  /// periodic.
  static TestVectorField radial_bump(const Grid& grid, const Point& center, double r0, double width);
};

/// Inner variation of E_h along xi (valid for real-valued fields as well).
double first_variation_energy(const HeatKernelPlan& plan, const PhaseField& chi, const TestVectorField& xi);
double first_variation_energy(const HeatKernelPlan& plan, const RealField& u, const TestVectorField& xi);

/// Inner variation of chi -> D_h(chi - chi0) at chi1 along xi.
double first_variation_dissipation(const HeatKernelPlan& plan, const PhaseField& chi1, const PhaseField& chi0,
                                   const TestVectorField& xi);
double first_variation_dissipation(const HeatKernelPlan& plan, const RealField& u1, const RealField& u0,
                                   const TestVectorField& xi);

/// Inner variation of the multiphase E_h.
double first_variation_energy_multiphase(const HeatKernelPlan& plan, const MultiPhaseState& state,
                                         const SurfaceTensionMatrix& sigma, const TestVectorField& xi);
/// Inner variation of chi -> E_h(chi - chi0) at chi1.
double first_variation_energy_difference(const HeatKernelPlan& plan, const MultiPhaseState& chi1,
                                         const MultiPhaseState& chi0, const SurfaceTensionMatrix& sigma,
                                         const TestVectorField& xi);

struct ElgResidual {
  double energy_term = 0.0;
  double dissipation_term = 0.0;
  double multiplier_term = 0.0;  // lambda or forcing contribution
  double residual = 0.0;         // sum of the three
  /// Whether chi1 is the scheme's step from chi0 (with the given lambda).
  /// The residual is only meaningful when this holds.
  bool from_scheme_step = false;
};

/// Volume preserving:
///   dE(chi1) + dD(chi1) + ((2 lambda - 1)/sqrt h) int div(xi) chi1.
ElgResidual euler_lagrange_residual(const HeatKernelPlan& plan, const PhaseField& chi1, const PhaseField& chi0,
                                    double lambda, const TestVectorField& xi);

/// Forced: dE(chi1) + dD(chi1) - (1/sqrt pi) int div(f_n xi) chi1.
ElgResidual euler_lagrange_residual_forced(const HeatKernelPlan& plan, const PhaseField& chi1,
                                           const PhaseField& chi0, const RealField& force_n,
                                           const TestVectorField& xi);

/// Grain growth: dE(chi1) - dE(. - chi0)(chi1) - (2 lambda / sqrt h) int div(xi) (1 - chi1_0).
ElgResidual euler_lagrange_residual_multiphase(const HeatKernelPlan& plan, const MultiPhaseState& chi1,
                                               const MultiPhaseState& chi0, const SurfaceTensionMatrix& sigma,
                                               double lambda, const TestVectorField& xi);

}  // namespace mbo
