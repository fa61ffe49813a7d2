#include "mbo/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mbo {

namespace {

double inv_sqrt_h(const HeatKernelPlan& plan) { return 1.0 / std::sqrt(plan.h()); }

double weighted_dot(const RealField& a, const RealField& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) sum += a.values[i] * b.values[i];
  return sum * a.grid.cell_volume();
}

RealField indicator_field(const MultiPhaseState& s, int label) { return RealField::from(s.indicator(label)); }

std::vector<RealField> all_indicators(const MultiPhaseState& s) {
  std::vector<RealField> out;
  out.reserve(s.grains + 1);
  for (int i = 0; i <= s.grains; ++i) out.push_back(indicator_field(s, i));
  return out;
}

void check_tensions(const MultiPhaseState& s, const SurfaceTensionMatrix& sigma, const char* where) {
  if (sigma.grains() != s.grains) {
    throw std::invalid_argument(std::string(where) + ": surface tensions do not match the number of grains");
  }
}

// Fields sum_j sigma_ij u_j for i = 0..P.
std::vector<RealField> mix(const std::vector<RealField>& u, const SurfaceTensionMatrix& sigma) {
  const int phases = static_cast<int>(u.size());
  std::vector<RealField> out;
  out.reserve(phases);
  for (int i = 0; i < phases; ++i) {
    RealField f(u[0].grid);
    for (int j = 0; j < phases; ++j) {
      const double s = sigma(i, j);
      if (s == 0.0) continue;
      for (std::size_t x = 0; x < f.values.size(); ++x) f.values[x] += s * u[j].values[x];
    }
    out.push_back(std::move(f));
  }
  return out;
}

// int w [div(xi) g.value + xi . grad g.value] over cells where w != 0.
double transport_pairing(const RealField& w, const SmoothedField& g, const TestVectorField& xi) {
  const int d = xi.grid.dim();
  double sum = 0.0;
  for (std::size_t x = 0; x < w.values.size(); ++x) {
    if (w.values[x] == 0.0) continue;
    double t = xi.divergence.values[x] * g.value.values[x];
    for (int a = 0; a < d; ++a) t += xi.components[a].values[x] * g.gradient[a].values[x];
    sum += w.values[x] * t;
  }
  return sum * w.grid.cell_volume();
}

double divergence_integral(const TestVectorField& xi, const RealField& w) { return weighted_dot(xi.divergence, w); }

void check_xi(const HeatKernelPlan& plan, const TestVectorField& xi) {
  require_same_grid(plan.grid(), xi.grid, "first variation");
}

}  // namespace

// --- energies -----------------------------------------------------------

double energy_two_phase(const HeatKernelPlan& plan, const RealField& u) {
  require_same_grid(plan.grid(), u.grid, "energy_two_phase");
  const RealField phi = convolve(plan, u);
  double sum = 0.0;
  for (std::size_t i = 0; i < u.values.size(); ++i) sum += (1.0 - u.values[i]) * phi.values[i];
  return sum * u.grid.cell_volume() * inv_sqrt_h(plan);
}

double energy_two_phase(const HeatKernelPlan& plan, const PhaseField& chi) {
  return energy_two_phase(plan, RealField::from(chi));
}

double dissipation_two_phase(const HeatKernelPlan& plan, const RealField& omega) {
  require_same_grid(plan.grid(), omega.grid, "dissipation_two_phase");
  for (double v : omega.values) {
    if (v != 0.0 && v != 1.0 && v != -1.0) {
      throw std::invalid_argument("dissipation_two_phase: omega must take values in {-1, 0, 1}");
    }
  }
  return weighted_dot(omega, convolve(plan, omega)) * inv_sqrt_h(plan);
}

double dissipation_two_phase(const HeatKernelPlan& plan, const PhaseField& after, const PhaseField& before) {
  require_same_grid(after.grid, before.grid, "dissipation_two_phase");
  RealField omega(after.grid);
  for (std::size_t i = 0; i < omega.values.size(); ++i) {
    omega.values[i] = static_cast<double>(after.mask[i]) - static_cast<double>(before.mask[i]);
  }
  return dissipation_two_phase(plan, omega);
}

double linearized_energy(const RealField& phi, const PhaseField& chi, double lambda, double h) {
  require_same_grid(phi.grid, chi.grid, "linearized_energy");
  double sum = 0.0;
  for (std::size_t i = 0; i < phi.values.size(); ++i) {
    const double p = phi.values[i];
    sum += chi.mask[i] ? 2.0 * lambda - p : p;
  }
  return sum * phi.grid.cell_volume() / std::sqrt(h);
}

double energy_multiphase(const HeatKernelPlan& plan, const MultiPhaseState& state, const SurfaceTensionMatrix& sigma) {
  require_same_grid(plan.grid(), state.grid, "energy_multiphase");
  check_tensions(state, sigma, "energy_multiphase");
  const std::vector<RealField> chi = all_indicators(state);
  const std::vector<RealField> g = convolve_many(plan, chi);
  double sum = 0.0;
  for (std::size_t x = 0; x < state.labels.size(); ++x) {
    const int i = state.labels[x];
    for (int j = 0; j <= state.grains; ++j) sum += sigma(i, j) * g[j].values[x];
  }
  return sum * state.grid.cell_volume() * inv_sqrt_h(plan);
}

std::vector<RealField> phase_differences(const MultiPhaseState& after, const MultiPhaseState& before) {
  require_same_grid(after.grid, before.grid, "phase_differences");
  if (after.grains != before.grains) throw std::invalid_argument("phase_differences: grain counts differ");
  std::vector<RealField> out(after.grains + 1, RealField(after.grid));
  for (std::size_t x = 0; x < after.labels.size(); ++x) {
    if (after.labels[x] == before.labels[x]) continue;
    out[after.labels[x]].values[x] += 1.0;
    out[before.labels[x]].values[x] -= 1.0;
  }
  return out;
}

double dissipation_multiphase(const HeatKernelPlan& plan, std::span<const RealField> omega,
                              const SurfaceTensionMatrix& sigma) {
  if (static_cast<int>(omega.size()) != sigma.grains() + 1) {
    throw std::invalid_argument("dissipation_multiphase: need one difference field per phase, vapor included");
  }
  const Grid& grid = omega[0].grid;
  require_same_grid(plan.grid(), grid, "dissipation_multiphase");
  for (const auto& w : omega) require_same_grid(grid, w.grid, "dissipation_multiphase");
  for (std::size_t x = 0; x < grid.size(); ++x) {
    double total = 0.0;
    for (const auto& w : omega) total += w.values[x];
    if (total != 0.0) {
      throw std::invalid_argument("dissipation_multiphase: phase differences must sum to zero in every cell");
    }
  }
  // Skip identically zero components; they contribute nothing.
  std::vector<RealField> g;
  g.reserve(omega.size());
  std::vector<RealField> nonzero;
  std::vector<int> which;
  for (std::size_t j = 0; j < omega.size(); ++j) {
    const auto& v = omega[j].values;
    if (std::any_of(v.begin(), v.end(), [](double a) { return a != 0.0; })) {
      nonzero.push_back(omega[j]);
      which.push_back(static_cast<int>(j));
    }
  }
  if (nonzero.empty()) return 0.0;
  const std::vector<RealField> conv = convolve_many(plan, nonzero);
  double sum = 0.0;
  for (std::size_t x = 0; x < grid.size(); ++x) {
    for (std::size_t i = 0; i < omega.size(); ++i) {
      const double wi = omega[i].values[x];
      if (wi == 0.0) continue;
      double mixed = 0.0;
      for (std::size_t k = 0; k < which.size(); ++k) mixed += sigma(static_cast<int>(i), which[k]) * conv[k].values[x];
      sum += wi * mixed;
    }
  }
  return -sum * grid.cell_volume() * inv_sqrt_h(plan);
}

double dissipation_multiphase(const HeatKernelPlan& plan, const MultiPhaseState& after, const MultiPhaseState& before,
                              const SurfaceTensionMatrix& sigma) {
  check_tensions(after, sigma, "dissipation_multiphase");
  const std::vector<RealField> omega = phase_differences(after, before);
  return dissipation_multiphase(plan, omega, sigma);
}

// --- energy-dissipation audit -----------------------------------------------

double slack_tolerance(double energy) { return kExactSlackTolerance * std::max(1.0, std::abs(energy)); }

LedgerReport ledger_check(const Trajectory& traj, bool recompute) {
  LedgerReport rep;
  const SchemeConfig& cfg = traj.config;
  std::vector<StepRecord> records = traj.records;

  if (recompute && traj.complete() && !records.empty()) {
    rep.recomputed = true;
    const HeatKernelPlan plan(cfg.grid, cfg.h);
    const bool multi = cfg.kind == SchemeKind::grain_growth;
    auto energy_of = [&](const State& s) {
      return multi ? energy_multiphase(plan, std::get<MultiPhaseState>(s), *cfg.tensions)
                   : energy_two_phase(plan, std::get<PhaseField>(s));
    };
    double before = energy_of(traj.states[0]);
    for (std::size_t k = 0; k < records.size(); ++k) {
      StepRecord& r = records[k];
      const State& s0 = traj.states[k];
      const State& s1 = traj.states[k + 1];
      r.energy_before = before;
      r.energy_after = energy_of(s1);
      r.forcing_work = 0.0;
      if (multi) {
        r.dissipation = dissipation_multiphase(plan, std::get<MultiPhaseState>(s1), std::get<MultiPhaseState>(s0),
                                               *cfg.tensions);
      } else {
        const auto& a = std::get<PhaseField>(s1);
        const auto& b = std::get<PhaseField>(s0);
        r.dissipation = dissipation_two_phase(plan, a, b);
        if (cfg.kind == SchemeKind::forced) {
          const RealField f = sample_force(cfg.grid, cfg.force, r.n * cfg.h);
          double w = 0.0;
          for (std::size_t i = 0; i < f.values.size(); ++i) {
            w += f.values[i] * (static_cast<double>(a.mask[i]) - static_cast<double>(b.mask[i]));
          }
          r.forcing_work = w * cfg.grid.cell_volume() / std::sqrt(std::numbers::pi);
        }
      }
      r.ed_slack = r.energy_before - r.energy_after - r.dissipation + r.forcing_work;
      before = r.energy_after;
    }
  }

  if (records.empty()) return rep;
  rep.initial_energy = records.front().energy_before;
  rep.final_energy = records.back().energy_after;
  rep.worst_slack = records.front().ed_slack;
  for (const StepRecord& r : records) {
    rep.slacks.push_back(r.ed_slack);
    rep.total_dissipation += r.dissipation;
    rep.total_forcing_work += r.forcing_work;
    rep.worst_slack = std::min(rep.worst_slack, r.ed_slack);
    if (r.ed_slack < -slack_tolerance(r.energy_before) && !rep.first_failure) {
      rep.first_failure = r.n;
      rep.pass = false;
    }
  }
  rep.cumulative_slack = rep.initial_energy + rep.total_forcing_work - rep.final_energy - rep.total_dissipation;
  const double cumulative_tol = slack_tolerance(rep.initial_energy) * static_cast<double>(records.size());
  if (rep.cumulative_slack < -cumulative_tol) rep.pass = false;
  return rep;
}

// --- Lagrange multiplier scaling ------------------------------------------

double lagrange_sum(std::span<const double> lambdas, double h) {
  double s = 0.0;
  for (double l : lambdas) s += (l - 0.5) * (l - 0.5);
  return h * s;
}

LagrangeScalingReport lagrange_scaling(std::span<const std::vector<double>> lambdas, std::span<const double> hs) {
  if (lambdas.size() != hs.size()) throw std::invalid_argument("lagrange_scaling: one multiplier sequence per h");
  if (hs.size() < 2) throw std::invalid_argument("lagrange_scaling: need at least two time step sizes");
  LagrangeScalingReport rep;
  for (std::size_t k = 0; k < hs.size(); ++k) {
    if (!(hs[k] > 0.0)) throw std::invalid_argument("lagrange_scaling: h must be positive");
    LagrangeScalingPoint p;
    p.h = hs[k];
    p.m = lagrange_sum(lambdas[k], hs[k]);
    p.steps = lambdas[k].size();
    for (double l : lambdas[k]) p.bad_iterations += std::abs(l - 0.5) >= 0.25 ? 1 : 0;
    rep.points.push_back(p);
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(rep.points.size());
  for (const auto& p : rep.points) {
    const double x = std::log(p.h);
    const double y = std::log(p.m);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  rep.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return rep;
}

// --- tightness ---------------------------------------------------------------

double erfinv(double y) {
  if (!(y > -1.0 && y < 1.0)) throw std::domain_error("erfinv: argument must lie in (-1, 1)");
  if (y == 0.0) return 0.0;
  // Safeguarded Newton on erf(x) - y; erf is increasing so bisection keeps
  // the bracket valid.
  double lo = -6.0, hi = 6.0, x = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double f = std::erf(x) - y;
    if (f == 0.0) return x;
    if (f > 0.0) hi = x; else lo = x;
    const double slope = 2.0 / std::sqrt(std::numbers::pi) * std::exp(-x * x);
    double next = x - f / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-16 * std::max(1.0, std::abs(x))) return next;
    x = next;
  }
  return x;
}

double half_space_constant() { return 2.0 * erfinv(0.5); }

double good_iteration_constant() {
  const double c = half_space_constant();
  return std::sqrt(4.0 * std::numbers::pi) * std::exp(c * c / 4.0);
}

TightnessReport tightness_monitor(const Trajectory& traj) {
  TightnessReport rep;
  const SchemeConfig& cfg = traj.config;
  if (cfg.kind != SchemeKind::volume_preserving) {
    throw std::invalid_argument("tightness_monitor: needs a volume-preserving trajectory");
  }
  const Grid& grid = cfg.grid;
  const Point center = cfg.monitor_center.value_or(grid.center());
  const double lattice = std::sqrt(static_cast<double>(grid.dim())) * grid.max_dx();
  const double c = good_iteration_constant();
  const double sqrt_h = std::sqrt(cfg.h);

  std::optional<double> previous;
  const auto& first = std::get<PhaseField>(traj.initial());
  if (first.count() > 0) previous = bounding_radius(first, center);

  for (const StepRecord& r : traj.records) {
    if (!r.lambda || !r.bounding_radius) {
      previous = r.bounding_radius;
      continue;
    }
    if (previous) {
      TightnessEntry e;
      e.n = r.n;
      e.lambda = *r.lambda;
      e.radius_before = *previous;
      e.radius_after = *r.bounding_radius;
      const double dev = std::abs(e.lambda - 0.5);
      e.good = dev < 0.25;
      e.allowed = e.good ? e.radius_before + c * sqrt_h * dev + lattice : 3.0 * e.radius_before + lattice;
      e.within = e.radius_after <= e.allowed;
      if (e.good) {
        ++rep.good_iterations;
        if (dev > 0.0) {
          rep.observed_constant = std::max(rep.observed_constant, (e.radius_after - e.radius_before) / (sqrt_h * dev));
        }
      } else {
        ++rep.bad_iterations;
      }
      if (!e.within) {
        ++rep.warnings;
        rep.messages.push_back("step " + std::to_string(e.n) + ": bounding radius " + std::to_string(e.radius_after) +
                               " exceeds the bound " + std::to_string(e.allowed));
      }
      rep.entries.push_back(e);
    }
    previous = r.bounding_radius;
  }
  return rep;
}

// --- approximate monotonicity -------------------------------------------

ApproxMonotonicity approx_monotonicity_check(const Grid& grid, const PhaseField& chi, double h, double h0) {
  if (!(h > 0.0) || !(h <= h0)) throw std::invalid_argument("approx_monotonicity_check: need 0 < h <= h0");
  require_same_grid(grid, chi.grid, "approx_monotonicity_check");
  ApproxMonotonicity out;
  out.energy_h = energy_two_phase(HeatKernelPlan(grid, h), chi);
  out.energy_h0 = energy_two_phase(HeatKernelPlan(grid, h0), chi);
  out.factor = std::pow(std::sqrt(h0) / (std::sqrt(h) + std::sqrt(h0)), grid.dim() + 1);
  out.holds = out.energy_h >= out.factor * out.energy_h0 - 1e-12 * std::max(1.0, out.energy_h0);
  return out;
}

// --- first variations ------------------------------------------------------

TestVectorField TestVectorField::constant(const Grid& grid, const Point& value) {
  TestVectorField xi{grid, {}, RealField(grid)};
  for (int a = 0; a < grid.dim(); ++a) xi.components.emplace_back(grid, value[a]);
  return xi;
}

TestVectorField TestVectorField::radial_bump(const Grid& grid, const Point& center, double r0, double width) {
  if (!(width > 0.0) || !(r0 >= 0.0)) throw std::invalid_argument("radial_bump: need r0 >= 0 and width > 0");
  if (r0 + 6.0 * width >= grid.min_side() / 2) {
    throw std::invalid_argument("radial_bump: support r0 + 6 width must stay below half the box side");
  }
  const int d = grid.dim();
  TestVectorField xi{grid, std::vector<RealField>(d, RealField(grid)), RealField(grid)};
  for (std::size_t x = 0; x < grid.size(); ++x) {
    const Point delta = grid.periodic_delta(center, grid.cell_center(x));
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) r2 += delta[a] * delta[a];
    const double r = std::sqrt(r2);
    const double s = (r - r0) / width;
    const double g = std::exp(-0.5 * s * s);
    for (int a = 0; a < d; ++a) xi.components[a].values[x] = g * delta[a];
    xi.divergence.values[x] = g * (d - r * (r - r0) / (width * width));
  }
  return xi;
}

double first_variation_energy(const HeatKernelPlan& plan, const RealField& u, const TestVectorField& xi) {
  check_xi(plan, xi);
  require_same_grid(plan.grid(), u.grid, "first_variation_energy");
  const SmoothedField g = convolve_with_gradient(plan, u);
  const int d = u.grid.dim();
  // E = (1/sqrt h) Q(1 - u, u) with G*(1 - u) = 1 - G*u.
  double sum = 0.0;
  for (std::size_t x = 0; x < u.values.size(); ++x) {
    const double gu = g.value.values[x];
    double transport = 0.0;
    for (int a = 0; a < d; ++a) transport += xi.components[a].values[x] * g.gradient[a].values[x];
    const double div = xi.divergence.values[x];
    const double v = u.values[x];
    sum += (1.0 - v) * (div * gu + transport) + v * (div * (1.0 - gu) - transport);
  }
  return sum * u.grid.cell_volume() * inv_sqrt_h(plan);
}

double first_variation_energy(const HeatKernelPlan& plan, const PhaseField& chi, const TestVectorField& xi) {
  return first_variation_energy(plan, RealField::from(chi), xi);
}

double first_variation_dissipation(const HeatKernelPlan& plan, const RealField& u1, const RealField& u0,
                                   const TestVectorField& xi) {
  check_xi(plan, xi);
  require_same_grid(u1.grid, u0.grid, "first_variation_dissipation");
  RealField omega(u1.grid);
  for (std::size_t x = 0; x < omega.values.size(); ++x) omega.values[x] = u1.values[x] - u0.values[x];
  const SmoothedField g = convolve_with_gradient(plan, omega);
  return 2.0 * transport_pairing(u1, g, xi) * inv_sqrt_h(plan);
}

double first_variation_dissipation(const HeatKernelPlan& plan, const PhaseField& chi1, const PhaseField& chi0,
                                   const TestVectorField& xi) {
  return first_variation_dissipation(plan, RealField::from(chi1), RealField::from(chi0), xi);
}

namespace {

// (2/sqrt h) sum_i int chi_i [div(xi) W_i + xi . grad W_i], W_i = G*(sum_j sigma_ij w_j).
double multiphase_pairing(const HeatKernelPlan& plan, const MultiPhaseState& chi, const std::vector<RealField>& w,
                          const SurfaceTensionMatrix& sigma, const TestVectorField& xi) {
  const std::vector<RealField> mixed = mix(w, sigma);
  double sum = 0.0;
  for (int i = 0; i <= chi.grains; ++i) {
    const RealField ind = indicator_field(chi, i);
    if (std::none_of(ind.values.begin(), ind.values.end(), [](double v) { return v != 0.0; })) continue;
    sum += transport_pairing(ind, convolve_with_gradient(plan, mixed[i]), xi);
  }
  return 2.0 * sum * inv_sqrt_h(plan);
}

}  // namespace

double first_variation_energy_multiphase(const HeatKernelPlan& plan, const MultiPhaseState& state,
                                         const SurfaceTensionMatrix& sigma, const TestVectorField& xi) {
  check_xi(plan, xi);
  require_same_grid(plan.grid(), state.grid, "first_variation_energy_multiphase");
  check_tensions(state, sigma, "first_variation_energy_multiphase");
  return multiphase_pairing(plan, state, all_indicators(state), sigma, xi);
}

double first_variation_energy_difference(const HeatKernelPlan& plan, const MultiPhaseState& chi1,
                                         const MultiPhaseState& chi0, const SurfaceTensionMatrix& sigma,
                                         const TestVectorField& xi) {
  check_xi(plan, xi);
  require_same_grid(plan.grid(), chi1.grid, "first_variation_energy_difference");
  check_tensions(chi1, sigma, "first_variation_energy_difference");
  return multiphase_pairing(plan, chi1, phase_differences(chi1, chi0), sigma, xi);
}

ElgResidual euler_lagrange_residual(const HeatKernelPlan& plan, const PhaseField& chi1, const PhaseField& chi0,
                                    double lambda, const TestVectorField& xi) {
  ElgResidual r;
  r.energy_term = first_variation_energy(plan, chi1, xi);
  r.dissipation_term = first_variation_dissipation(plan, chi1, chi0, xi);
  r.multiplier_term = (2.0 * lambda - 1.0) * inv_sqrt_h(plan) * divergence_integral(xi, RealField::from(chi1));
  r.residual = r.energy_term + r.dissipation_term + r.multiplier_term;
  if (chi0.count() > 0 && chi0.count() < chi0.grid.size()) {
    const VolumePreservingStep step = step_volume_preserving(plan, chi0);
    r.from_scheme_step = step.next == chi1 && std::abs(step.lambda - lambda) <= 1e-12;
  }
  return r;
}

ElgResidual euler_lagrange_residual_forced(const HeatKernelPlan& plan, const PhaseField& chi1, const PhaseField& chi0,
                                           const RealField& force_n, const TestVectorField& xi) {
  require_same_grid(plan.grid(), force_n.grid, "euler_lagrange_residual_forced");
  ElgResidual r;
  r.energy_term = first_variation_energy(plan, chi1, xi);
  r.dissipation_term = first_variation_dissipation(plan, chi1, chi0, xi);
  // div(f xi) = f div(xi) + xi . grad f, with a spectral gradient of f.
  const std::vector<RealField> grad_f = spectral_gradient(plan.grid(), force_n);
  const int d = plan.grid().dim();
  double sum = 0.0;
  for (std::size_t x = 0; x < chi1.mask.size(); ++x) {
    if (!chi1.mask[x]) continue;
    double div = force_n.values[x] * xi.divergence.values[x];
    for (int a = 0; a < d; ++a) div += xi.components[a].values[x] * grad_f[a].values[x];
    sum += div;
  }
  r.multiplier_term = -sum * plan.grid().cell_volume() / std::sqrt(std::numbers::pi);
  r.residual = r.energy_term + r.dissipation_term + r.multiplier_term;
  r.from_scheme_step = step_forced(plan, chi0, force_n) == chi1;
  return r;
}

ElgResidual euler_lagrange_residual_multiphase(const HeatKernelPlan& plan, const MultiPhaseState& chi1,
                                               const MultiPhaseState& chi0, const SurfaceTensionMatrix& sigma,
                                               double lambda, const TestVectorField& xi) {
  ElgResidual r;
  r.energy_term = first_variation_energy_multiphase(plan, chi1, sigma, xi);
  r.dissipation_term = -first_variation_energy_difference(plan, chi1, chi0, sigma, xi);
  r.multiplier_term = -2.0 * lambda * inv_sqrt_h(plan) * divergence_integral(xi, RealField::from(chi1.solid()));
  r.residual = r.energy_term + r.dissipation_term + r.multiplier_term;
  if (chi0.solid_count() > 0) {
    const GrainGrowthStep step = step_grain_growth(plan, chi0, sigma);
    r.from_scheme_step = step.next == chi1 && std::abs(step.lambda - lambda) <= 1e-12;
  }
  return r;
}

}  // namespace mbo
