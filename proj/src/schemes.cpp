#include "mbo/schemes.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "mbo/diagnostics.hpp"
#include "mbo/threshold.hpp"

namespace mbo {

namespace {

PhaseField threshold_above(const RealField& phi, double level) {
  PhaseField out(phi.grid);
  for (std::size_t i = 0; i < phi.values.size(); ++i) out.mask[i] = phi.values[i] > level ? 1 : 0;
  return out;
}

double forced_level(double f, double h) { return 0.5 - f * std::sqrt(h) / (2.0 * std::sqrt(std::numbers::pi)); }

void check_plan(const HeatKernelPlan& plan, const Grid& grid, const char* where) {
  require_same_grid(plan.grid(), grid, where);
}

struct StepOutput {
  State next;
  std::optional<double> lambda;
  double clamp_excess = 0.0;
};

StepOutput forced_step(const HeatKernelPlan& plan, const PhaseField& chi, const RealField& force_n) {
  check_plan(plan, chi.grid, "step_forced");
  require_same_grid(chi.grid, force_n.grid, "step_forced");
  double excess = 0.0;
  const RealField phi = convolve(plan, chi, &excess);
  PhaseField out(chi.grid);
  for (std::size_t i = 0; i < phi.values.size(); ++i) {
    out.mask[i] = phi.values[i] > forced_level(force_n.values[i], plan.h()) ? 1 : 0;
  }
  return {std::move(out), std::nullopt, excess};
}

StepOutput mbo_step(const HeatKernelPlan& plan, const PhaseField& chi) {
  check_plan(plan, chi.grid, "step_mbo");
  double excess = 0.0;
  const RealField phi = convolve(plan, chi, &excess);
  return {threshold_above(phi, 0.5), std::nullopt, excess};
}

StepOutput volume_step(const HeatKernelPlan& plan, const PhaseField& chi) {
  check_plan(plan, chi.grid, "step_volume_preserving");
  const std::size_t count = chi.count();
  if (count == 0 || count == chi.grid.size()) {
    throw DegeneratePhase("volume-preserving step: the phase is empty or fills the box");
  }
  double excess = 0.0;
  const RealField phi = convolve(plan, chi, &excess);
  SelectionResult sel = select_top_cells(phi, count);
  return {std::move(sel.mask), sel.lambda, excess};
}

StepOutput grain_step(const HeatKernelPlan& plan, const MultiPhaseState& state, const SurfaceTensionMatrix& sigma) {
  check_plan(plan, state.grid, "step_grain_growth");
  const int p = state.grains;
  if (sigma.grains() != p) {
    throw std::invalid_argument("step_grain_growth: surface tension matrix has " + std::to_string(sigma.grains()) +
                                " grains, state has " + std::to_string(p));
  }
  const std::size_t solid = state.solid_count();
  if (solid == 0) throw DegeneratePhase("grain growth step: no solid cells");

  double excess = 0.0;
  const RealField phi0 = convolve(plan, state.solid(), &excess);
  std::vector<RealField> indicators;
  indicators.reserve(p);
  for (int j = 1; j <= p; ++j) indicators.push_back(RealField::from(state.indicator(j)));
  const std::vector<RealField> psi = convolve_many(plan, indicators);

  // phi_i - phi_0 = sum_{j>=1} sigma_ij psi_j + (1 - 2 phi_0). Writing it this
  // way keeps the P = 1 case exactly equal to the volume-preserving scores.
  const std::size_t n = state.grid.size();
  RealField score(state.grid);
  std::vector<std::uint8_t> best(n, 1);
  const Eigen::MatrixXd& s = sigma.grain_matrix();
  for (std::size_t x = 0; x < n; ++x) {
    double lowest = std::numeric_limits<double>::infinity();
    int arg = 1;
    for (int i = 0; i < p; ++i) {
      double m = 0.0;
      for (int j = 0; j < p; ++j) m += s(i, j) * psi[j].values[x];
      if (m < lowest) {
        lowest = m;
        arg = i + 1;
      }
    }
    best[x] = static_cast<std::uint8_t>(arg);
    score.values[x] = lowest + (1.0 - 2.0 * phi0.values[x]);
  }
  SelectionResult sel = select_bottom_cells(score, solid);
  MultiPhaseState next(state.grid, p);
  for (std::size_t x = 0; x < n; ++x) {
    if (sel.mask.mask[x]) next.labels[x] = best[x];
  }
  return {std::move(next), sel.lambda, excess};
}

}  // namespace

RealField sample_force(const Grid& grid, const ForceFunction& force, double t) {
  if (!force) throw std::invalid_argument("sample_force: no force function");
  RealField out(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = force(grid.cell_center(i), t);
    if (!std::isfinite(v)) throw std::invalid_argument("sample_force: force is not finite");
    out.values[i] = v;
  }
  return out;
}

PhaseField step_mbo(const HeatKernelPlan& plan, const PhaseField& chi) {
  return std::get<PhaseField>(mbo_step(plan, chi).next);
}

VolumePreservingStep step_volume_preserving(const HeatKernelPlan& plan, const PhaseField& chi) {
  StepOutput out = volume_step(plan, chi);
  return {std::get<PhaseField>(std::move(out.next)), *out.lambda};
}

PhaseField step_forced(const HeatKernelPlan& plan, const PhaseField& chi, const RealField& force_n) {
  return std::get<PhaseField>(forced_step(plan, chi, force_n).next);
}

GrainGrowthStep step_grain_growth(const HeatKernelPlan& plan, const MultiPhaseState& state,
                                  const SurfaceTensionMatrix& sigma) {
  StepOutput out = grain_step(plan, state, sigma);
  return {std::get<MultiPhaseState>(std::move(out.next)), *out.lambda};
}

std::string to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::mbo: return "mbo";
    case SchemeKind::volume_preserving: return "volume_preserving";
    case SchemeKind::forced: return "forced";
    case SchemeKind::grain_growth: return "grain_growth";
  }
  return "unknown";
}

SchemeKind scheme_kind_from_string(const std::string& name) {
  for (SchemeKind k : {SchemeKind::mbo, SchemeKind::volume_preserving, SchemeKind::forced, SchemeKind::grain_growth}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown scheme '" + name + "' (expected mbo, volume_preserving, forced or grain_growth)");
}

std::string to_string(RunStatus status) {
  switch (status) {
    case RunStatus::completed: return "completed";
    case RunStatus::extinct: return "extinct";
    case RunStatus::pinned: return "pinned";
  }
  return "unknown";
}

namespace {

void validate(const SchemeConfig& config, const State& initial) {
  if (!(config.h > 0.0) || !std::isfinite(config.h)) throw std::invalid_argument("run: h must be positive");
  if (config.steps < 0) throw std::invalid_argument("run: steps must be non-negative");
  const bool multi = config.kind == SchemeKind::grain_growth;
  if (multi != std::holds_alternative<MultiPhaseState>(initial)) {
    throw std::invalid_argument("run: scheme '" + to_string(config.kind) + "' does not match the initial state type");
  }
  const Grid& g = multi ? std::get<MultiPhaseState>(initial).grid : std::get<PhaseField>(initial).grid;
  require_same_grid(config.grid, g, "run");
  if (config.kind == SchemeKind::forced && !config.force) throw std::invalid_argument("run: forced scheme needs a force");
  if (multi) {
    if (!config.tensions) throw std::invalid_argument("run: grain growth needs surface tensions");
    if (config.tensions->grains() != std::get<MultiPhaseState>(initial).grains) {
      throw std::invalid_argument("run: surface tension matrix does not match the number of grains");
    }
  }
}

double forcing_work(const RealField& f, const PhaseField& after, const PhaseField& before) {
  double sum = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    sum += f.values[i] * (static_cast<double>(after.mask[i]) - static_cast<double>(before.mask[i]));
  }
  return sum * f.grid.cell_volume() / std::sqrt(std::numbers::pi);
}

}  // namespace

Trajectory run(const SchemeConfig& config, const State& initial) {
  validate(config, initial);
  const Grid& grid = config.grid;
  const HeatKernelPlan plan(grid, config.h);
  const Point center = config.monitor_center.value_or(grid.center());
  const double box_limit = 0.4 * grid.min_side();

  Trajectory traj;
  traj.config = config;
  traj.states.push_back(initial);
  if (!plan.well_resolved()) {
    traj.warnings.push_back("sqrt(h) < 4 dx: thresholding may stall on the lattice");
  }

  const bool multi = config.kind == SchemeKind::grain_growth;
  const bool autonomous = config.kind != SchemeKind::forced || config.force_time_independent;

  State current = initial;
  double energy = multi ? energy_multiphase(plan, std::get<MultiPhaseState>(current), *config.tensions)
                        : energy_two_phase(plan, std::get<PhaseField>(current));
  bool warned_box = false;

  for (int n = 1; n <= config.steps; ++n) {
    StepRecord rec;
    rec.n = n;
    rec.t = n * config.h;
    rec.energy_before = energy;

    std::optional<RealField> force_n;
    if (config.kind == SchemeKind::forced) force_n = sample_force(grid, config.force, rec.t);
    StepOutput out = [&]() {
      switch (config.kind) {
        case SchemeKind::mbo: return mbo_step(plan, std::get<PhaseField>(current));
        case SchemeKind::volume_preserving: return volume_step(plan, std::get<PhaseField>(current));
        case SchemeKind::forced: return forced_step(plan, std::get<PhaseField>(current), *force_n);
        case SchemeKind::grain_growth: break;
      }
      return grain_step(plan, std::get<MultiPhaseState>(current), *config.tensions);
    }();
    rec.lambda = out.lambda;
    rec.clamp_excess = out.clamp_excess;

    PhaseField monitored(grid);
    if (multi) {
      const auto& before = std::get<MultiPhaseState>(current);
      const auto& after = std::get<MultiPhaseState>(out.next);
      rec.energy_after = energy_multiphase(plan, after, *config.tensions);
      rec.dissipation = dissipation_multiphase(plan, after, before, *config.tensions);
      monitored = after.solid();
    } else {
      const auto& before = std::get<PhaseField>(current);
      const auto& after = std::get<PhaseField>(out.next);
      rec.energy_after = energy_two_phase(plan, after);
      rec.dissipation = dissipation_two_phase(plan, after, before);
      if (force_n) rec.forcing_work = forcing_work(*force_n, after, before);
      monitored = after;
    }
    rec.ed_slack = rec.energy_before - rec.energy_after - rec.dissipation + rec.forcing_work;
    rec.cell_count = monitored.count();
    if (rec.cell_count > 0) {
      rec.bounding_radius = bounding_radius(monitored, center);
      if (!warned_box && *rec.bounding_radius > box_limit) {
        traj.warnings.push_back("step " + std::to_string(n) +
                                ": bounding radius exceeds 0.4 of the box side; periodic images may interact");
        warned_box = true;
      }
    }
    if (config.kind == SchemeKind::volume_preserving) rec.good_iteration = std::abs(*rec.lambda - 0.5) < 0.25;

    const bool same = out.next == current;
    energy = rec.energy_after;
    current = std::move(out.next);
    traj.records.push_back(rec);
    if (config.store_states) traj.states.push_back(current);

    if (!multi && (rec.cell_count == 0 || rec.cell_count == grid.size())) {
      traj.status = RunStatus::extinct;
      break;
    }
    if (same && autonomous && config.stop_when_pinned) {
      traj.status = RunStatus::pinned;
      break;
    }
  }
  if (!config.store_states && !traj.records.empty()) traj.states.push_back(current);
  return traj;
}

}  // namespace mbo
