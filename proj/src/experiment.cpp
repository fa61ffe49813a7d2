#include "mbo/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>

#include "mbo/diagnostics.hpp"
#include "mbo/dump.hpp"
#include "mbo/oracles.hpp"

namespace mbo {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(double v, int digits = 6) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string dump_name(int step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "step_%06d.mbof", step);
  return buf;
}

// Number of steps of size h reaching t exactly, or ConfigError.
int steps_for(double t, double h) {
  const double k = t / h;
  const double r = std::round(k);
  if (r < 1.0 || std::abs(k - r) > 1e-9 * r) {
    throw ConfigError("sweep.time " + fmt(t) + " is not a whole multiple of h = " + fmt(h));
  }
  return static_cast<int>(r);
}

double equivalent_radius(const PhaseField& f) {
  const double v = volume(f);
  if (f.grid.dim() == 2) return std::sqrt(v / std::numbers::pi);
  return std::cbrt(3.0 * v / (4.0 * std::numbers::pi));
}

double fitted_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += std::log(x[i]);
    sy += std::log(y[i]);
    sxx += std::log(x[i]) * std::log(x[i]);
    sxy += std::log(x[i]) * std::log(y[i]);
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const DumpError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const InadmissibleTensions& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntimeError;
  }
}

void write_ledger_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "n,t,lambda,E_h,D_h,slack,radius\n";
  for (const StepRecord& r : traj.records) {
    out << r.n << ',' << fmt17(r.t) << ',' << (r.lambda ? fmt17(*r.lambda) : "") << ',' << fmt17(r.energy_after)
        << ',' << fmt17(r.dissipation) << ',' << fmt17(r.ed_slack) << ','
        << (r.bounding_radius ? fmt17(*r.bounding_radius) : "") << '\n';
  }
}

}  // namespace

int cmd_run(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const State initial = build_initial_state(config);
    SchemeConfig sc = config.scheme_config();
    if (sc.kind == SchemeKind::grain_growth && !sc.tensions) {
      // Grain count taken from the initial dump.
      ExperimentConfig with_grains = config;
      with_grains.grains = std::get<MultiPhaseState>(initial).grains;
      sc.tensions = with_grains.tensions();
    }
    sc.store_states = config.output_every > 0;
    const Trajectory traj = run(sc, initial);

    std::filesystem::create_directories(config.output_dir);
    const std::filesystem::path dir(config.output_dir);
    const int last = traj.records.empty() ? 0 : traj.records.back().n;
    if (traj.complete()) {
      for (std::size_t k = 0; k < traj.states.size(); ++k) {
        const int step = static_cast<int>(k);
        if (step % std::max(1, config.output_every) == 0 || step == last) {
          write_dump_file((dir / dump_name(step)).string(), traj.states[k], config.h, step);
        }
      }
    } else {
      write_dump_file((dir / dump_name(0)).string(), traj.states.front(), config.h, 0);
      if (last > 0) write_dump_file((dir / dump_name(last)).string(), traj.states.back(), config.h, last);
    }
    write_ledger_csv((dir / "ledger.csv").string(), traj);

    const LedgerReport ledger = ledger_check(traj, false);
    out << "scheme: " << to_string(config.scheme) << "\n";
    out << "steps: " << traj.records.size() << " of " << config.steps << " (" << to_string(traj.status) << ")\n";
    for (const auto& w : traj.warnings) out << "warning: " << w << "\n";
    if (config.scheme == SchemeKind::volume_preserving && !traj.records.empty()) {
      const TightnessReport t = tightness_monitor(traj);
      out << "tightness: " << (t.warnings == 0 ? "OK" : "WARN") << " (" << t.good_iterations << " good, "
          << t.bad_iterations << " bad iterations)\n";
      for (const auto& m : t.messages) out << "warning: " << m << "\n";
    }
    out << "energy: " << fmt(ledger.initial_energy) << " -> " << fmt(ledger.final_energy)
        << ", dissipated " << fmt(ledger.total_dissipation) << "\n";
    out << "worst slack: " << fmt(ledger.worst_slack) << "\n";
    out << "ledger: " << (ledger.pass ? "PASS" : "FAIL");
    if (ledger.first_failure) out << " (first failure at step " << *ledger.first_failure << ")";
    out << "\n";
    return ledger.pass ? kExitPass : kExitLedgerFail;
  });
}

int cmd_sweep(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    if (!config.sweep) throw ConfigError(config.source + ": sweep needs sweep.kind");
    const SweepSpec& s = *config.sweep;
    std::size_t count = std::max(s.hs.size(), s.ns.size());
    auto broadcast_ok = [&](std::size_t size) { return size == 0 || size == 1 || size == count; };
    if (!broadcast_ok(s.hs.size()) || !broadcast_ok(s.ns.size())) {
      throw ConfigError(config.source + ": sweep.h and sweep.n must have equal lengths (or one entry)");
    }
    if (count < 3) throw ConfigError(config.source + ": a sweep needs at least 3 points, got " + std::to_string(count));
    auto h_at = [&](std::size_t k) {
      if (s.hs.empty()) {
        if (!(config.h > 0.0)) throw ConfigError(config.source + ": sweep needs sweep.h or h");
        return config.h;
      }
      return s.hs.size() == 1 ? s.hs[0] : s.hs[k];
    };
    auto n_at = [&](std::size_t k) { return s.ns.empty() ? config.n[0] : (s.ns.size() == 1 ? s.ns[0] : s.ns[k]); };

    std::filesystem::create_directories(config.output_dir);
    std::ofstream csv(std::filesystem::path(config.output_dir) / "sweep.csv");

    if (s.kind == "circle_eoc") {
      if (config.scheme != SchemeKind::mbo || config.init.kind != "ball") {
        throw ConfigError(config.source + ": circle_eoc needs scheme = mbo and init = ball");
      }
      std::vector<double> hs, errors;
      out << "n,h,steps,radius,oracle,error\n";
      csv << "n,h,steps,radius,oracle,error\n";
      for (std::size_t k = 0; k < count; ++k) {
        const double h = h_at(k);
        const int n = n_at(k);
        SchemeConfig sc = config.scheme_config();
        sc.grid = config.grid(n);
        sc.h = h;
        sc.steps = steps_for(s.time, h);
        sc.store_states = false;
        const Trajectory traj = run(sc, build_initial_state(config, sc.grid));
        const double r = equivalent_radius(std::get<PhaseField>(traj.final_state()));
        const double exact = circle_mcf(config.init.radius, s.time, config.dim);
        const double e = std::abs(r - exact);
        hs.push_back(h);
        errors.push_back(e);
        const std::string row = std::to_string(n) + "," + fmt17(h) + "," + std::to_string(sc.steps) + "," + fmt17(r) +
                                "," + fmt17(exact) + "," + fmt17(e) + "\n";
        out << row;
        csv << row;
      }
      const bool spread = std::any_of(hs.begin(), hs.end(), [&](double h) { return h != hs[0]; });
      if (!spread) {
        const bool same = std::all_of(errors.begin(), errors.end(), [&](double e) { return e == errors[0]; });
        out << "order: undefined (all h equal); rows " << (same ? "identical" : "DIFFER") << "\n";
        return same ? kExitPass : kExitLedgerFail;
      }
      if (std::any_of(errors.begin(), errors.end(), [](double e) { return !(e > 0.0); })) {
        out << "order: undefined (zero error)\n";
        return kExitPass;
      }
      const double order = fitted_slope(hs, errors);
      out << "order: " << fmt(order, 4) << " (required >= " << fmt(s.min_order, 3) << ")\n";
      return order >= s.min_order ? kExitPass : kExitLedgerFail;
    }

    // lambda_scaling
    if (config.scheme != SchemeKind::volume_preserving) {
      throw ConfigError(config.source + ": lambda_scaling needs scheme = volume_preserving");
    }
    std::vector<std::vector<double>> lambdas;
    std::vector<double> hs;
    for (std::size_t k = 0; k < count; ++k) {
      const double h = h_at(k);
      SchemeConfig sc = config.scheme_config();
      sc.grid = config.grid(n_at(k));
      sc.h = h;
      sc.steps = steps_for(s.time, h);
      sc.store_states = false;
      sc.stop_when_pinned = false;
      const Trajectory traj = run(sc, build_initial_state(config, sc.grid));
      std::vector<double> l;
      for (const auto& r : traj.records) l.push_back(*r.lambda);
      lambdas.push_back(std::move(l));
      hs.push_back(h);
    }
    out << "n,h,steps,M,bad_iterations\n";
    csv << "n,h,steps,M,bad_iterations\n";
    const bool spread = std::any_of(hs.begin(), hs.end(), [&](double h) { return h != hs[0]; });
    LagrangeScalingReport rep;
    for (std::size_t k = 0; k < hs.size(); ++k) {
      LagrangeScalingPoint p{hs[k], lagrange_sum(lambdas[k], hs[k]), 0, lambdas[k].size()};
      for (double l : lambdas[k]) p.bad_iterations += std::abs(l - 0.5) >= 0.25 ? 1 : 0;
      rep.points.push_back(p);
    }
    if (spread) rep.slope = lagrange_scaling(lambdas, hs).slope;
    int bad = 0;
    for (std::size_t k = 0; k < rep.points.size(); ++k) {
      const auto& p = rep.points[k];
      bad += p.bad_iterations;
      const std::string row = std::to_string(n_at(k)) + "," + fmt17(p.h) + "," + std::to_string(p.steps) + "," +
                              fmt17(p.m) + "," + std::to_string(p.bad_iterations) + "\n";
      out << row;
      csv << row;
    }
    if (!spread) {
      const bool same = std::all_of(rep.points.begin(), rep.points.end(), [&](const auto& p) { return p.m == rep.points[0].m; });
      out << "slope: undefined (all h equal); rows " << (same ? "identical" : "DIFFER") << "\n";
      return same ? kExitPass : kExitLedgerFail;
    }
    out << "slope: " << fmt(rep.slope, 4) << " (required >= " << fmt(s.min_order, 3) << "), bad iterations: " << bad
        << "\n";
    return rep.slope >= s.min_order ? kExitPass : kExitLedgerFail;
  });
}

int cmd_check(const std::vector<std::string>& paths, const std::optional<ExperimentConfig>& config, std::ostream& out,
              std::ostream& err) {
  return guarded(err, [&]() -> int {
    if (paths.empty()) throw ConfigError("check: no dump files given");
    std::vector<Dump> dumps;
    for (const auto& p : paths) dumps.push_back(read_dump_file(p));
    std::stable_sort(dumps.begin(), dumps.end(), [](const Dump& a, const Dump& b) { return a.step < b.step; });
    for (std::size_t k = 1; k < dumps.size(); ++k) {
      if (dumps[k].step != dumps[k - 1].step + 1) {
        throw ConfigError("check: dumps must be consecutive steps; step " + std::to_string(dumps[k - 1].step) +
                          " is followed by " + std::to_string(dumps[k].step));
      }
      if (dumps[k].h != dumps[0].h) throw ConfigError("check: dumps disagree on h");
    }
    const bool multi_file = std::holds_alternative<MultiPhaseState>(dumps[0].state);

    SchemeConfig sc;
    if (config) {
      sc = config->scheme_config();
    } else {
      sc.kind = multi_file ? SchemeKind::grain_growth : SchemeKind::mbo;
    }
    sc.h = dumps[0].h;
    Trajectory traj;
    for (auto& d : dumps) {
      if (sc.kind == SchemeKind::grain_growth) {
        MultiPhaseState s = as_multiphase(d.state);
        if (!sc.tensions) sc.tensions = SurfaceTensionMatrix::uniform(s.grains);
        traj.states.push_back(std::move(s));
      } else {
        if (multi_file) throw ConfigError("check: multiphase dumps need a grain-growth config");
        traj.states.push_back(d.state);
      }
    }
    sc.grid = std::holds_alternative<PhaseField>(traj.states[0]) ? std::get<PhaseField>(traj.states[0]).grid
                                                                  : std::get<MultiPhaseState>(traj.states[0]).grid;
    sc.steps = static_cast<int>(dumps.size()) - 1;
    traj.config = sc;
    for (std::size_t k = 1; k < dumps.size(); ++k) {
      StepRecord r;
      r.n = dumps[k].step;
      r.t = r.n * sc.h;
      traj.records.push_back(r);
    }
    if (!config) out << "note: no config given; checking E_h(after) + D_h <= E_h(before) without forcing\n";
    const LedgerReport rep = ledger_check(traj, true);
    out << "step,slack\n";
    for (std::size_t k = 0; k < rep.slacks.size(); ++k) out << traj.records[k].n << "," << fmt17(rep.slacks[k]) << "\n";
    out << "ledger: " << (rep.pass ? "PASS" : "FAIL");
    if (rep.first_failure) out << " (first failure at step " << *rep.first_failure << ")";
    out << "\n";
    return rep.pass ? kExitPass : kExitLedgerFail;
  });
}

int cmd_energy(const std::string& path, double h, const std::optional<ExperimentConfig>& config, std::ostream& out,
               std::ostream& err) {
  return guarded(err, [&]() -> int {
    if (!(h > 0.0)) throw ConfigError("energy: --h must be positive");
    const Dump d = read_dump_file(path);
    if (std::holds_alternative<PhaseField>(d.state) && !(config && config->scheme == SchemeKind::grain_growth)) {
      const auto& f = std::get<PhaseField>(d.state);
      out << fmt17(energy_two_phase(HeatKernelPlan(f.grid, h), f)) << "\n";
      return kExitPass;
    }
    const MultiPhaseState s = as_multiphase(d.state);
    std::optional<SurfaceTensionMatrix> sigma = config ? config->tensions() : std::nullopt;
    if (!sigma) sigma = SurfaceTensionMatrix::uniform(s.grains);
    out << fmt17(energy_multiphase(HeatKernelPlan(s.grid, h), s, *sigma)) << "\n";
    return kExitPass;
  });
}

}  // namespace mbo
