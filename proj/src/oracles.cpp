#include "mbo/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace mbo {

double circle_mcf(double r0, double t, int dim) {
  if (!(r0 > 0.0) || t < 0.0) throw std::invalid_argument("circle_mcf: need r0 > 0 and t >= 0");
  const double a = r0 * r0 - 2.0 * (dim - 1) * t;
  return a > 0.0 ? std::sqrt(a) : 0.0;
}

namespace {

using Vec = std::vector<double>;
using Rhs = std::function<Vec(double, const Vec&)>;

Vec axpy(const Vec& y, double a, const Vec& k) {
  Vec out(y);
  for (std::size_t i = 0; i < y.size(); ++i) out[i] += a * k[i];
  return out;
}

Vec rk4_step(const Rhs& f, double t, const Vec& y, double dt) {
  const Vec k1 = f(t, y);
  const Vec k2 = f(t + dt / 2, axpy(y, dt / 2, k1));
  const Vec k3 = f(t + dt / 2, axpy(y, dt / 2, k2));
  const Vec k4 = f(t + dt, axpy(y, dt, k3));
  Vec out(y);
  for (std::size_t i = 0; i < y.size(); ++i) out[i] += dt / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  return out;
}

// Integrates squared radii. `rhs` sees only live components; a component
// whose square would turn negative is located by bisection on the step
// length and frozen at zero from then on.
struct SquaredRadii {
  std::vector<Vec> samples;
  std::optional<double> extinction;
};

SquaredRadii integrate(const std::function<Vec(double, const Vec&, const std::vector<bool>&)>& rhs, Vec a0,
                       std::span<const double> times, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("ball oracle: dt must be positive");
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (times[k] < times[k - 1]) throw std::invalid_argument("ball oracle: times must be non-decreasing");
  }
  SquaredRadii out;
  std::vector<bool> alive(a0.size(), true);
  Vec a = std::move(a0);
  double t = 0.0;
  auto f = [&](double s, const Vec& y) { return rhs(s, y, alive); };
  auto negative = [&](const Vec& y) {
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (alive[i] && y[i] <= 0.0) return true;
    }
    return false;
  };

  for (double target : times) {
    if (target < 0.0) throw std::invalid_argument("ball oracle: negative time");
    while (t < target) {
      // Integer step counts keep the grid of times identical for dt and dt/2.
      const double step = std::min(dt, target - t);
      Vec next = rk4_step(f, t, a, step);
      if (!negative(next)) {
        a = std::move(next);
        t = (step == dt) ? t + dt : target;
        continue;
      }
      double lo = 0.0, hi = step;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, t); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (negative(rk4_step(f, t, a, mid))) hi = mid; else lo = mid;
      }
      a = rk4_step(f, t, a, lo);
      t += hi;
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (alive[i] && a[i] <= 1e-12) {
          alive[i] = false;
          a[i] = 0.0;
          if (!out.extinction) out.extinction = t;
        }
      }
      if (!out.extinction) {
        // Bisection ended on a live state; mark the smallest component extinct.
        std::size_t small = 0;
        for (std::size_t i = 1; i < a.size(); ++i) if (alive[i] && (!alive[small] || a[i] < a[small])) small = i;
        alive[small] = false;
        a[small] = 0.0;
        out.extinction = t;
      }
      t = std::min(t, target);
    }
    out.samples.push_back(a);
  }
  return out;
}

BallTrajectory finish(std::span<const double> times, const SquaredRadii& coarse, const SquaredRadii& fine) {
  BallTrajectory traj;
  traj.times.assign(times.begin(), times.end());
  traj.extinction_time = coarse.extinction;
  for (std::size_t k = 0; k < coarse.samples.size(); ++k) {
    std::vector<double> r;
    for (std::size_t i = 0; i < coarse.samples[k].size(); ++i) {
      const double rc = std::sqrt(std::max(0.0, coarse.samples[k][i]));
      const double rf = std::sqrt(std::max(0.0, fine.samples[k][i]));
      traj.richardson_error = std::max(traj.richardson_error, std::abs(rc - rf));
      r.push_back(rc);
    }
    traj.radii.push_back(std::move(r));
  }
  return traj;
}

}  // namespace

BallTrajectory two_ball_vp(std::array<double, 2> r0, std::span<const double> times, int dim, double dt) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("two_ball_vp: dim must be 2 or 3");
  if (!(r0[0] > 0.0) || !(r0[1] > 0.0)) throw std::invalid_argument("two_ball_vp: radii must be positive");
  const double d = dim;
  auto rhs = [d](double, const Vec& a, const std::vector<bool>& alive) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!alive[i]) continue;
      const double r = std::sqrt(std::max(0.0, a[i]));
      num += std::pow(r, d - 2);
      den += std::pow(r, d - 1);
    }
    const double lambda = den > 0.0 ? (d - 1) * num / den : 0.0;
    Vec out(a.size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (alive[i]) out[i] = -2.0 * (d - 1) + 2.0 * lambda * std::sqrt(std::max(0.0, a[i]));
    }
    return out;
  };
  const Vec a0{r0[0] * r0[0], r0[1] * r0[1]};
  return finish(times, integrate(rhs, a0, times, dt), integrate(rhs, a0, times, dt / 2));
}

BallTrajectory forced_ball(double r0, const std::function<double(double)>& force, std::span<const double> times,
                           int dim, double dt) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("forced_ball: dim must be 2 or 3");
  if (!(r0 > 0.0)) throw std::invalid_argument("forced_ball: radius must be positive");
  if (!force) throw std::invalid_argument("forced_ball: no force");
  const double d = dim;
  auto rhs = [d, &force](double t, const Vec& a, const std::vector<bool>& alive) {
    Vec out(1, 0.0);
    if (alive[0]) out[0] = -2.0 * (d - 1) + 2.0 * force(t) * std::sqrt(std::max(0.0, a[0]));
    return out;
  };
  const Vec a0{r0 * r0};
  return finish(times, integrate(rhs, a0, times, dt), integrate(rhs, a0, times, dt / 2));
}

// --- junction angles ---------------------------------------------------------

namespace {

struct Candidate {
  Point corner;
  std::array<int, 3> labels;
};

double wrap_angle(double a) {
  const double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  return a < 0.0 ? a + two_pi : a;
}

}  // namespace

JunctionAngles junction_angles(const MultiPhaseState& state, double window, std::optional<Point> hint) {
  const Grid& g = state.grid;
  if (g.dim() != 2) throw std::invalid_argument("junction_angles: only 2-d states are supported");
  const double dx = g.max_dx();
  if (!(window > 4.0 * dx)) throw std::invalid_argument("junction_angles: window must exceed 4 cells");

  // 2x2 blocks with three distinct grain labels; the block corner is the junction.
  std::vector<Candidate> found;
  for (int j = 0; j < g.cells(1); ++j) {
    for (int i = 0; i < g.cells(0); ++i) {
      const std::array<int, 4> l{state.labels[g.index({i, j, 0})], state.labels[g.index({i + 1, j, 0})],
                                 state.labels[g.index({i, j + 1, 0})], state.labels[g.index({i + 1, j + 1, 0})]};
      std::vector<int> distinct;
      bool vapor = false;
      for (int v : l) {
        if (v == 0) vapor = true;
        if (std::find(distinct.begin(), distinct.end(), v) == distinct.end()) distinct.push_back(v);
      }
      if (vapor || distinct.size() != 3) continue;
      std::sort(distinct.begin(), distinct.end());
      const Point c = g.cell_center(g.index({i, j, 0}));
      found.push_back({{c[0] + g.dx(0) / 2, c[1] + g.dx(1) / 2, 0.0}, {distinct[0], distinct[1], distinct[2]}});
    }
  }
  if (found.empty()) throw DegeneratePhase("junction_angles: no triple junction found");

  Point ref = hint.value_or(found.front().corner);
  if (!hint) {
    // Staircase boundaries can produce neighbouring candidates; take the one
    // nearest their mean.
    double sx = 0.0, sy = 0.0;
    for (const auto& c : found) {
      const Point d = g.periodic_delta(found.front().corner, c.corner);
      sx += d[0];
      sy += d[1];
    }
    ref = {found.front().corner[0] + sx / found.size(), found.front().corner[1] + sy / found.size(), 0.0};
  }
  const Candidate* best = &found.front();
  for (const auto& c : found) {
    if (g.periodic_distance(ref, c.corner) < g.periodic_distance(ref, best->corner)) best = &c;
  }

  JunctionAngles out;
  out.junction = best->corner;
  out.labels = best->labels;

  // Face midpoints between pairs of the three grains, relative to the junction.
  std::map<std::pair<int, int>, std::vector<std::array<double, 2>>> faces;
  const double inner = 3.0 * dx;
  for (std::size_t x = 0; x < g.size(); ++x) {
    const auto c = g.coords(x);
    const int a = state.labels[x];
    for (int axis = 0; axis < 2; ++axis) {
      auto nb = c;
      nb[axis] += 1;
      const int b = state.labels[g.index(nb)];
      if (a == b || a == 0 || b == 0) continue;
      if (std::find(out.labels.begin(), out.labels.end(), a) == out.labels.end()) continue;
      if (std::find(out.labels.begin(), out.labels.end(), b) == out.labels.end()) continue;
      Point mid = g.cell_center(x);
      mid[axis] += g.dx(axis) / 2;
      const Point d = g.periodic_delta(out.junction, mid);
      const double r = std::hypot(d[0], d[1]);
      if (r <= inner || r > window) continue;
      faces[{std::min(a, b), std::max(a, b)}].push_back({d[0], d[1]});
    }
  }

  struct Ray {
    double angle;
    std::pair<int, int> pair;
  };
  std::vector<Ray> rays;
  for (const auto& [pair, pts] : faces) {
    if (pts.size() < 3) continue;
    // Centered principal axis: a line fit that does not depend on where
    // inside its cell the junction sits. Oriented away from the junction.
    double mx = 0, my = 0;
    for (const auto& p : pts) {
      mx += p[0];
      my += p[1];
    }
    mx /= static_cast<double>(pts.size());
    my /= static_cast<double>(pts.size());
    double sxx = 0, sxy = 0, syy = 0;
    for (const auto& p : pts) {
      sxx += (p[0] - mx) * (p[0] - mx);
      sxy += (p[0] - mx) * (p[1] - my);
      syy += (p[1] - my) * (p[1] - my);
    }
    const double theta = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
    double ux = std::cos(theta), uy = std::sin(theta);
    if (ux * mx + uy * my < 0.0) {
      ux = -ux;
      uy = -uy;
    }
    rays.push_back({wrap_angle(std::atan2(uy, ux)), pair});
  }
  if (rays.size() != 3) throw DegeneratePhase("junction_angles: could not resolve three boundaries near the junction");

  std::sort(rays.begin(), rays.end(), [](const Ray& a, const Ray& b) { return a.angle < b.angle; });
  for (int k = 0; k < 3; ++k) {
    const Ray& r0 = rays[k];
    const Ray& r1 = rays[(k + 1) % 3];
    const double gap = wrap_angle(r1.angle - r0.angle);
    // The grain between two consecutive rays borders both boundaries.
    int shared = -1;
    for (int l : {r0.pair.first, r0.pair.second}) {
      if (l == r1.pair.first || l == r1.pair.second) shared = l;
    }
    const auto slot = std::find(out.labels.begin(), out.labels.end(), shared) - out.labels.begin();
    out.degrees[slot] = gap * 180.0 / std::numbers::pi;
  }
  return out;
}

}  // namespace mbo
