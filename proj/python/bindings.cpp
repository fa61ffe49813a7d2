#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <pybind11/eigen.h>

#include "mbo/diagnostics.hpp"
#include "mbo/oracles.hpp"
#include "mbo/schemes.hpp"

namespace py = pybind11;
using namespace mbo;

namespace {

// numpy shape is the axes reversed, so C order matches x-fastest storage.
std::vector<py::ssize_t> array_shape(const Grid& g) {
  std::vector<py::ssize_t> shape;
  for (int a = g.dim() - 1; a >= 0; --a) shape.push_back(g.cells(a));
  return shape;
}

template <class T>
py::array_t<T> to_array(const Grid& g, const std::vector<T>& data) {
  py::array_t<T> out(array_shape(g));
  std::copy(data.begin(), data.end(), out.mutable_data());
  return out;
}

template <class T>
std::vector<T> from_array(const Grid& g, const py::array_t<T, py::array::c_style | py::array::forcecast>& a) {
  if (static_cast<std::size_t>(a.size()) != g.size() || a.ndim() != g.dim()) {
    throw std::invalid_argument("array shape does not match the grid");
  }
  for (int k = 0; k < g.dim(); ++k) {
    if (a.shape(k) != g.cells(g.dim() - 1 - k)) throw std::invalid_argument("array shape does not match the grid");
  }
  return std::vector<T>(a.data(), a.data() + a.size());
}

Point to_point(const std::vector<double>& v) {
  if (v.empty() || v.size() > 3) throw std::invalid_argument("points have 1 to 3 coordinates");
  Point p{0, 0, 0};
  std::copy(v.begin(), v.end(), p.begin());
  return p;
}

std::vector<Point> to_points(const std::vector<std::vector<double>>& vs) {
  std::vector<Point> out;
  for (const auto& v : vs) out.push_back(to_point(v));
  return out;
}

py::object state_to_py(const State& s) {
  if (std::holds_alternative<PhaseField>(s)) return py::cast(std::get<PhaseField>(s));
  return py::cast(std::get<MultiPhaseState>(s));
}

State state_from_py(const py::object& o) {
  if (py::isinstance<PhaseField>(o)) return o.cast<PhaseField>();
  if (py::isinstance<MultiPhaseState>(o)) return o.cast<MultiPhaseState>();
  throw std::invalid_argument("initial state must be a PhaseField or MultiPhaseState");
}

py::dict record_to_dict(const StepRecord& r) {
  py::dict d;
  d["n"] = r.n;
  d["t"] = r.t;
  d["lambda"] = r.lambda ? py::cast(*r.lambda) : py::none();
  d["energy_before"] = r.energy_before;
  d["energy_after"] = r.energy_after;
  d["dissipation"] = r.dissipation;
  d["forcing_work"] = r.forcing_work;
  d["ed_slack"] = r.ed_slack;
  d["bounding_radius"] = r.bounding_radius ? py::cast(*r.bounding_radius) : py::none();
  d["good_iteration"] = r.good_iteration ? py::cast(*r.good_iteration) : py::none();
  d["cell_count"] = r.cell_count;
  d["clamp_excess"] = r.clamp_excess;
  return d;
}

}  // namespace

PYBIND11_MODULE(_mbo, m) {
  m.doc() = "Threshold dynamics schemes on periodic grids";

  py::register_exception<DegeneratePhase>(m, "DegeneratePhase", PyExc_RuntimeError);
  py::register_exception<GridMismatch>(m, "GridMismatch", PyExc_ValueError);

  py::class_<Grid>(m, "Grid")
      .def_static("cube", &Grid::cube, py::arg("dim"), py::arg("cells"), py::arg("side") = 1.0)
      .def_property_readonly("dim", &Grid::dim)
      .def_property_readonly("cells", py::overload_cast<>(&Grid::cells, py::const_))
      .def_property_readonly("sides", &Grid::sides)
      .def_property_readonly("size", &Grid::size)
      .def_property_readonly("cell_volume", &Grid::cell_volume)
      .def_property_readonly("max_dx", &Grid::max_dx)
      .def_property_readonly("center", &Grid::center)
      .def("__eq__", &Grid::operator==);

  py::class_<PhaseField>(m, "PhaseField")
      .def(py::init<const Grid&, std::uint8_t>(), py::arg("grid"), py::arg("fill") = 0)
      .def_static(
          "from_array",
          [](const Grid& g, const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& a) {
            PhaseField f(g);
            f.mask = from_array<std::uint8_t>(g, a);
            for (auto& v : f.mask) v = v ? 1 : 0;
            return f;
          },
          py::arg("grid"), py::arg("mask"))
      .def_readonly("grid", &PhaseField::grid)
      .def("count", &PhaseField::count)
      .def("volume", [](const PhaseField& f) { return volume(f); })
      .def("to_array", [](const PhaseField& f) { return to_array(f.grid, f.mask); })
      .def("__eq__", &PhaseField::operator==);

  py::class_<MultiPhaseState>(m, "MultiPhaseState")
      .def(py::init<const Grid&, int, std::uint8_t>(), py::arg("grid"), py::arg("grains"), py::arg("fill") = 0)
      .def_static(
          "from_array",
          [](const Grid& g, int grains, const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& a) {
            MultiPhaseState s(g, grains);
            s.labels = from_array<std::uint8_t>(g, a);
            for (auto v : s.labels) {
              if (v > grains) throw std::invalid_argument("label exceeds the number of grains");
            }
            return s;
          },
          py::arg("grid"), py::arg("grains"), py::arg("labels"))
      .def_readonly("grid", &MultiPhaseState::grid)
      .def_readonly("grains", &MultiPhaseState::grains)
      .def("solid_count", &MultiPhaseState::solid_count)
      .def("count", &MultiPhaseState::count)
      .def("indicator", &MultiPhaseState::indicator)
      .def("to_array", [](const MultiPhaseState& s) { return to_array(s.grid, s.labels); })
      .def("__eq__", &MultiPhaseState::operator==);

  py::class_<SurfaceTensionMatrix>(m, "SurfaceTensionMatrix")
      .def(py::init<Eigen::MatrixXd>(), py::arg("sigma"))
      .def_static("uniform", &SurfaceTensionMatrix::uniform, py::arg("grains"), py::arg("value") = 1.0)
      .def_property_readonly("grains", &SurfaceTensionMatrix::grains)
      .def_property_readonly("lower_bound", &SurfaceTensionMatrix::lower_bound)
      .def_property_readonly("extended_matrix", &SurfaceTensionMatrix::extended_matrix);

  py::class_<HeatKernelPlan>(m, "HeatKernelPlan")
      .def(py::init<const Grid&, double>(), py::arg("grid"), py::arg("h"))
      .def_property_readonly("h", &HeatKernelPlan::h)
      .def("well_resolved", &HeatKernelPlan::well_resolved)
      .def(
          "convolve",
          [](const HeatKernelPlan& p, const PhaseField& f) { return to_array(p.grid(), convolve(p, f).values); },
          py::arg("field"));

  m.def(
      "rasterize_ball",
      [](const Grid& g, const std::vector<double>& c, double r) { return rasterize_ball(g, to_point(c), r); },
      py::arg("grid"), py::arg("center"), py::arg("radius"));
  m.def("rasterize_half_space", &rasterize_half_space, py::arg("grid"), py::arg("axis"), py::arg("offset"),
        py::arg("thickness"), py::arg("sign") = 1);
  m.def(
      "voronoi_labels",
      [](const Grid& g, const std::vector<std::vector<double>>& seeds, double margin) {
        const auto pts = to_points(seeds);
        return voronoi_labels(g, pts, margin);
      },
      py::arg("grid"), py::arg("seeds"), py::arg("vapor_margin") = 0.0);
  m.def(
      "voronoi_labels_in_ball",
      [](const Grid& g, const std::vector<std::vector<double>>& seeds, const std::vector<double>& c, double r) {
        const auto pts = to_points(seeds);
        return voronoi_labels_in_ball(g, pts, to_point(c), r);
      },
      py::arg("grid"), py::arg("seeds"), py::arg("center"), py::arg("radius"));

  m.def("step_mbo", &step_mbo, py::arg("plan"), py::arg("chi"));
  m.def(
      "step_volume_preserving",
      [](const HeatKernelPlan& p, const PhaseField& chi) {
        auto s = step_volume_preserving(p, chi);
        return py::make_tuple(std::move(s.next), s.lambda);
      },
      py::arg("plan"), py::arg("chi"), "Returns (next, lambda).");
  m.def(
      "step_forced",
      [](const HeatKernelPlan& p, const PhaseField& chi, double f) {
        return step_forced(p, chi, RealField(chi.grid, f));
      },
      py::arg("plan"), py::arg("chi"), py::arg("force"), "Forced step with a constant force value.");
  m.def(
      "step_grain_growth",
      [](const HeatKernelPlan& p, const MultiPhaseState& s, const SurfaceTensionMatrix& sigma) {
        auto st = step_grain_growth(p, s, sigma);
        return py::make_tuple(std::move(st.next), st.lambda);
      },
      py::arg("plan"), py::arg("state"), py::arg("sigma"), "Returns (next, lambda).");

  m.def("energy_two_phase", py::overload_cast<const HeatKernelPlan&, const PhaseField&>(&energy_two_phase),
        py::arg("plan"), py::arg("chi"));
  m.def("dissipation_two_phase",
        py::overload_cast<const HeatKernelPlan&, const PhaseField&, const PhaseField&>(&dissipation_two_phase),
        py::arg("plan"), py::arg("after"), py::arg("before"));
  m.def("energy_multiphase", &energy_multiphase, py::arg("plan"), py::arg("state"), py::arg("sigma"));
  m.def("dissipation_multiphase",
        py::overload_cast<const HeatKernelPlan&, const MultiPhaseState&, const MultiPhaseState&,
                          const SurfaceTensionMatrix&>(&dissipation_multiphase),
        py::arg("plan"), py::arg("after"), py::arg("before"), py::arg("sigma"));

  py::class_<Trajectory>(m, "Trajectory")
      .def_property_readonly("states",
                             [](const Trajectory& t) {
                               py::list out;
                               for (const auto& s : t.states) out.append(state_to_py(s));
                               return out;
                             })
      .def_property_readonly("records",
                             [](const Trajectory& t) {
                               py::list out;
                               for (const auto& r : t.records) out.append(record_to_dict(r));
                               return out;
                             })
      .def_property_readonly("status", [](const Trajectory& t) { return to_string(t.status); })
      .def_readonly("warnings", &Trajectory::warnings);

  m.def(
      "run",
      [](const std::string& scheme, double h, int steps, const py::object& initial,
         std::optional<std::function<double(double, double, double)>> force,
         std::optional<SurfaceTensionMatrix> sigma, bool stop_when_pinned, bool store_states) {
        const State init = state_from_py(initial);
        SchemeConfig cfg;
        cfg.kind = scheme_kind_from_string(scheme);
        cfg.h = h;
        cfg.steps = steps;
        cfg.grid = std::visit([](const auto& s) { return s.grid; }, init);
        cfg.stop_when_pinned = stop_when_pinned;
        cfg.store_states = store_states;
        if (force) {
          auto f = *force;
          cfg.force = [f](const Point& p, double t) {
            py::gil_scoped_acquire gil;
            return f(p[0], p[1], t);
          };
        }
        cfg.tensions = sigma;
        return run(cfg, init);
      },
      py::arg("scheme"), py::arg("h"), py::arg("steps"), py::arg("initial"), py::arg("force") = py::none(),
      py::arg("sigma") = py::none(), py::arg("stop_when_pinned") = true, py::arg("store_states") = true,
      "Runs mbo, volume_preserving, forced (force(x, y, t)) or grain_growth (sigma).");

  py::class_<LedgerReport>(m, "LedgerReport")
      .def_readonly("passed", &LedgerReport::pass)
      .def_readonly("slacks", &LedgerReport::slacks)
      .def_readonly("first_failure", &LedgerReport::first_failure)
      .def_readonly("worst_slack", &LedgerReport::worst_slack)
      .def_readonly("initial_energy", &LedgerReport::initial_energy)
      .def_readonly("final_energy", &LedgerReport::final_energy)
      .def_readonly("total_dissipation", &LedgerReport::total_dissipation)
      .def_readonly("cumulative_slack", &LedgerReport::cumulative_slack);
  m.def("ledger_check", &ledger_check, py::arg("trajectory"), py::arg("recompute") = true);

  m.def("circle_mcf", &circle_mcf, py::arg("r0"), py::arg("t"), py::arg("dim") = 2);
  m.def(
      "two_ball_vp",
      [](std::array<double, 2> r0, const std::vector<double>& times) {
        const auto b = two_ball_vp(r0, times);
        return py::make_tuple(b.radii, b.extinction_time);
      },
      py::arg("r0"), py::arg("times"), "Returns (radii[k][ball], extinction_time).");

  py::class_<JunctionAngles>(m, "JunctionAngles")
      .def_readonly("junction", &JunctionAngles::junction)
      .def_readonly("labels", &JunctionAngles::labels)
      .def_readonly("degrees", &JunctionAngles::degrees);
  m.def(
      "junction_angles",
      [](const MultiPhaseState& s, double window, std::optional<std::vector<double>> hint) {
        std::optional<Point> p;
        if (hint) p = to_point(*hint);
        return junction_angles(s, window, p);
      },
      py::arg("state"), py::arg("window"), py::arg("hint") = py::none());
}
