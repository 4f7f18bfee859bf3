#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <random>
#include <sstream>

#include "heatctl/config.hpp"
#include "heatctl/oracle.hpp"
#include "heatctl/pde.hpp"
#include "heatctl/reach.hpp"
#include "heatctl/runner.hpp"
#include "heatctl/solvers.hpp"

namespace py = pybind11;
using namespace heatctl;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Vector to_vector(const Array& a) {
  if (a.ndim() != 1) throw DimensionError("expected a one-dimensional array");
  return Vector(a.data(), a.data() + a.size());
}

Array to_array(std::span<const double> v) { return Array(static_cast<py::ssize_t>(v.size()), v.data()); }

Array to_matrix(std::span<const double> v, std::size_t rows, std::size_t cols) {
  Array out({static_cast<py::ssize_t>(rows), static_cast<py::ssize_t>(cols)});
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

SolverOptions solver_options(std::size_t steps, double tol_T_rel, double tol_M_rel, std::size_t max_iters) {
  SolverOptions o;
  o.reach.steps = steps;
  o.reach.max_iters = max_iters;
  o.tol_T_rel = tol_T_rel;
  o.tol_M_rel = tol_M_rel;
  return o;
}

py::dict point_dict(const ValuePoint& p, const SpatialGrid& g) {
  py::dict d;
  d["parameter"] = p.parameter;
  d["value"] = p.value;
  d["bracket_lo"] = p.bracket_lo;
  d["bracket_hi"] = p.bracket_hi;
  d["iterations"] = p.iterations;
  d["oracle_calls"] = p.oracle_calls;
  d["inconclusive"] = p.inconclusive;
  d["control_horizon"] = p.control_horizon;
  d["control_norms"] = to_array(p.control.pointwise_norms(g));
  return d;
}

}  // namespace

PYBIND11_MODULE(_heatctl, m) {
  m.doc() = "Minimal-time and minimal-norm control of the 1D semilinear heat equation";

  auto& base = py::register_exception<Error>(m, "HeatctlError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<H2Violation>(m, "H2Violation", base.ptr());
  py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);

  py::class_<SpatialGrid>(m, "Grid")
      .def(py::init<double, std::size_t, double, double>(), py::arg("ell"), py::arg("n"), py::arg("a"), py::arg("b"))
      .def_static("full", &SpatialGrid::global, py::arg("ell"), py::arg("n"), "Control region equal to the domain.")
      .def_property_readonly("n", &SpatialGrid::n)
      .def_property_readonly("h", &SpatialGrid::h)
      .def_property_readonly("ell", &SpatialGrid::ell)
      .def_property_readonly("omega", [](const SpatialGrid& g) { return py::make_tuple(g.omega_a(), g.omega_b()); })
      .def_property_readonly("nodes",
                             [](const SpatialGrid& g) {
                               Vector x(g.n());
                               for (std::size_t i = 0; i < g.n(); ++i) x[i] = g.node(i);
                               return to_array(x);
                             })
      .def_property_readonly("mask", [](const SpatialGrid& g) { return to_array(g.mask()); })
      .def("__repr__", [](const SpatialGrid& g) {
        std::ostringstream os;
        os << "Grid(ell=" << g.ell() << ", n=" << g.n() << ", omega=(" << g.omega_a() << ", " << g.omega_b() << "))";
        return os.str();
      });

  py::class_<NonlinearitySpec>(m, "Nonlinearity")
      .def_static("zero", &NonlinearitySpec::zero)
      .def_static("tanh", &NonlinearitySpec::tanh, py::arg("L"))
      .def_static("rational", &NonlinearitySpec::rational, py::arg("L"))
      .def_property_readonly("kind", [](const NonlinearitySpec& f) { return to_string(f.kind()); })
      .def_property_readonly("L", &NonlinearitySpec::lipschitz)
      .def("value", &NonlinearitySpec::value, py::arg("y"))
      .def("derivative", &NonlinearitySpec::derivative, py::arg("y"));

  m.def("l2_norm", [](const Array& v, const SpatialGrid& g) { return l2_norm(to_vector(v), g); }, py::arg("v"),
        py::arg("grid"));
  m.def("eigenmode", [](const SpatialGrid& g, std::size_t i) { return to_array(eigenmode(g, i)); }, py::arg("grid"),
        py::arg("i"));
  m.def("first_eigenvalue", &first_eigenvalue, py::arg("grid"));

  m.def(
      "simulate",
      [](const Array& y0, double horizon, std::size_t steps, const NonlinearitySpec& f, const SpatialGrid& g) {
        const auto y = solve_free(to_vector(y0), horizon / static_cast<double>(steps), steps, f, g);
        Vector t(steps + 1);
        for (std::size_t k = 0; k <= steps; ++k) t[k] = y.time(k);
        Vector states;
        states.reserve((steps + 1) * g.n());
        for (std::size_t k = 0; k <= steps; ++k) states.insert(states.end(), y.state(k).begin(), y.state(k).end());
        py::dict d;
        d["t"] = to_array(t);
        d["norms"] = to_array(y.norms());
        d["states"] = to_matrix(states, steps + 1, g.n());
        return d;
      },
      py::arg("y0"), py::arg("horizon"), py::arg("steps"), py::arg("f"), py::arg("grid"),
      "Uncontrolled trajectory: times, norms and states.");

  py::class_<Problem>(m, "Problem")
      .def(py::init([](const SpatialGrid& g, const NonlinearitySpec& f, const Array& y0, double r) {
             Problem p{g, f, to_vector(y0), TargetBall(r)};
             p.validate();
             return p;
           }),
           py::arg("grid"), py::arg("f"), py::arg("y0"), py::arg("r"))
      .def_property_readonly("grid", [](const Problem& p) { return p.grid; })
      .def_property_readonly("r", [](const Problem& p) { return p.ball.r(); })
      .def_property_readonly("y0", [](const Problem& p) { return to_array(p.y0); });

  m.def(
      "gamma",
      [](const Problem& p, std::size_t steps) { return gamma(p, solver_options(steps, 1e-3, 1e-3, 400)); },
      py::arg("problem"), py::arg("steps") = 400);
  m.def(
      "minimal_norm",
      [](double T, const Problem& p, std::size_t steps, double tol, std::size_t max_iters) {
        ValuePoint vp;
        {
          py::gil_scoped_release release;
          vp = minimal_norm(T, p, solver_options(steps, tol, tol, max_iters));
        }
        return point_dict(vp, p.grid);
      },
      py::arg("T"), py::arg("problem"), py::arg("steps") = 400, py::arg("tol") = 1e-3, py::arg("max_iters") = 400);
  m.def(
      "minimal_time",
      [](double M, const Problem& p, std::size_t steps, double tol, std::size_t max_iters) {
        ValuePoint vp;
        {
          py::gil_scoped_release release;
          vp = minimal_time(M, p, solver_options(steps, tol, tol, max_iters));
        }
        return point_dict(vp, p.grid);
      },
      py::arg("M"), py::arg("problem"), py::arg("steps") = 400, py::arg("tol") = 1e-3, py::arg("max_iters") = 400);
  m.def(
      "feasible",
      [](const Problem& p, double T, double M, std::size_t steps) {
        ReachOptions o;
        o.steps = steps;
        return feasible(p.y0, T, M, p.ball, p.f, p.grid, o);
      },
      py::arg("problem"), py::arg("T"), py::arg("M"), py::arg("steps") = 400);

  m.def(
      "gradient_check",
      [](const Problem& p, double T, double M, std::size_t steps, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        const double dt = T / static_cast<double>(steps);
        const auto v = random_smooth_control(p.grid, dt, steps, M, rng);
        const auto d = random_smooth_control(p.grid, dt, steps, 1.0, rng);
        const GradientCheck c = gradient_fd_check(p.y0, v, d, p.f, p.grid);
        return py::make_tuple(c.adjoint_derivative, c.fd_derivative, c.relative_error);
      },
      py::arg("problem"), py::arg("T"), py::arg("M"), py::arg("steps") = 200, py::arg("seed") = 1,
      "(adjoint derivative, finite-difference derivative, relative error) for one random pair.");

  m.def(
      "scalar_tau", [](double a0, double r, double lam, double M) { return scalar_tau(ScalarInstance(a0, r, lam), M); },
      py::arg("a0"), py::arg("r"), py::arg("lam"), py::arg("M"));
  m.def(
      "scalar_alpha",
      [](double a0, double r, double lam, double T) { return scalar_alpha(ScalarInstance(a0, r, lam), T); },
      py::arg("a0"), py::arg("r"), py::arg("lam"), py::arg("T"));

  m.def(
      "bruteforce_alpha",
      [](const Problem& p, double T, std::size_t k_modes, std::size_t m_intervals, const Vector& amp_grid,
         std::size_t steps) {
        BruteForceOptions o;
        o.k_modes = k_modes;
        o.m_intervals = m_intervals;
        o.amp_grid = amp_grid;
        o.steps = steps;
        BruteForceBracket b;
        {
          py::gil_scoped_release release;
          b = galerkin_bruteforce_alpha(p.y0, T, o, p.f, p.grid, p.ball);
        }
        py::dict d;
        d["lower"] = b.lower ? py::object(py::float_(*b.lower)) : py::none();
        d["upper"] = b.upper ? py::object(py::float_(*b.upper)) : py::none();
        d["candidates"] = b.candidates;
        return d;
      },
      py::arg("problem"), py::arg("T"), py::arg("k_modes"), py::arg("m_intervals"), py::arg("amp_grid"),
      py::arg("steps") = 400);

  m.def(
      "run",
      [](const std::string& subcommand, const std::string& config, const std::string& out,
         const std::vector<std::string>& overrides, std::optional<double> value) {
        std::ostringstream log;
        int rc = 0;
        {
          py::gil_scoped_release release;
          rc = run({subcommand, config, out, overrides, value}, log);
        }
        return py::make_tuple(rc, log.str());
      },
      py::arg("subcommand"), py::arg("config"), py::arg("out"), py::arg("overrides") = std::vector<std::string>{},
      py::arg("value") = py::none(), "Runs a CLI subcommand; returns (exit code, log text).");

  m.attr("EXIT_OK") = static_cast<int>(kExitOk);
  m.attr("EXIT_FAILURE") = static_cast<int>(kExitFailure);
  m.attr("EXIT_INVALID_CONFIG") = static_cast<int>(kExitInvalidConfig);
  m.attr("EXIT_H2_VIOLATION") = static_cast<int>(kExitH2Violation);
}
