#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "arwmass/curvature.hpp"
#include "arwmass/imcf.hpp"
#include "arwmass/mass.hpp"
#include "arwmass/sads.hpp"

namespace py = pybind11;
using namespace arwmass;

namespace {

ARWSpec custom_spec(int n, double omega, const std::string& f, const std::string& psi, const std::string& lambda,
                    double a) {
  ARWSpec s;
  s.n = n;
  s.omega = omega;
  s.f = TimeFunction::from_expression(expr::parse(f));
  s.psi = expr::parse(psi);
  s.lambda = expr::parse(lambda);
  s.a = a;
  s.label = "custom";
  s.check();
  return s;
}

std::vector<double> schedule_of(const ARWSpec& spec, int K) { return geometric_schedule(spec.a, K); }

// NaN when the trajectory is too short for the estimates.
FlowDiagnostics flow_diagnostics_or_nan(const Trajectory& tr) {
  try {
    return flow_diagnostics(tr);
  } catch (const InvalidArgument&) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan};
  }
}

py::list matrix(const Mat& m, int dim) {
  py::list out;
  for (int a = 0; a < dim; ++a) {
    py::list row;
    for (int b = 0; b < dim; ++b) row.append(m[a][b]);
    out.append(row);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Mass of asymptotically Robertson-Walker spacetimes";

  py::register_exception<NumericalAbort>(m, "NumericalAbort", PyExc_ArithmeticError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<expr::ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<expr::UnboundVariable>(m, "UnboundVariable", PyExc_NameError);
  py::register_exception<expr::DomainError>(m, "DomainError", PyExc_ArithmeticError);

  py::class_<SAdSParams>(m, "SAdSParams")
      .def(py::init([](int n, double Lambda, double mass) {
             SAdSParams p{n, Lambda, mass};
             p.check();
             return p;
           }),
           py::arg("n") = 3, py::arg("Lambda") = 0.0, py::arg("m") = 1.0)
      .def_readonly("n", &SAdSParams::n)
      .def_readonly("Lambda", &SAdSParams::Lambda)
      .def_readonly("m", &SAdSParams::m);

  py::class_<ARWSpec>(m, "ARWSpec")
      .def_readonly("n", &ARWSpec::n)
      .def_readonly("omega", &ARWSpec::omega)
      .def_readonly("a", &ARWSpec::a)
      .def_readonly("sigma_scale", &ARWSpec::sigma_scale)
      .def_readonly("label", &ARWSpec::label)
      .def_property_readonly("gamma_tilde", &ARWSpec::gamma_tilde)
      .def("f", [](const ARWSpec& s, double t) { return s.f.derivatives(t); }, py::arg("t"),
           "f, f', f'', f''' at t")
      .def("__repr__", [](const ARWSpec& s) {
        return "<ARWSpec " + s.label + " n=" + std::to_string(s.n) + " omega=" + std::to_string(s.omega) + ">";
      });

  m.def("rw_family", &rw_family, py::arg("n") = 3, py::arg("omega") = 1.0, py::arg("k") = 1.0, py::arg("a") = -1.0);
  m.def("sads_spec", &as_arw_spec, py::arg("params"));
  m.def("custom_spec", &custom_spec, py::arg("n"), py::arg("omega"), py::arg("f"), py::arg("psi") = "0",
        py::arg("lambda_") = "0", py::arg("a") = -1.0);
  m.def("geometric_schedule", &geometric_schedule, py::arg("a"), py::arg("K") = 10);
  m.def("rescale", &rescale, py::arg("spec"), py::arg("lam"));
  m.def("normalize", [](const ARWSpec& s) { return normalize(s); }, py::arg("spec"));
  m.def("reparametrize_time", &reparametrize_time, py::arg("spec"), py::arg("eps"));

  m.def(
      "arw_validate",
      [](const ARWSpec& s, int K) {
        const ValidationReport r = arw_validate(s, schedule_of(s, K));
        py::dict d;
        d["times"] = r.times;
        d["f_prime"] = r.f_prime;
        d["mass_sequence"] = r.mass_sequence;
        d["mass_limit"] = r.mass_limit;
        d["curvature_sequence"] = r.curvature_sequence;
        d["dimension_ok"] = r.dimension_ok;
        d["f_prime_negative"] = r.f_prime_negative;
        d["mass_ok"] = r.mass_ok;
        d["curvature_divergent"] = r.curvature_divergent;
        d["derivative_bounds_ok"] = r.derivative_bounds_ok;
        d["sup_ratio2"] = r.sup_ratio2;
        d["sup_ratio3"] = r.sup_ratio3;
        d["passed"] = r.passed();
        return d;
      },
      py::arg("spec"), py::arg("K") = 12);

  m.def(
      "slice_mass_integral",
      [](const ARWSpec& s, double tau, int nodes) {
        return slice_mass_integral(s, tau, QuadratureGrid::sphere(s.n, nodes));
      },
      py::arg("spec"), py::arg("tau"), py::arg("nodes_per_axis") = 12);
  m.def(
      "graph_mass_integral",
      [](const ARWSpec& s, const std::string& u, int nodes) {
        return graph_mass_integral(s, GraphHypersurface(s.metric(), expr::parse(u)), QuadratureGrid::sphere(s.n, nodes));
      },
      py::arg("spec"), py::arg("u"), py::arg("nodes_per_axis") = 12, "u is an expression in theta1");
  m.def("mass_from_integral", &mass_from_integral, py::arg("n"), py::arg("integral"));

  m.def(
      "mass_limit",
      [](const ARWSpec& s, int K, int nodes) {
        const MassReport r = mass_limit(s, QuadratureGrid::sphere(s.n, nodes), schedule_of(s, K));
        py::dict d;
        d["times"] = r.times;
        d["integrals"] = r.integrals;
        d["limit"] = r.limit;
        d["m_hat"] = r.m_hat;
        d["error"] = r.error;
        d["monotone"] = r.monotone;
        return d;
      },
      py::arg("spec"), py::arg("K") = 10, py::arg("nodes_per_axis") = 12);

  m.def(
      "slab_balance",
      [](const ARWSpec& s, double t1, double t2, int nodes) {
        const SlabBalance b = slab_balance(s, t1, t2, QuadratureGrid::sphere(s.n, nodes));
        py::dict d;
        d["B1"] = b.B1;
        d["B2"] = b.B2;
        d["V"] = b.V;
        d["residual"] = b.residual;
        d["relative"] = b.relative;
        return d;
      },
      py::arg("spec"), py::arg("t1"), py::arg("t2"), py::arg("nodes_per_axis") = 12);

  m.def(
      "monotonicity_scan",
      [](const ARWSpec& s, int K, int nodes) {
        const MonotonicityReport r = monotonicity_scan(s, schedule_of(s, K), QuadratureGrid::sphere(s.n, nodes));
        py::dict d;
        d["times"] = r.times;
        d["integrals"] = r.integrals;
        d["trend"] = to_string(r.trend);
        d["strictly_increasing"] = r.strictly_increasing;
        d["g00_nonnegative"] = r.g00_nonnegative;
        d["gij_psd"] = r.gij_psd;
        d["convex"] = r.convex;
        return d;
      },
      py::arg("spec"), py::arg("K") = 8, py::arg("nodes_per_axis") = 8);

  m.def(
      "tcc_check",
      [](const ARWSpec& s, std::size_t events, int directions, std::uint64_t seed) {
        const auto ev = sample_events(s.n, events, s.a, 0.05 * s.a, seed);
        const TccReport r = tcc_check(s.metric(), ev, directions, seed + 1);
        py::dict d;
        d["minimum"] = r.minimum;
        d["samples"] = r.samples;
        d["violations"] = r.violations.size();
        return d;
      },
      py::arg("spec"), py::arg("events") = 100, py::arg("directions") = 32, py::arg("seed") = 0);

  m.def(
      "einstein_tensor",
      [](const ARWSpec& s, const std::vector<double>& event) {
        const CurvatureBundle c = curvature_at(s.metric(), event);
        return matrix(c.einstein, c.dim);
      },
      py::arg("spec"), py::arg("event"));
  m.def(
      "conformal_residuals",
      [](const ARWSpec& s, const std::vector<double>& event) {
        const ConformalResiduals r = conformal_residuals(s, event);
        return py::make_tuple(r.ricci, r.scalar);
      },
      py::arg("spec"), py::arg("event"));

  m.def(
      "imcf_run",
      [](const ARWSpec& s, double u0, double t_end, double tolerance) {
        ImcfOptions o;
        o.tolerance = tolerance;
        const Trajectory tr = imcf_run(s, u0, t_end, o);
        std::vector<double> t, u, H, f;
        for (const FlowState& st : tr.states) {
          t.push_back(st.t);
          u.push_back(st.u);
          H.push_back(st.H);
          f.push_back(st.f_of_u);
        }
        const FlowDiagnostics fd = flow_diagnostics_or_nan(tr);
        py::dict d;
        d["t"] = t;
        d["u"] = u;
        d["H"] = H;
        d["f_of_u"] = f;
        d["reached_singularity"] = tr.reached_singularity;
        d["slope"] = fd.slope;
        d["decay_rate"] = fd.decay_rate;
        return d;
      },
      py::arg("spec"), py::arg("u0"), py::arg("t_end"), py::arg("tolerance") = 1e-10);

  m.def("horizon", &horizon, py::arg("params"));
  m.def("x0_of_r", &x0_of_r, py::arg("params"), py::arg("r"));
  m.def("r_of_x0", &r_of_x0, py::arg("params"), py::arg("x0"));
  m.def("oracle_mass_integral", &oracle_mass_integral, py::arg("params"), py::arg("r"));
  m.def("sphere_volume", &sphere_volume, py::arg("n"));
}
