#include <cmath>
#include <numbers>
#include <vector>

#include "arwmass/imcf.hpp"
#include "arwmass/sads.hpp"
#include "doctest.h"

using namespace arwmass;
using expr::parse;

namespace {

const double k6Pi2 = 6.0 * std::numbers::pi * std::numbers::pi;

ARWSpec spec_with(const char* f, const char* psi, const char* lambda, int n) {
  ARWSpec s;
  s.n = n;
  s.f = TimeFunction::from_expression(parse(f));
  s.psi = parse(psi);
  s.lambda = parse(lambda);
  return s;
}

}  // namespace

TEST_CASE("imcf on the exact family") {
  const ARWSpec rw = rw_family(3, 1.0, 1.0);
  const Trajectory tr = imcf_run(rw, -0.5, 3.0);
  CHECK(tr.states.back().t == 3.0);
  CHECK(tr.states.back().u == doctest::Approx(-0.1839397).epsilon(1e-7));
  CHECK(std::fabs(tr.states.back().u + 0.5 * std::exp(-1.0)) <= 1e-8);
  double worst = 0.0;
  for (const FlowState& s : tr.states) {
    worst = std::fmax(worst, std::fabs(s.u + 0.5 * std::exp(-s.t / 3.0)));
    CHECK(s.H > 0.0);
    CHECK(s.f_of_u == doctest::Approx(std::log(0.5) - s.t / 3.0).epsilon(1e-9).scale(1.0));
    CHECK(s.dfdt == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
  }
  CHECK(worst <= 1e-9);
  CHECK(!tr.reached_singularity);
}

TEST_CASE("flow diagnostics") {
  const FlowDiagnostics d = flow_diagnostics(imcf_run(rw_family(3, 1.0, 1.0), -0.5, 30.0));
  CHECK(std::fabs(d.slope + 1.0 / 3.0) <= 1e-9);
  CHECK(std::fabs(d.decay_rate + 1.0 / 3.0) <= 1e-9);

  const FlowDiagnostics d2 = flow_diagnostics(imcf_run(rw_family(2, 1.0, 1.0), -0.5, 40.0));
  CHECK(std::fabs(d2.decay_rate + 0.25) <= 1e-6);
  CHECK(std::fabs(d2.slope + 0.5) <= 1e-6);

  const SAdSParams p{3, 0.0, 1.0};
  const ARWSpec s = as_arw_spec(p);
  const Trajectory ts = imcf_run(s, x0_of_r(p, 0.5), 20.0);
  for (const FlowState& st : ts.states) REQUIRE(st.H > 0.0);
  for (std::size_t k = 1; k < ts.states.size(); ++k) REQUIRE(ts.states[k].u > ts.states[k - 1].u);
  const FlowDiagnostics ds = flow_diagnostics(ts);
  CHECK(std::fabs(ds.slope + 1.0 / 3.0) <= 1e-4);

  CHECK_THROWS_AS(flow_diagnostics(imcf_run(rw_family(3, 1.0, 1.0), -0.5, 3.0)), InvalidArgument);
}

TEST_CASE("imcf errors") {
  const ARWSpec rw = rw_family(3, 1.0, 1.0);
  CHECK_THROWS_AS(imcf_run(rw, -1.5, 1.0), InvalidArgument);
  CHECK_THROWS_AS(imcf_run(rw, 0.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(imcf_run(spec_with("log(-t)", "0.1*cos(theta1)", "0", 3), -0.5, 1.0), InvalidArgument);
  // psi' outweighs f', so the slices are past-mean-concave
  CHECK_THROWS_AS(imcf_run(spec_with("log(-t)", "-5*t^2", "0", 3), -0.5, 1.0), NumericalAbort);

  ImcfOptions halt;
  halt.halt_u = 1e-3;
  const Trajectory tr = imcf_run(rw, -0.5, 100.0, halt);
  CHECK(tr.reached_singularity);
  CHECK(std::fabs(tr.states.back().u) < 1e-3);
  CHECK(tr.states.back().t < 100.0);
}

TEST_CASE("tau-dependent psi and lambda") {
  const ARWSpec s = spec_with("log(-t)", "0.1*t", "0.2*t", 3);
  const Trajectory tr = imcf_run(s, -0.5, 25.0);
  const FlowDiagnostics d = flow_diagnostics(tr);
  CHECK(std::fabs(d.slope + 1.0 / 3.0) <= 1e-3);
  for (const FlowState& st : tr.states) REQUIRE(st.H > 0.0);
}

TEST_CASE("mass along the flow") {
  const QuadratureGrid grid = QuadratureGrid::sphere(3, 12);
  const SAdSParams p{3, 0.0, 1.0};
  const ARWSpec s = as_arw_spec(p);
  const Trajectory ts = imcf_run(s, x0_of_r(p, 0.5), 10.0);
  const FlowMass ms = mass_along_flow(s, ts, grid, 5);
  CHECK(ms.times.back() == 10.0);
  for (double v : ms.integrals) REQUIRE(v == doctest::Approx(k6Pi2).epsilon(1e-5));

  const ARWSpec rw = rw_family(3, 1.0, 1.0);
  const Trajectory tr = imcf_run(rw, -0.5, 30.0);
  const FlowMass mr = mass_along_flow(rw, tr, grid, 4);
  CHECK(mr.integrals.back() == doctest::Approx(k6Pi2).epsilon(1e-7));
  CHECK(mr.h2_form.back() == doctest::Approx(k6Pi2).epsilon(1e-6));
  CHECK(std::fabs(mr.lemma.back()) <= 1e-6);
  for (std::size_t k = 1; k < mr.lemma.size(); ++k) CHECK(std::fabs(mr.lemma[k]) < std::fabs(mr.lemma[k - 1]));
  // oracle on slices of the exact family: I = 6 pi^2 (1 + u^2), R |S^3| weight = 12 pi^2 u^2
  for (std::size_t k = 0; k < mr.times.size(); ++k) {
    const double u = -0.5 * std::exp(-mr.times[k] / 3.0);
    CHECK(mr.integrals[k] == doctest::Approx(k6Pi2 * (1.0 + u * u)).epsilon(1e-8));
    CHECK(mr.lemma[k] == doctest::Approx(2.0 * k6Pi2 * u * u).epsilon(1e-7));
  }
}

TEST_CASE("property: Gauss rewriting of the flow integrals") {
  const QuadratureGrid grid = QuadratureGrid::sphere(3, 10);
  for (const ARWSpec& s : {rw_family(3, 1.0, 1.0), as_arw_spec({3, -1.0, 1.0}), spec_with("log(-t)", "0.1*t", "0.2*t", 3)}) {
    const Trajectory tr = imcf_run(s, 0.5 * s.a, 8.0);
    const FlowMass m = mass_along_flow(s, tr, grid, 3);
    for (std::size_t k = 0; k < m.times.size(); ++k)
      REQUIRE(m.integrals[k] == doctest::Approx(m.h2_form[k] + 0.5 * m.lemma[k]).epsilon(1e-8));
  }
}

TEST_CASE("property: step halving order") {
  const SAdSParams p{3, 0.0, 1.0};
  const ARWSpec s = as_arw_spec(p);
  const double u0 = x0_of_r(p, 0.5);
  auto end_value = [&](double h) {
    ImcfOptions o;
    o.fixed_step = h;
    return imcf_run(s, u0, 4.0, o).states.back().u;
  };
  const double u1 = end_value(0.8);
  const double u2 = end_value(0.4);
  const double u3 = end_value(0.2);
  const double order = std::log2(std::fabs(u1 - u2) / std::fabs(u2 - u3));
  CHECK(order >= 4.0);
  ImcfOptions tight;
  tight.tolerance = 1e-13;
  CHECK(u3 == doctest::Approx(imcf_run(s, u0, 4.0, tight).states.back().u).epsilon(1e-6));
}
