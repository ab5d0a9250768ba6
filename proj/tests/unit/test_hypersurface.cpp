#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "arwmass/hypersurface.hpp"
#include "arwmass/sads.hpp"
#include "doctest.h"

using namespace arwmass;
using expr::parse;

namespace {

constexpr double kPi = std::numbers::pi;

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

ARWSpec spec_with(const char* f, const char* psi, const char* lambda, int n) {
  ARWSpec s;
  s.n = n;
  s.f = TimeFunction::from_expression(parse(f));
  s.psi = parse(psi);
  s.lambda = parse(lambda);
  return s;
}

std::vector<double> random_node(std::mt19937_64& rng, int n) {
  std::vector<double> x;
  for (int k = 0; k < n; ++k) x.push_back(uniform(rng, 0.2, kPi - 0.2));
  return x;
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

TEST_CASE("graph_geometry examples") {
  const std::vector<double> node{0.3, 0.4, 0.5};
  const ExtrinsicData flat = second_fundamental(GraphHypersurface(SpacetimeMetric::flat(3), 0.7), node);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      CHECK(flat.g[i][j] == (i == j ? 1.0 : 0.0));
      CHECK(flat.h[i][j] == 0.0);
    }
  CHECK(flat.v == 1.0);
  CHECK(flat.nu[0] == -1.0);
  CHECK(flat.H == 0.0);

  const ARWSpec s = spec_with("log(-t)", "0", "0", 3);
  const double t0 = -0.6;
  const ExtrinsicData e = graph_geometry(GraphHypersurface(s.metric(), t0), node);
  const Mat round = round_sphere_metric(3, node);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(e.g[i][j] == doctest::Approx(t0 * t0 * round[i][j]).epsilon(1e-14).scale(1e-300));
  CHECK(e.nu[0] == doctest::Approx(-1.0 / (-t0)).epsilon(1e-14));
  for (int k = 1; k < 4; ++k) CHECK(e.nu[k] == 0.0);

  const ExtrinsicData tilt = graph_geometry(GraphHypersurface(SpacetimeMetric::flat(2), parse("0.3*theta1")),
                                            std::vector<double>{0.5, 0.1});
  CHECK(tilt.v * tilt.v == doctest::Approx(0.91).epsilon(1e-15));
}

TEST_CASE("mean curvature examples") {
  const ARWSpec s = spec_with("log(-t)", "0", "0", 3);
  const ExtrinsicData e = second_fundamental(GraphHypersurface(s.metric(), -2.0), std::vector<double>{1.0, 1.0, 1.0});
  CHECK(e.H == doctest::Approx(0.75).epsilon(1e-13));

  const SAdSParams p{3, 0.0, 1.0};
  const ARWSpec sads = as_arw_spec(p);
  const ExtrinsicData q =
      second_fundamental(GraphHypersurface(sads.metric(), x0_of_r(p, 0.5)), std::vector<double>{1.0, 1.0, 1.0});
  CHECK(q.H == doctest::Approx(3.0 * std::sqrt(3.0) / 0.5).epsilon(1e-10));
  CHECK(10.3923 == doctest::Approx(q.H).epsilon(1e-5));
}

TEST_CASE("not spacelike graph is reported with node and value") {
  const GraphHypersurface steep(SpacetimeMetric::flat(2), parse("1.5*theta1"));
  try {
    (void)graph_geometry(steep, std::vector<double>{0.5, 0.1});
    FAIL("expected NumericalAbort");
  } catch (const NumericalAbort& e) {
    const std::string what = e.what();
    CHECK(what.find("not spacelike") != std::string::npos);
    CHECK(what.find("2.25") != std::string::npos);
    CHECK(what.find("0.5") != std::string::npos);
  }
  CHECK_THROWS_AS(GraphHypersurface(SpacetimeMetric::flat(2), parse("t + theta1")), InvalidArgument);
}

TEST_CASE("slice curvature formula agrees with the graph formula") {
  std::mt19937_64 rng(11);
  const std::vector<ARWSpec> specs{
      spec_with("log(-t)", "0", "0", 3), rw_family(2, 1.0, 2.0),
      spec_with("log(-t)", "0.1*sin(t)*sin(theta1)^2", "0.2*t^2*sin(theta1)^2", 3),
      spec_with("0.5*log(-t) + t", "0.2*t*cos(theta1)", "0.1*t*sin(theta1)^2", 2), as_arw_spec({3, -1.0, 1.0})};
  for (const ARWSpec& s : specs) {
    const SpacetimeMetric m = s.metric();
    for (int i = 0; i < 20; ++i) {
      const double tau = uniform(rng, 0.9 * s.a, 0.05 * s.a);
      const std::vector<double> node = random_node(rng, s.n);
      const ExtrinsicData e = second_fundamental(GraphHypersurface(m, tau), node);
      const Mat hb = coordinate_slice_curvature(m, tau, node);
      double scale = 1.0;
      for (int a = 0; a < s.n; ++a)
        for (int b = 0; b < s.n; ++b) scale = std::fmax(scale, std::fabs(hb[a][b]));
      for (int a = 0; a < s.n; ++a)
        for (int b = 0; b < s.n; ++b) REQUIRE(std::fabs(e.h[a][b] - hb[a][b]) <= 1e-9 * scale);
    }
  }
}

TEST_CASE("Gauss and Codazzi examples") {
  const std::vector<double> node{0.9, 1.3, 2.0};
  const GaussCodazziResiduals f = gauss_codazzi_residuals(GraphHypersurface(SpacetimeMetric::flat(3), -0.5), node);
  CHECK(f.gauss_trace == 0.0);
  CHECK(f.gauss_full == 0.0);
  CHECK(f.codazzi == 0.0);

  const ARWSpec s = spec_with("log(-t)", "0", "0", 3);
  const GaussCodazziResiduals r = gauss_codazzi_residuals(GraphHypersurface(s.metric(), -1.0), node);
  CHECK(r.two_G_nu_nu == doctest::Approx(12.0).epsilon(1e-12));
  CHECK(r.gauss_trace <= 1e-8);
  CHECK(r.gauss_full <= 1e-8);
  CHECK(r.codazzi <= 1e-8);

  const GaussCodazziResiduals t = gauss_codazzi_residuals(GraphHypersurface(s.metric(), parse("-1 + 0.05*cos(theta1)")), node);
  CHECK(t.gauss_trace <= 1e-7);
  CHECK(t.gauss_full <= 1e-7);
  CHECK(t.codazzi <= 1e-7);
  CHECK(t.codazzi_scale > 1e-3);  // the tilt makes the Codazzi terms nonzero
}

TEST_CASE("property: normal and index identities on random graphs") {
  std::mt19937_64 rng(12);
  const std::vector<ARWSpec> specs{spec_with("log(-t)", "0.1*sin(t)*sin(theta1)^2", "0.2*t*sin(theta1)^2", 3),
                                   spec_with("log(-t)", "0.1*t*cos(theta1)", "0", 2), rw_family(3, 2.0, 1.0),
                                   as_arw_spec({3, 0.0, 1.0})};
  const std::vector<std::string> shapes{"0", "cos(theta1)", "sin(theta1)^2", "theta1*(3.14159-theta1)"};
  for (const ARWSpec& s : specs) {
    const SpacetimeMetric m = s.metric();
    for (int i = 0; i < 25; ++i) {
      const double tau = uniform(rng, 0.8 * s.a, 0.2 * s.a);
      const double amp = uniform(rng, -0.05, 0.05) * std::fabs(tau);
      const std::string u = num(tau) + " + " + num(amp) + "*(" + shapes[static_cast<std::size_t>(i) % shapes.size()] + ")";
      const GraphHypersurface g(m, parse(u));
      const std::vector<double> node = random_node(rng, s.n);
      const ExtrinsicData e = second_fundamental(g, node);
      const MetricSample amb = metric_at(m, e.event);
      const int N = s.n + 1;
      double nn = 0.0;
      for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b) nn += amb.g[a][b] * e.nu[a] * e.nu[b];
      REQUIRE(nn == doctest::Approx(-1.0).epsilon(1e-10));
      CHECK(e.nu[0] < 0.0);
      for (int k = 0; k < s.n; ++k) {
        double t = 0.0;
        for (int a = 0; a < N; ++a) t += e.nu_lower[a] * e.tangent[k][a];
        REQUIRE(std::fabs(t) <= 1e-10 * std::fabs(std::exp(2.0 * e.psi)));
      }
      // g^{ij} = e^{-2 psi}(sigma^{ij} + u^i u^j / v^2) with diagonal sigma
      const auto hu = g.height(node[0]);
      for (int a = 0; a < s.n; ++a)
        for (int b = 0; b < s.n; ++b) {
          const double sig = a == b ? std::exp(-2.0 * e.psi) * amb.g[a + 1][b + 1] : 0.0;
          double expected = a == b ? 1.0 / sig : 0.0;
          if (a == 0 && b == 0) expected += (hu[1] / sig) * (hu[1] / sig) / (e.v * e.v);
          expected *= std::exp(-2.0 * e.psi);
          REQUIRE(e.g_inv[a][b] == doctest::Approx(expected).epsilon(1e-10).scale(1e-300));
        }
      double hscale = 1e-300;
      for (int a = 0; a < s.n; ++a)
        for (int b = 0; b < s.n; ++b) hscale = std::fmax(hscale, std::fabs(e.h[a][b]));
      const EmbeddingHessianCheck c = embedding_hessian_check(g, node);
      for (int a = 0; a < s.n; ++a)
        for (int b = 0; b < s.n; ++b) {
          REQUIRE(e.h[a][b] == e.h[b][a]);
          REQUIRE(std::fabs(c.h[a][b] - e.h[a][b]) <= 1e-9 * hscale);
        }
      REQUIRE(c.tangential <= 1e-9 * std::fmax(1.0, hscale * std::exp(e.psi)));
    }
  }
}

TEST_CASE("property: Gauss, Codazzi and conformal relations on random graphs") {
  std::mt19937_64 rng(13);
  const std::vector<ARWSpec> specs{spec_with("log(-t)", "0.1*sin(t)*sin(theta1)^2", "0.2*t*sin(theta1)^2", 3),
                                   spec_with("log(-t)", "0.1*t*cos(theta1)", "0", 2), rw_family(3, 1.0, 1.0),
                                   as_arw_spec({3, -1.0, 1.0}), as_arw_spec({2, 0.0, 1.0})};
  for (const ARWSpec& s : specs) {
    const SpacetimeMetric m = s.metric();
    for (int i = 0; i < 20; ++i) {
      const double tau = uniform(rng, 0.8 * s.a, 0.2 * s.a);
      const double amp = (i % 2 == 0) ? 0.0 : 0.05 * std::fabs(tau);
      const GraphHypersurface g(m, parse(num(tau) + " + " + num(amp) + "*cos(theta1)"));
      const std::vector<double> node = random_node(rng, s.n);
      const GaussCodazziResiduals r = gauss_codazzi_residuals(g, node);
      REQUIRE(r.gauss_trace <= 1e-7 * std::fmax(1.0, r.trace_scale));
      REQUIRE(r.gauss_full <= 1e-6 * std::fmax(1.0, r.full_scale));
      REQUIRE(r.codazzi <= 1e-6 * std::fmax(1.0, r.codazzi_scale));
      REQUIRE(conformal_extrinsic_residual(g, node).relative <= 1e-8);
    }
  }
}
