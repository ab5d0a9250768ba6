#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "arwmass/arw.hpp"
#include "arwmass/geometry.hpp"
#include "arwmass/jet.hpp"
#include "arwmass/quadrature.hpp"
#include "doctest.h"

using namespace arwmass;
using expr::parse;

namespace {

constexpr double kPi = std::numbers::pi;

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Christoffels from central differences of metric_at(...).g only.
Rank3 fd_christoffel(const SpacetimeMetric& m, std::vector<double> x, double h) {
  const int n = m.dim();
  Rank3 dg{};
  for (int c = 0; c < n; ++c) {
    const double x0 = x[c];
    x[c] = x0 + h;
    const Mat gp = metric_at(m, x).g;
    x[c] = x0 - h;
    const Mat gm = metric_at(m, x).g;
    x[c] = x0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) dg[c][a][b] = (gp[a][b] - gm[a][b]) / (2.0 * h);
  }
  const Mat gi = metric_at(m, x).g_inv;
  Rank3 gamma{};
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        double s = 0.0;
        for (int d = 0; d < n; ++d) s += gi[a][d] * (dg[b][d][c] + dg[c][d][b] - dg[d][b][c]);
        gamma[a][b][c] = 0.5 * s;
      }
  return gamma;
}

ARWSpec perturbed_spec(int n, double c1, double c2) {
  ARWSpec s;
  s.n = n;
  s.omega = 1.0;
  s.f = TimeFunction::from_expression(parse("log(-t)"));
  s.psi = expr::bind(parse("c*sin(t)*sin(theta1)^2"), {{"c", c1}});
  s.lambda = expr::bind(parse("c*t^2*sin(theta1)^2"), {{"c", c2}});
  return s;
}

SpacetimeMetric round_s2_block() {
  std::vector<ScalarField> sigma{ScalarField::constant(1.0), ScalarField(), ScalarField(),
                                 ScalarField::from_expression(parse("sin(theta1)^2"))};
  return SpacetimeMetric(2, ScalarField(), sigma);
}

}  // namespace

TEST_CASE("jet arithmetic and composition match direct expansions") {
  // F(x, y) = exp(x) * y^2 at (0.3, 1.2); compose with x = s*s, y = s + 1 at s = 0.7.
  const Jet x = Jet::coordinate(2, 0, 0.49);
  const Jet y = Jet::coordinate(2, 1, 1.7);
  const Jet F = exp(x) * y * y;
  const Jet s = Jet::coordinate(1, 0, 0.7);
  const std::array<Jet, 2> inner{s * s, s + 1.0};
  const Jet G = compose(F, inner);
  // G(s) = exp(s^2) (s+1)^2
  const double e = std::exp(0.49);
  CHECK(G.v == doctest::Approx(e * 1.7 * 1.7).epsilon(1e-14));
  const double g1 = e * (2 * 0.7 * 1.7 * 1.7 + 2 * 1.7);
  CHECK(G.d[0] == doctest::Approx(g1).epsilon(1e-14));
  const double g2 = e * ((2 + 4 * 0.49) * 1.7 * 1.7 + 8 * 0.7 * 1.7 + 2);
  CHECK(G.dd[0][0] == doctest::Approx(g2).epsilon(1e-13));
}

TEST_CASE("metric_at examples") {
  const std::vector<double> ev{0.3, 1.0, 2.0, 0.5};
  const MetricSample flat = metric_at(SpacetimeMetric::flat(3), ev);
  CHECK(flat.g[0][0] == -1.0);
  for (int i = 1; i < 4; ++i) CHECK(flat.g[i][i] == 1.0);
  for (int c = 0; c < 4; ++c)
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) CHECK(flat.dg[c][a][b] == 0.0);

  ARWSpec s;
  s.f = TimeFunction::from_expression(parse("log(-tau)"));
  const std::vector<double> e2{-2.0, 1.1, 0.7, 2.0};
  const MetricSample m = metric_at(s.metric(), e2);
  CHECK(m.g[0][0] == doctest::Approx(-4.0).epsilon(1e-15));
  const Mat sbar = round_sphere_metric(3, std::span<const double>(e2).subspan(1));
  for (int i = 0; i < 3; ++i) CHECK(m.g[i + 1][i + 1] == doctest::Approx(4.0 * sbar[i][i]).epsilon(1e-15));
}

TEST_CASE("degenerate metric is reported with the event") {
  const SpacetimeMetric m = round_s2_block();
  try {
    metric_at(m, std::vector<double>{0.0, 0.0, 1.0});
    FAIL("expected NumericalAbort");
  } catch (const NumericalAbort& e) {
    CHECK(std::string(e.what()).find("(0, 0, 1)") != std::string::npos);
  }
}

TEST_CASE("property: inverse metric at 1000 random events") {
  std::mt19937_64 rng(1);
  const std::vector<SpacetimeMetric> metrics{rw_family(3, 1.0, 1.0).metric(), rw_family(2, 1.0, 2.0).metric(),
                                             perturbed_spec(3, 0.1, 0.2).metric(),
                                             perturbed_spec(2, -0.2, 0.1).metric()};
  for (const SpacetimeMetric& m : metrics) {
    for (int i = 0; i < 1000; ++i) {
      std::vector<double> ev{uniform(rng, -1.0, -0.05)};
      for (int k = 0; k < m.spatial_dim(); ++k) ev.push_back(uniform(rng, 0.1, kPi - 0.1));
      const MetricSample s = metric_at(m, ev);
      double err = 0.0;
      for (int a = 0; a < s.dim; ++a)
        for (int b = 0; b < s.dim; ++b) {
          double acc = 0.0;
          for (int c = 0; c < s.dim; ++c) acc += s.g_inv[a][c] * s.g[c][b];
          err = std::fmax(err, std::fabs(acc - (a == b ? 1.0 : 0.0)));
        }
      REQUIRE(err <= 1e-12);
    }
  }
}

TEST_CASE("christoffel examples") {
  const Rank3 flat = christoffel_at(SpacetimeMetric::flat(2), std::vector<double>{0.0, 0.4, 0.2});
  for (const Mat& m : flat)
    for (const Vec& r : m)
      for (double v : r) CHECK(v == 0.0);

  const SpacetimeMetric s2 = round_s2_block();
  const std::vector<double> ev{0.0, kPi / 3.0, 0.4};
  const Rank3 oracle = fd_christoffel(s2, ev, 1e-5);
  CHECK(oracle[1][2][2] == doctest::Approx(-0.4330127).epsilon(1e-7));
  const Rank3 g = christoffel_at(s2, ev);
  CHECK(g[1][2][2] == doctest::Approx(-std::sin(kPi / 3) * std::cos(kPi / 3)).epsilon(1e-15));
  CHECK(g[1][2][2] == doctest::Approx(oracle[1][2][2]).epsilon(1e-9));
}

TEST_CASE("property: christoffel agrees with finite differences on random specs") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100; ++i) {
    const int n = (i % 2) ? 2 : 3;
    const ARWSpec spec = perturbed_spec(n, uniform(rng, -0.3, 0.3), uniform(rng, -0.3, 0.3));
    const SpacetimeMetric m = spec.metric();
    std::vector<double> ev{uniform(rng, -1.0, -0.2)};
    for (int k = 0; k < n; ++k) ev.push_back(uniform(rng, 0.3, kPi - 0.3));
    const Rank3 exact = christoffel_at(m, ev);
    const Rank3 fd = fd_christoffel(m, ev, 1e-4);
    double err = 0.0;
    for (int a = 0; a <= n; ++a)
      for (int b = 0; b <= n; ++b)
        for (int c = 0; c <= n; ++c) {
          err = std::fmax(err, std::fabs(exact[a][b][c] - fd[a][b][c]));
          REQUIRE(exact[a][b][c] == exact[a][c][b]);
        }
    CHECK(err <= 1e-6);
  }
}

TEST_CASE("connection derivatives agree with finite differences of christoffel_at") {
  const ARWSpec spec = perturbed_spec(3, 0.2, -0.15);
  const SpacetimeMetric m = spec.metric();
  std::vector<double> ev{-0.6, 1.1, 0.9, 2.0};
  const Connection c = connection_from(metric_at(m, ev));
  const double h = 1e-5;
  for (int e = 0; e < 4; ++e) {
    std::vector<double> p = ev;
    std::vector<double> q = ev;
    p[e] += h;
    q[e] -= h;
    const Rank3 gp = christoffel_at(m, p);
    const Rank3 gm = christoffel_at(m, q);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int k = 0; k < 4; ++k)
          CHECK(c.dgamma[e][a][b][k] == doctest::Approx((gp[a][b][k] - gm[a][b][k]) / (2 * h)).epsilon(1e-6).scale(1.0));
  }
}

TEST_CASE("conformal factor is f + psi exactly") {
  const ARWSpec spec = perturbed_spec(3, 0.1, 0.0);
  const auto e = spec.conformal_factor_expression();
  REQUIRE(e.has_value());
  const expr::Bindings b{{"t", -0.4}, {"theta1", 0.8}};
  CHECK(e->evaluate(b) == spec.f.expression()->evaluate(b) + spec.psi.evaluate(b));
  const std::vector<double> ev{-0.4, 0.8, 1.0, 1.0};
  CHECK(spec.conformal_factor().value(ev) == doctest::Approx(e->evaluate(b)).epsilon(1e-15));
}

TEST_CASE("quadrature grids") {
  const QuadratureGrid s3 = QuadratureGrid::sphere(3, 48);
  for (int k = 0; k < 3; ++k) {
    const QuadratureAxis& a = s3.axis(k);
    double sum = 0.0;
    for (std::size_t j = 0; j < a.nodes.size(); ++j) {
      CHECK(a.nodes[j] > a.lo);
      CHECK(a.nodes[j] < a.hi);
      CHECK(a.weights[j] > 0.0);
      sum += a.weights[j];
    }
    CHECK(sum == doctest::Approx(a.hi - a.lo).epsilon(1e-14));
  }
  auto one = [](std::span<const double>) { return 1.0; };
  auto round3 = [](std::span<const double> x) { return round_sphere_metric(3, x); };
  CHECK(std::fabs(integrate_slice(s3, one, round3) - 2.0 * kPi * kPi) <= 1e-8);
  CHECK(integrate_slice(s3, one, round3) == doctest::Approx(19.7392088).epsilon(1e-9));

  const QuadratureGrid s2 = QuadratureGrid::sphere(2, 48);
  auto round2 = [](std::span<const double> x) { return round_sphere_metric(2, x); };
  CHECK(integrate_slice(s2, one, round2) == doctest::Approx(4.0 * kPi).epsilon(1e-12));
  CHECK(std::fabs(integrate_slice(s2, [](std::span<const double> x) { return std::cos(x[0]); }, round2)) <= 1e-13);

  // The x1-only shortcut equals the full tensor quadrature.
  auto dens = [](std::span<const double> x) { return 1.0 + 0.3 * std::cos(x[0]) * std::cos(x[0]); };
  const double full = integrate_slice(s3, dens, round3);
  const double fast = integrate_x1(s3, [&](std::span<const double> p) {
    return dens(p) * std::sqrt(determinant(round3(p), 3));
  });
  CHECK(fast == doctest::Approx(full).epsilon(1e-13));

  CHECK_THROWS_AS(integrate_slice(s2, [](std::span<const double>) { return std::nan(""); }, round2), NumericalAbort);
}

TEST_CASE("sphere_volume examples") {
  CHECK(sphere_volume(1) == doctest::Approx(2.0 * kPi).epsilon(1e-15));
  CHECK(sphere_volume(2) == doctest::Approx(4.0 * kPi).epsilon(1e-15));
  CHECK(sphere_volume(3) == doctest::Approx(2.0 * kPi * kPi).epsilon(1e-15));
}

TEST_CASE("arw_validate on the RW family") {
  for (double k : {1.0, 2.0, 0.5}) {
    for (int n : {2, 3}) {
      const ARWSpec s = rw_family(n, 1.0, k);
      const ValidationReport r = arw_validate(s, geometric_schedule(s.a, 10));
      const double g = s.gamma_tilde();
      CHECK(r.passed());
      CHECK(r.mass_limit == doctest::Approx(k * k / (g * g)).epsilon(1e-12));
      for (double c : r.curvature_sequence) CHECK(std::fabs(c) <= 1e-9);
    }
  }
  ARWSpec s;
  s.f = TimeFunction::from_expression(parse("log(-t)"));
  const ValidationReport r = arw_validate(s, geometric_schedule(-1.0, 10));
  CHECK(r.passed());
  CHECK(r.mass_limit == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("arw_validate rejects f = -log(-log(-t))") {
  ARWSpec s;
  s.a = -0.5;
  s.f = TimeFunction::from_expression(parse("-log(-log(-t))"));
  const ValidationReport r = arw_validate(s, geometric_schedule(s.a, 10));
  CHECK(r.f_prime_negative);
  CHECK_FALSE(r.mass_ok);
  CHECK_FALSE(r.passed());
  CHECK_THROWS_AS(arw_validate(s, std::vector<double>{}), InvalidArgument);
}

TEST_CASE("rescale preserves the metric under the time map") {
  const ARWSpec s = perturbed_spec(3, 0.1, 0.2);
  const double lam = 1.21;
  const ARWSpec r = rescale(s, lam);
  const double sq = std::sqrt(lam);
  for (double t : {-0.9, -0.3, -0.05}) {
    const std::vector<double> ev{t, 1.0, 0.7, 2.0};
    const std::vector<double> ev2{sq * t, 1.0, 0.7, 2.0};
    const MetricSample a = metric_at(s.metric(), ev);
    const MetricSample b = metric_at(r.metric(), ev2);
    CHECK(b.g[0][0] * lam == doctest::Approx(a.g[0][0]).epsilon(1e-12));
    for (int i = 1; i < 4; ++i) CHECK(b.g[i][i] == doctest::Approx(a.g[i][i]).epsilon(1e-12));
  }
}

TEST_CASE("reparametrized time function matches the chain rule") {
  const TimeFunction f = TimeFunction::from_expression(parse("log(-t) + t^3"));
  const TimeFunction sym = f.reparametrized(0.1);
  struct Wrap final : TimeFunctionModel {
    TimeFunction inner;
    explicit Wrap(TimeFunction i) : inner(std::move(i)) {}
    std::array<double, 4> derivatives(double t) const override { return inner.derivatives(t); }
    std::string describe() const override { return "wrap"; }
  };
  const TimeFunction num = TimeFunction::from_model(std::make_shared<Wrap>(f)).reparametrized(0.1);
  for (double t : {-0.8, -0.2, -0.01}) {
    const auto a = sym.derivatives(t);
    const auto b = num.derivatives(t);
    for (int k = 0; k < 4; ++k) CHECK(b[k] == doctest::Approx(a[k]).epsilon(1e-12));
  }
  const TimeFunction rs = TimeFunction::from_model(std::make_shared<Wrap>(f)).rescaled(1.1, -0.3);
  const TimeFunction rse = f.rescaled(1.1, -0.3);
  for (double t : {-0.8, -0.2}) {
    const auto a = rse.derivatives(t);
    const auto b = rs.derivatives(t);
    for (int k = 0; k < 4; ++k) CHECK(b[k] == doctest::Approx(a[k]).epsilon(1e-12));
  }
}
