#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "arwmass/curvature.hpp"
#include "arwmass/sads.hpp"
#include "doctest.h"

using namespace arwmass;

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

TEST_CASE("profile examples") {
  const SAdSProfile a = profile({3, 0.0, 1.0}, 0.5);
  CHECK(a.h == doctest::Approx(-3.0).epsilon(1e-15));
  CHECK(a.h_tilde == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(profile({3, 0.0, 1.0}, 1.0).h == 0.0);
  CHECK(profile({2, 0.0, 1.0}, 1.0).h == 0.0);
  CHECK_THROWS_AS(profile({3, 0.0, 1.0}, 0.0), InvalidArgument);
  // dh/dr against a central difference
  const SAdSParams p{3, -1.0, 1.0};
  const double h = 1e-6;
  CHECK(profile(p, 0.6).dh_dr == doctest::Approx((profile(p, 0.6 + h).h - profile(p, 0.6 - h).h) / (2 * h)).epsilon(1e-8));
}

TEST_CASE("horizon examples") {
  CHECK(horizon({3, 0.0, 1.0}) == doctest::Approx(1.0).epsilon(1e-12));
  // h = 0 at n = 3, Lambda = -1: r^4/6 + r^2 - 1 = 0 -> r^2 = sqrt(15) - 3
  CHECK(std::fabs(horizon({3, -1.0, 1.0}) - std::sqrt(std::sqrt(15.0) - 3.0)) <= 1e-10);
  CHECK(horizon({3, 0.0, 4.0}) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(horizon({2, 0.0, 1.0}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(horizon({3, 1.0, 1.0}), InvalidArgument);
}

TEST_CASE("x0_of_r examples and round trip") {
  const SAdSParams p{3, 0.0, 1.0};
  CHECK(x0_of_r(p, 0.5) == doctest::Approx(-kPi / 6.0).epsilon(1e-13));
  CHECK(std::fabs(x0_of_r(p, 1e-12)) <= 2e-12);
  CHECK(x0_of_r(p, 1.0 - 1e-12) == doctest::Approx(-kPi / 2.0).epsilon(1e-5));
  CHECK_THROWS_AS(x0_of_r(p, 1.5), InvalidArgument);
  std::mt19937_64 rng(5);
  for (const SAdSParams q : {SAdSParams{3, 0.0, 1.0}, SAdSParams{3, -1.0, 1.0}, SAdSParams{2, 0.0, 1.0},
                             SAdSParams{3, 0.0, 4.0}}) {
    const double r0 = horizon(q);
    for (int i = 0; i < 50; ++i) {
      const double r = r0 * (0.001 + 0.98 * static_cast<double>(rng() >> 11) * 0x1.0p-53);
      CHECK(std::fabs(r_of_x0(q, x0_of_r(q, r)) - r) <= 1e-10);
    }
  }
}

TEST_CASE("as_arw_spec carries the closed-form derivatives") {
  const SAdSParams p{3, 0.0, 1.0};
  const ARWSpec s = as_arw_spec(p);
  const double t = x0_of_r(p, 0.5);
  const auto d = s.f.derivatives(t);
  const double g = s.gamma_tilde();
  CHECK(d[0] == doctest::Approx(std::log(0.5)).epsilon(1e-12));
  CHECK(d[2] + g * d[1] * d[1] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(d[1] * d[1] * std::exp(2.0 * g * d[0]) == doctest::Approx(0.75).epsilon(1e-12));

  // Lambda < 0: f'' + gamma~ f'^2 = Lambda r^2 / n - (n-1)/2
  const SAdSParams q{3, -1.0, 1.0};
  const ARWSpec sq = as_arw_spec(q);
  const auto e = sq.f.derivatives(x0_of_r(q, 0.4));
  CHECK(e[2] + e[1] * e[1] == doctest::Approx(-0.16 / 3.0 - 1.0).epsilon(1e-12));

  // derivatives against finite differences in x0
  const double h = 1e-5;
  const auto dp = sq.f.derivatives(x0_of_r(q, 0.4) + h);
  const auto dm = sq.f.derivatives(x0_of_r(q, 0.4) - h);
  for (int k = 0; k < 3; ++k) CHECK(e[k + 1] == doctest::Approx((dp[k] - dm[k]) / (2 * h)).epsilon(1e-7));

  const MetricSample m = metric_at(s.metric(), std::vector<double>{t, 1.0, 1.0, 1.0});
  CHECK(m.g[0][0] == doctest::Approx(-0.25).epsilon(1e-12));
}

TEST_CASE("arw_validate passes on S-AdS with the right mass") {
  for (const SAdSParams p : {SAdSParams{3, 0.0, 1.0}, SAdSParams{3, -1.0, 1.0}, SAdSParams{2, 0.0, 1.0},
                             SAdSParams{3, 0.0, 4.0}}) {
    const ARWSpec s = as_arw_spec(p);
    const ValidationReport r = arw_validate(s, geometric_schedule(s.a, 12));
    CHECK(r.passed());
    CHECK(r.mass_limit == doctest::Approx(p.m).epsilon(1e-6));
  }
}

TEST_CASE("oracle mass integral") {
  CHECK(oracle_mass_integral({3, 0.0, 1.0}, 0.3) == doctest::Approx(6.0 * kPi * kPi).epsilon(1e-15));
  CHECK(oracle_mass_integral({3, -1.0, 1.0}, 0.5) ==
        doctest::Approx(6.0 * kPi * kPi * (1.0 - std::pow(0.5, 4) / 6.0)).epsilon(1e-15));
  CHECK(oracle_mass_integral({3, -1.0, 1.0}, 1e-8) == doctest::Approx(6.0 * kPi * kPi).epsilon(1e-15));
}

TEST_CASE("property: Einstein component matches the closed form at 200 random points") {
  std::mt19937_64 rng(6);
  for (const SAdSParams p : {SAdSParams{3, 0.0, 1.0}, SAdSParams{3, -1.0, 1.0}, SAdSParams{2, 0.0, 1.0}}) {
    const ARWSpec s = as_arw_spec(p);
    const SpacetimeMetric m = s.metric();
    const double r0 = horizon(p);
    for (int i = 0; i < 200; ++i) {
      auto u = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
      const double r = r0 * (0.01 + 0.97 * u());
      std::vector<double> ev{x0_of_r(p, r)};
      for (int k = 0; k < p.n; ++k) ev.push_back(0.1 + (kPi - 0.2) * u());
      const CurvatureBundle c = curvature_at(m, ev);
      const MetricSample& g = c.metric;
      // unit normal of the slice: nu^0 = 1 / sqrt(-g_00)
      const double nu0 = 1.0 / std::sqrt(-g.g[0][0]);
      const double lhs = c.einstein[0][0] * nu0 * nu0 * r * r;
      const double rhs = 0.5 * p.n * (p.n - 1.0) * (profile(p, r).h_tilde + 1.0);
      REQUIRE(std::fabs(lhs - rhs) <= 1e-7 * std::fmax(1.0, std::fabs(rhs)));
    }
  }
}
