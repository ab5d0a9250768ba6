#pragma once

// Schwarzschild-anti-de Sitter brane inside the black hole region:
//   h(r) = 1 - 2 Lambda r^2 / (n(n+1)) - m r^{-(n-1)},   h~ = -h,
// time function x0(r) = -int_0^r ds / (s sqrt(h~(s))), conformal factor f = log r.

#include "arwmass/arw.hpp"

namespace arwmass {

struct SAdSParams {
  int n = 3;
  double Lambda = 0.0;
  double m = 1.0;

  void check() const;
};

struct SAdSProfile {
  double h = 0.0;
  double h_tilde = 0.0;
  double dh_dr = 0.0;
};

SAdSProfile profile(const SAdSParams& p, double r);

/// Unique positive root of h.
double horizon(const SAdSParams& p);

/// Requires 0 < r < horizon; x0 -> 0 as r -> 0.
double x0_of_r(const SAdSParams& p, double r);
double r_of_x0(const SAdSParams& p, double x0);

/// f, f', f'', f''' at radius r (derivatives with respect to x0).
std::array<double, 4> sads_f_derivatives(const SAdSParams& p, double r);

/// omega = 1, psi = lambda = 0, domain start a = x0(0.99 r0).
ARWSpec as_arw_spec(const SAdSParams& p);

/// n(n-1)/2 |S^n| (m + 2 Lambda r^{n+1} / (n(n+1))).
double oracle_mass_integral(const SAdSParams& p, double r);

}  // namespace arwmass
