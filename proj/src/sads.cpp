#include "arwmass/sads.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

#include "arwmass/error.hpp"
#include "arwmass/quadrature.hpp"

namespace arwmass {

void SAdSParams::check() const {
  if (n < 2 || n > 3) throw InvalidArgument("S-AdS needs n in {2, 3}");
  if (!(Lambda <= 0.0)) throw InvalidArgument("S-AdS needs Lambda <= 0");
  if (!(m > 0.0)) throw InvalidArgument("S-AdS needs m > 0");
}

SAdSProfile profile(const SAdSParams& p, double r) {
  if (!(r > 0.0)) throw InvalidArgument("S-AdS profile needs r > 0");
  const double c = 2.0 * p.Lambda / (p.n * (p.n + 1.0));
  const double tail = p.m * std::pow(r, -(p.n - 1.0));
  SAdSProfile out;
  out.h = 1.0 - c * r * r - tail;
  out.h_tilde = -out.h;
  out.dh_dr = -2.0 * c * r + (p.n - 1.0) * tail / r;
  return out;
}

double horizon(const SAdSParams& p) {
  p.check();
  double hi = 2.0 * std::fmax(1.0, std::pow(p.m, 1.0 / (p.n - 1.0)));
  double lo = 0.5 * hi;
  while (profile(p, lo).h >= 0.0) lo *= 0.5;
  if (!(profile(p, hi).h > 0.0)) throw NumericalAbort("horizon bracketing failed");
  while (hi - lo > 1e-15 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (profile(p, mid).h < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

// With s = w^2 the integrand of x0 becomes 2 w^{n-2} / sqrt(m - w^{2(n-1)} + c w^{2(n+1)}),
// smooth at w = 0.
double x0_integral(const SAdSParams& p, double r) {
  const double c = 2.0 * p.Lambda / (p.n * (p.n + 1.0));
  auto integrand = [&](double w) {
    const double w2 = w * w;
    const double q = p.m - std::pow(w2, p.n - 1.0) + c * std::pow(w2, p.n + 1.0);
    // q vanishes at the horizon; roundoff there can make it slightly negative
    return q > 0.0 ? 2.0 * std::pow(w, p.n - 2.0) / std::sqrt(q) : 0.0;
  };
  static thread_local boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate(integrand, 0.0, std::sqrt(r), 1e-15);
}

}  // namespace

double x0_of_r(const SAdSParams& p, double r) {
  p.check();
  const double r0 = horizon(p);
  if (!(r > 0.0) || !(r < r0)) throw InvalidArgument("x0_of_r needs 0 < r < r0");
  return -x0_integral(p, r);
}

namespace {

double invert_x0(const SAdSParams& p, double x0, double r0) {
  // x0 is decreasing in r with dx0/dr = -1 / (r sqrt(h~)).
  double lo = 0.0;
  double hi = r0;
  double r = p.n == 2 ? x0 * x0 * p.m / 4.0 : -x0 * std::sqrt(p.m);
  r = std::fmin(r, 0.5 * r0);
  for (int it = 0; it < 200; ++it) {
    const double g = -x0_integral(p, r) - x0;
    if (g > 0.0) lo = r;
    else hi = r;
    const double slope = -1.0 / (r * std::sqrt(profile(p, r).h_tilde));
    double next = r - g / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - r) <= 4.0 * std::numeric_limits<double>::epsilon() * r) return next;
    r = next;
  }
  return r;
}

}  // namespace

double r_of_x0(const SAdSParams& p, double x0) {
  p.check();
  const double r0 = horizon(p);
  if (!(x0 < 0.0)) throw InvalidArgument("r_of_x0 needs x0 < 0");
  if (!(x0 > -x0_integral(p, r0))) throw InvalidArgument("r_of_x0: x0 beyond the horizon");
  return invert_x0(p, x0, r0);
}

std::array<double, 4> sads_f_derivatives(const SAdSParams& p, double r) {
  const SAdSProfile pr = profile(p, r);
  const int n = p.n;
  const double root = std::sqrt(pr.h_tilde);
  const double k = 2.0 * p.Lambda / (n * (n + 1.0));
  const double tail = p.m * std::pow(r, -(n - 1.0));
  const double f2 = k * r * r - 0.5 * (n - 1.0) * tail;
  const double df2_dr = 2.0 * k * r + 0.5 * (n - 1.0) * (n - 1.0) * tail / r;
  return {std::log(r), -root, f2, df2_dr * (-r * root)};
}

namespace {

class SAdSTimeFunction final : public TimeFunctionModel {
 public:
  explicit SAdSTimeFunction(SAdSParams p)
      : p_(p), r0_(horizon(p)), x0_min_(-x0_integral(p, r0_)), id_(next_id_.fetch_add(1) + 1) {}

  std::array<double, 4> derivatives(double t) const override {
    // Fields evaluate f repeatedly at the same t across a slice.
    thread_local std::uint64_t owner = 0;
    thread_local double last_t = 0.0;
    thread_local double last_r = 0.0;
    if (owner != id_ || last_t != t) {
      if (!(t < 0.0) || !(t > x0_min_)) throw InvalidArgument("S-AdS time outside (x0(r0), 0)");
      last_r = invert_x0(p_, t, r0_);
      last_t = t;
      owner = id_;
    }
    return sads_f_derivatives(p_, last_r);
  }

  std::string describe() const override {
    std::ostringstream os;
    os.precision(17);
    os << "sads(n=" << p_.n << ", Lambda=" << p_.Lambda << ", m=" << p_.m << ")";
    return os.str();
  }

 private:
  SAdSParams p_;
  double r0_;
  double x0_min_;
  std::uint64_t id_;
  static inline std::atomic<std::uint64_t> next_id_{0};
};

}  // namespace

ARWSpec as_arw_spec(const SAdSParams& p) {
  p.check();
  ARWSpec s;
  s.n = p.n;
  s.omega = 1.0;
  s.a = x0_of_r(p, 0.99 * horizon(p));
  s.f = TimeFunction::from_model(std::make_shared<SAdSTimeFunction>(p));
  s.label = "sads";
  return s;
}

double oracle_mass_integral(const SAdSParams& p, double r) {
  const int n = p.n;
  return 0.5 * n * (n - 1.0) * sphere_volume(n) *
         (p.m + 2.0 * p.Lambda * std::pow(r, n + 1.0) / (n * (n + 1.0)));
}

}  // namespace arwmass
