#pragma once

// Asymptotically Robertson-Walker presentations: conformal factor f(t) + psi,
// spatial metric sigma_ij = c e^{2 lambda} sigma-bar_ij with sigma-bar the round
// unit sphere, time domain [a, 0) with the singularity at t = 0.

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "arwmass/expr.hpp"
#include "arwmass/field.hpp"
#include "arwmass/geometry.hpp"

namespace arwmass {

/// Source of f and its first three derivatives for functions without a
/// closed form in t.
class TimeFunctionModel {
 public:
  virtual ~TimeFunctionModel() = default;
  virtual std::array<double, 4> derivatives(double t) const = 0;
  virtual std::string describe() const = 0;
};

class TimeFunction {
 public:
  TimeFunction();  // f = 0

  /// Free variables other than t / tau must be bound beforehand.
  static TimeFunction from_expression(const expr::Expression& f);
  static TimeFunction from_model(std::shared_ptr<const TimeFunctionModel> model);

  /// f, f', f'', f''' at t.
  std::array<double, 4> derivatives(double t) const;
  double value(double t) const;

  const std::optional<expr::Expression>& expression() const { return expr_; }
  std::string describe() const;

  /// Jet in the time coordinate of an event.
  ScalarField field() const;

  /// f(phi(t)) + log phi'(t) with phi(t) = t + eps t^2.
  TimeFunction reparametrized(double eps) const;

  /// f(t / s) + shift.
  TimeFunction rescaled(double s, double shift) const;

 private:
  std::optional<expr::Expression> expr_;
  std::array<expr::CompiledExpression, 4> compiled_;
  std::shared_ptr<const TimeFunctionModel> model_;
};

struct ARWSpec {
  int n = 3;
  double omega = 1.0;
  TimeFunction f;
  expr::Expression psi;     // in (t, theta1); stored as given
  expr::Expression lambda;  // in (t, theta1); stored as given
  double a = -1.0;
  double sigma_scale = 1.0;
  std::string label;

  double gamma_tilde() const { return 0.5 * (n + omega - 2.0); }

  /// Throws InvalidArgument when an invariant is violated.
  void check() const;

  ScalarField psi_field() const;
  ScalarField lambda_field() const;
  /// f + psi.
  ScalarField conformal_factor() const;
  /// Available when f has an expression form.
  std::optional<expr::Expression> conformal_factor_expression() const;
  /// omega f + psi, the log of the mass weight e^{omega f} e^{psi}.
  ScalarField log_weight() const;

  SpacetimeMetric metric() const;
  SpacetimeMetric conformal_metric() const;
};

/// f = (1 / gamma~) log(-k t), psi = lambda = 0.
ARWSpec rw_family(int n, double omega, double k, double a = -1.0);

/// a 2^{-k}, k = 0..K.
std::vector<double> geometric_schedule(double a, int K);

struct ValidationReport {
  std::vector<double> times;
  bool dimension_ok = false;  // n + omega - 2 > 0

  std::vector<double> f_prime;
  bool f_prime_negative = false;  // (i)

  std::vector<double> mass_sequence;  // |f'|^2 e^{(n+omega-2) f}
  std::vector<double> cauchy_increments;
  double mass_limit = 0.0;
  double mass_error = 0.0;
  bool mass_ok = false;  // (ii)

  std::vector<double> curvature_sequence;  // f'' + gamma~ |f'|^2
  double curvature_growth = 0.0;           // |last| / |one decade earlier|
  bool curvature_divergent = false;        // (iii)

  std::vector<double> ratio2;  // |f''| / |f'|^2
  std::vector<double> ratio3;  // |f'''| / |f'|^3
  double sup_ratio2 = 0.0;
  double sup_ratio3 = 0.0;
  double growth2 = 0.0;
  double growth3 = 0.0;
  bool derivative_bounds_ok = false;  // (iv)

  bool passed() const {
    return dimension_ok && f_prime_negative && mass_ok && !curvature_divergent && derivative_bounds_ok;
  }
};

/// Checks the conditions on f at the given times (sorted increasing toward 0).
ValidationReport arw_validate(const ARWSpec& spec, std::span<const double> times);

/// Sigma-bar scaled by lam: t' = sqrt(lam) t, f' = f(t'/sqrt(lam)) - log(lam)/2,
/// psi and lambda composed with the same time map. The metric is unchanged
/// under the coordinate map.
ARWSpec rescale(const ARWSpec& spec, double lam);

}  // namespace arwmass
