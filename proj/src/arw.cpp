#include "arwmass/arw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "arwmass/error.hpp"
#include "arwmass/extrapolation.hpp"

namespace arwmass {

namespace {

using expr::Expression;

const std::string kT = "t";

// f(phi(t)) + g(t) for a base function f and inner/additive maps given by
// their derivatives up to third order.
class ComposedModel final : public TimeFunctionModel {
 public:
  using Derivs = std::array<double, 4> (*)(double t, double p);

  ComposedModel(TimeFunction base, Derivs inner, Derivs outer_add, double param, std::string what)
      : base_(std::move(base)), inner_(inner), add_(outer_add), p_(param), what_(std::move(what)) {}

  std::array<double, 4> derivatives(double t) const override {
    const auto phi = inner_(t, p_);
    const auto f = base_.derivatives(phi[0]);
    const auto g = add_(t, p_);
    const double p1 = phi[1];
    const double p2 = phi[2];
    const double p3 = phi[3];
    return {f[0] + g[0], f[1] * p1 + g[1], f[2] * p1 * p1 + f[1] * p2 + g[2],
            f[3] * p1 * p1 * p1 + 3.0 * f[2] * p1 * p2 + f[1] * p3 + g[3]};
  }

  std::string describe() const override { return what_ + "(" + base_.describe() + ")"; }

 private:
  TimeFunction base_;
  Derivs inner_;
  Derivs add_;
  double p_;
  std::string what_;
};

std::array<double, 4> quadratic_map(double t, double eps) { return {t + eps * t * t, 1.0 + 2.0 * eps * t, 2.0 * eps, 0.0}; }

std::array<double, 4> log_quadratic_slope(double t, double eps) {
  const double d = 1.0 + 2.0 * eps * t;
  const double e = 2.0 * eps / d;
  return {std::log(d), e, -e * e, 2.0 * e * e * e};
}

std::array<double, 4> linear_map(double t, double inv_s) { return {t * inv_s, inv_s, 0.0, 0.0}; }

std::array<double, 4> zero_map(double, double) { return {0.0, 0.0, 0.0, 0.0}; }

Expression time_variable() { return Expression::variable(kT); }

// Scales the time variable of an expression in (t, theta1): t -> t * inv_s.
Expression scale_time(const Expression& e, double inv_s) {
  return expr::substitute(canonical_coordinates(e), kT, time_variable() * Expression(inv_s));
}

void check_time_only(const Expression& f) {
  for (const std::string& v : f.free_variables())
    if (v != kT) throw InvalidArgument("time function has variable '" + v + "' besides t");
}

void check_t_theta1(const Expression& e, const char* what) {
  for (const std::string& v : e.free_variables()) {
    const int slot = coordinate_slot(v);
    if (slot != 0 && slot != 1)
      throw InvalidArgument(std::string(what) + " may depend on t and theta1 only, found '" + v + "'");
  }
}

}  // namespace

TimeFunction::TimeFunction() : expr_(Expression(0.0)) {
  const std::array<std::string, 1> slots{kT};
  for (auto& c : compiled_) c = expr::CompiledExpression(Expression(0.0), slots);
}

TimeFunction TimeFunction::from_expression(const expr::Expression& f) {
  const Expression c = canonical_coordinates(f);
  check_time_only(c);
  TimeFunction out;
  out.expr_ = c;
  const std::array<std::string, 1> slots{kT};
  Expression d = c;
  for (int k = 0; k < 4; ++k) {
    out.compiled_[k] = expr::CompiledExpression(d, slots);
    if (k < 3) d = expr::differentiate(d, kT);
  }
  return out;
}

TimeFunction TimeFunction::from_model(std::shared_ptr<const TimeFunctionModel> model) {
  if (!model) throw InvalidArgument("null time function model");
  TimeFunction out;
  out.expr_.reset();
  out.model_ = std::move(model);
  return out;
}

std::array<double, 4> TimeFunction::derivatives(double t) const {
  if (model_) return model_->derivatives(t);
  const std::array<double, 1> x{t};
  return {compiled_[0](x), compiled_[1](x), compiled_[2](x), compiled_[3](x)};
}

double TimeFunction::value(double t) const {
  if (model_) return model_->derivatives(t)[0];
  const std::array<double, 1> x{t};
  return compiled_[0](x);
}

std::string TimeFunction::describe() const {
  if (model_) return model_->describe();
  return expr_->to_string();
}

ScalarField TimeFunction::field() const {
  if (expr_) return ScalarField::from_expression(*expr_);
  TimeFunction self = *this;
  return ScalarField::custom(
      [self](std::span<const double> event) {
        const auto d = self.derivatives(event[0]);
        Jet j = Jet::constant(static_cast<int>(event.size()), d[0]);
        j.d[0] = d[1];
        j.dd[0][0] = d[2];
        return j;
      },
      1u);
}

TimeFunction TimeFunction::reparametrized(double eps) const {
  if (eps == 0.0) return *this;
  if (expr_) {
    const Expression t = time_variable();
    const Expression phi = t + Expression(eps) * expr::pow(t, Expression(2.0));
    const Expression slope = Expression(1.0) + Expression(2.0 * eps) * t;
    return from_expression(expr::substitute(*expr_, kT, phi) + expr::log(slope));
  }
  return from_model(std::make_shared<ComposedModel>(*this, &quadratic_map, &log_quadratic_slope, eps, "reparam"));
}

TimeFunction TimeFunction::rescaled(double s, double shift) const {
  if (s == 1.0 && shift == 0.0) return *this;
  if (expr_) return from_expression(scale_time(*expr_, 1.0 / s) + Expression(shift));
  struct Shifted final : TimeFunctionModel {
    TimeFunction inner;
    double shift;
    Shifted(TimeFunction i, double c) : inner(std::move(i)), shift(c) {}
    std::array<double, 4> derivatives(double t) const override {
      auto d = inner.derivatives(t);
      d[0] += shift;
      return d;
    }
    std::string describe() const override { return inner.describe(); }
  };
  TimeFunction scaled = from_model(std::make_shared<ComposedModel>(*this, &linear_map, &zero_map, 1.0 / s, "rescaled"));
  return from_model(std::make_shared<Shifted>(scaled, shift));
}

void ARWSpec::check() const {
  if (n != 2 && n != 3) throw InvalidArgument("n must be 2 or 3");
  if (!(a < 0.0)) throw InvalidArgument("time domain start a must be negative");
  if (!(n + omega - 2.0 > 0.0)) throw InvalidArgument("need n + omega - 2 > 0");
  if (!(sigma_scale > 0.0)) throw InvalidArgument("sigma_scale must be positive");
  check_t_theta1(psi, "psi");
  check_t_theta1(lambda, "lambda");
}

ScalarField ARWSpec::psi_field() const { return ScalarField::from_expression(psi); }

ScalarField ARWSpec::lambda_field() const { return ScalarField::from_expression(lambda); }

ScalarField ARWSpec::conformal_factor() const { return f.field() + psi_field(); }

std::optional<expr::Expression> ARWSpec::conformal_factor_expression() const {
  if (!f.expression()) return std::nullopt;
  return *f.expression() + canonical_coordinates(psi);
}

ScalarField ARWSpec::log_weight() const { return omega * f.field() + psi_field(); }

namespace {

std::vector<ScalarField> sigma_fields(const ARWSpec& s) {
  const Expression lam = canonical_coordinates(s.lambda);
  const Expression base = Expression(s.sigma_scale) * expr::exp(Expression(2.0) * lam);
  std::vector<ScalarField> out(static_cast<std::size_t>(s.n * s.n));
  Expression sbar(1.0);
  for (int i = 0; i < s.n; ++i) {
    out[static_cast<std::size_t>(i * s.n + i)] = ScalarField::from_expression(base * sbar);
    sbar = sbar * expr::pow(expr::sin(Expression::variable(coordinate_name(i + 1))), Expression(2.0));
  }
  return out;
}

}  // namespace

SpacetimeMetric ARWSpec::metric() const {
  check();
  return SpacetimeMetric(n, conformal_factor(), sigma_fields(*this));
}

SpacetimeMetric ARWSpec::conformal_metric() const {
  check();
  return SpacetimeMetric(n, ScalarField(), sigma_fields(*this));
}

ARWSpec rw_family(int n, double omega, double k, double a) {
  ARWSpec s;
  s.n = n;
  s.omega = omega;
  s.a = a;
  const double g = s.gamma_tilde();
  if (!(g > 0.0)) throw InvalidArgument("need n + omega - 2 > 0");
  if (!(k > 0.0)) throw InvalidArgument("rw family needs k > 0");
  s.f = TimeFunction::from_expression(Expression(1.0 / g) *
                                      expr::log(Expression(-k) * Expression::variable("t")));
  s.label = "rw-family";
  return s;
}

std::vector<double> geometric_schedule(double a, int K) {
  if (!(a < 0.0)) throw InvalidArgument("schedule start must be negative");
  if (K < 0) throw InvalidArgument("schedule length must be non-negative");
  std::vector<double> out;
  for (int k = 0; k <= K; ++k) out.push_back(std::ldexp(a, -k));
  return out;
}

namespace {

// Index of the sample one decade (|t| ten times larger) before the last one,
// or 0 when the schedule is shorter than a decade.
std::size_t decade_before_last(std::span<const double> t) {
  const double target = 10.0 * std::fabs(t.back());
  std::size_t idx = 0;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (std::fabs(t[i]) >= target) idx = i;
  return idx;
}

}  // namespace

ValidationReport arw_validate(const ARWSpec& spec, std::span<const double> times) {
  if (times.empty()) throw InvalidArgument("arw_validate needs at least one sample time");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] < 0.0) || times[i] < spec.a) throw InvalidArgument("sample times must lie in [a, 0)");
    if (i > 0 && !(times[i] > times[i - 1])) throw InvalidArgument("sample times must increase toward 0");
  }
  ValidationReport r;
  r.times.assign(times.begin(), times.end());
  r.dimension_ok = spec.n + spec.omega - 2.0 > 0.0;
  const double g = spec.gamma_tilde();
  r.f_prime_negative = true;
  for (double t : times) {
    const auto d = spec.f.derivatives(t);
    const double fp = d[1];
    r.f_prime.push_back(fp);
    if (!(fp < 0.0)) r.f_prime_negative = false;
    r.mass_sequence.push_back(fp * fp * std::exp(2.0 * g * d[0]));
    r.curvature_sequence.push_back(d[2] + g * fp * fp);
    r.ratio2.push_back(std::fabs(d[2]) / (fp * fp));
    r.ratio3.push_back(std::fabs(d[3]) / std::fabs(fp * fp * fp));
  }
  for (std::size_t i = 1; i < r.mass_sequence.size(); ++i)
    r.cauchy_increments.push_back(std::fabs(r.mass_sequence[i] - r.mass_sequence[i - 1]) /
                                  std::fabs(r.mass_sequence[i]));

  const double last_mass = r.mass_sequence.back();
  if (r.mass_sequence.size() >= 3) {
    const Extrapolated e = aitken(r.mass_sequence);
    r.mass_limit = e.value;
    r.mass_error = e.error;
  } else {
    r.mass_limit = last_mass;
    r.mass_error = std::numeric_limits<double>::infinity();
  }
  const double last_inc = r.cauchy_increments.empty() ? std::numeric_limits<double>::infinity()
                                                      : r.cauchy_increments.back();
  r.mass_ok = std::isfinite(r.mass_limit) && r.mass_limit > 0.0 && last_inc <= 0.1 &&
              r.mass_error <= 1e-2 * r.mass_limit;

  const std::size_t k0 = decade_before_last(times);
  const std::size_t kl = times.size() - 1;
  // Roundoff floor: the two terms of f'' + gamma~|f'|^2 cancel for exact families.
  auto floor_at = [&](std::size_t k) {
    return 1e-12 * (std::fabs(r.curvature_sequence[k]) + g * r.f_prime[k] * r.f_prime[k]);
  };
  const double early = std::fabs(r.curvature_sequence[k0]);
  const double late = std::fabs(r.curvature_sequence[kl]);
  const double early_eff = std::max(early, floor_at(k0));
  const double late_eff = late <= floor_at(kl) ? 0.0 : late;
  r.curvature_growth = early_eff > 0.0 ? late_eff / early_eff : 0.0;
  r.curvature_divergent = k0 != kl && r.curvature_growth > 10.0;

  r.sup_ratio2 = *std::max_element(r.ratio2.begin(), r.ratio2.end());
  r.sup_ratio3 = *std::max_element(r.ratio3.begin(), r.ratio3.end());
  auto growth = [&](const std::vector<double>& v) {
    const double e = v[k0];
    const double l = v[kl];
    if (e == 0.0) return l == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return l / e;
  };
  r.growth2 = growth(r.ratio2);
  r.growth3 = growth(r.ratio3);
  r.derivative_bounds_ok = std::isfinite(r.sup_ratio2) && std::isfinite(r.sup_ratio3) && r.growth2 <= 10.0 &&
                           r.growth3 <= 10.0;
  return r;
}

ARWSpec rescale(const ARWSpec& spec, double lam) {
  if (!(lam > 0.0)) throw InvalidArgument("rescale factor must be positive");
  ARWSpec out = spec;
  const double s = std::sqrt(lam);
  out.sigma_scale = spec.sigma_scale * lam;
  out.a = spec.a * s;
  out.f = spec.f.rescaled(s, -0.5 * std::log(lam));
  out.psi = scale_time(spec.psi, 1.0 / s);
  out.lambda = scale_time(spec.lambda, 1.0 / s);
  return out;
}

}  // namespace arwmass
