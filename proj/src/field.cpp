#include "arwmass/field.hpp"

#include <array>
#include <vector>

namespace arwmass {

namespace {

const std::array<std::string, kMaxDim> kCanonical{"t", "theta1", "theta2", "theta3"};

}  // namespace

int coordinate_slot(std::string_view name) {
  if (name == "t" || name == "tau") return 0;
  if (name == "theta" || name == "theta1" || name == "x1") return 1;
  if (name == "theta2" || name == "x2") return 2;
  if (name == "theta3" || name == "x3") return 3;
  return -1;
}

const std::string& coordinate_name(int slot) { return kCanonical.at(static_cast<std::size_t>(slot)); }

expr::Expression canonical_coordinates(const expr::Expression& e) {
  expr::Expression out = e;
  for (const std::string& v : e.free_variables()) {
    const int slot = coordinate_slot(v);
    if (slot >= 0 && v != kCanonical[slot])
      out = expr::substitute(out, v, expr::Expression::variable(kCanonical[slot]));
  }
  return out;
}

struct ScalarField::Impl {
  enum class Type { Constant, Expression, Custom, Sum, Scaled } type = Type::Constant;
  double value = 0.0;
  unsigned mask = 0;
  std::optional<expr::Expression> source;

  // Expression: compiled value, gradient and upper-triangle Hessian.
  expr::CompiledExpression f;
  std::array<expr::CompiledExpression, kMaxDim> df;
  std::array<std::array<expr::CompiledExpression, kMaxDim>, kMaxDim> ddf;

  JetFunction fn;
  std::vector<ScalarField> terms;
};

ScalarField::ScalarField() : ScalarField(constant(0.0)) {}

ScalarField::ScalarField(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

ScalarField ScalarField::constant(double value) {
  auto impl = std::make_shared<Impl>();
  impl->value = value;
  impl->source = expr::Expression(value);
  return ScalarField(std::move(impl));
}

ScalarField ScalarField::from_expression(const expr::Expression& e) {
  const expr::Expression c = canonical_coordinates(e);
  for (const std::string& v : c.free_variables()) {
    if (coordinate_slot(v) < 0) throw InvalidArgument("field expression has non-coordinate variable '" + v + "'");
  }
  if (c.is_constant()) {
    ScalarField out = constant(c.evaluate({}));
    return out;
  }
  auto impl = std::make_shared<Impl>();
  impl->type = Impl::Type::Expression;
  impl->source = c;
  const std::span<const std::string> slots(kCanonical.data(), kCanonical.size());
  impl->f = expr::CompiledExpression(c, slots);
  for (int k = 0; k < kMaxDim; ++k) {
    if (!c.depends_on(kCanonical[k])) continue;
    impl->mask |= 1u << k;
  }
  for (int k = 0; k < kMaxDim; ++k) {
    if (!(impl->mask & (1u << k))) continue;
    const expr::Expression dk = expr::differentiate(c, kCanonical[k]);
    impl->df[k] = expr::CompiledExpression(dk, slots);
    for (int l = k; l < kMaxDim; ++l) {
      if (!(impl->mask & (1u << l))) continue;
      impl->ddf[k][l] = expr::CompiledExpression(expr::differentiate(dk, kCanonical[l]), slots);
    }
  }
  return ScalarField(std::move(impl));
}

ScalarField ScalarField::custom(JetFunction fn, unsigned mask) {
  auto impl = std::make_shared<Impl>();
  impl->type = Impl::Type::Custom;
  impl->fn = std::move(fn);
  impl->mask = mask;
  return ScalarField(std::move(impl));
}

Jet ScalarField::jet(std::span<const double> event) const {
  const Impl& m = *impl_;
  const int dim = static_cast<int>(event.size());
  switch (m.type) {
    case Impl::Type::Constant: return Jet::constant(dim, m.value);
    case Impl::Type::Expression: {
      std::array<double, kMaxDim> x{};
      for (int k = 0; k < dim && k < kMaxDim; ++k) x[k] = event[k];
      Jet j = Jet::constant(dim, m.f(x));
      for (int k = 0; k < dim; ++k) {
        if (!(m.mask & (1u << k))) continue;
        j.d[k] = m.df[k](x);
        for (int l = k; l < dim; ++l) {
          if (!(m.mask & (1u << l))) continue;
          j.dd[k][l] = j.dd[l][k] = m.ddf[k][l](x);
        }
      }
      return j;
    }
    case Impl::Type::Custom: {
      Jet j = m.fn(event);
      j.dim = dim;
      return j;
    }
    case Impl::Type::Sum: {
      Jet j = Jet::constant(dim, 0.0);
      for (const ScalarField& t : m.terms) j = j + t.jet(event);
      return j;
    }
    case Impl::Type::Scaled: return m.terms.front().jet(event) * m.value;
  }
  return Jet::constant(dim, 0.0);
}

double ScalarField::value(std::span<const double> event) const {
  const Impl& m = *impl_;
  if (m.type == Impl::Type::Expression) {
    std::array<double, kMaxDim> x{};
    for (std::size_t k = 0; k < event.size() && k < kMaxDim; ++k) x[k] = event[k];
    return m.f(x);
  }
  return jet(event).v;
}

bool ScalarField::is_zero() const { return impl_->type == Impl::Type::Constant && impl_->value == 0.0; }

std::optional<double> ScalarField::constant_value() const {
  if (impl_->type == Impl::Type::Constant) return impl_->value;
  return std::nullopt;
}

unsigned ScalarField::dependency_mask() const { return impl_->mask; }

const std::optional<expr::Expression>& ScalarField::expression() const { return impl_->source; }

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  if (a.constant_value() && b.constant_value()) return ScalarField::constant(*a.constant_value() + *b.constant_value());
  auto impl = std::make_shared<ScalarField::Impl>();
  impl->type = ScalarField::Impl::Type::Sum;
  impl->terms = {a, b};
  impl->mask = a.dependency_mask() | b.dependency_mask();
  if (a.expression() && b.expression()) impl->source = *a.expression() + *b.expression();
  return ScalarField(std::move(impl));
}

ScalarField operator*(double s, const ScalarField& a) {
  if (a.constant_value()) return ScalarField::constant(s * *a.constant_value());
  auto impl = std::make_shared<ScalarField::Impl>();
  impl->type = ScalarField::Impl::Type::Scaled;
  impl->value = s;
  impl->terms = {a};
  impl->mask = a.dependency_mask();
  if (a.expression()) impl->source = expr::Expression(s) * *a.expression();
  return ScalarField(std::move(impl));
}

}  // namespace arwmass
