#pragma once

// Scalar fields on a coordinate chart (x0 = t, x1..xn = angles) evaluated as
// 2-jets. Expression-backed fields use exact symbolic derivatives.

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "arwmass/expr.hpp"
#include "arwmass/jet.hpp"

namespace arwmass {

/// Chart slot for a coordinate name: t, tau -> 0; theta, theta1, x1 -> 1;
/// theta2, x2 -> 2; theta3, x3 -> 3. Returns -1 for anything else.
int coordinate_slot(std::string_view name);

/// Canonical coordinate name of a slot ("t", "theta1", ...).
const std::string& coordinate_name(int slot);

/// Rewrites coordinate aliases to their canonical names.
expr::Expression canonical_coordinates(const expr::Expression& e);

class ScalarField {
 public:
  using JetFunction = std::function<Jet(std::span<const double> event)>;

  ScalarField();  // identically zero

  static ScalarField constant(double value);
  /// Every free variable must be a coordinate name; bind parameters first.
  static ScalarField from_expression(const expr::Expression& e);
  /// `mask` has bit k set when the field may depend on coordinate k.
  static ScalarField custom(JetFunction fn, unsigned mask);

  Jet jet(std::span<const double> event) const;
  double value(std::span<const double> event) const;

  bool is_zero() const;
  std::optional<double> constant_value() const;
  unsigned dependency_mask() const;
  /// Source expression (canonical coordinates) when built from one.
  const std::optional<expr::Expression>& expression() const;

  friend ScalarField operator+(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator*(double s, const ScalarField& a);

  struct Impl;

 private:
  explicit ScalarField(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;
};

}  // namespace arwmass
