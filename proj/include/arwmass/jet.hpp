#pragma once

// Second-order truncated Taylor expansions ("2-jets") of scalar functions of up
// to four variables. Arithmetic propagates value, gradient and Hessian exactly,
// which is how ambient fields are pulled back to graph hypersurfaces without
// finite differences.

#include <cmath>
#include <span>

#include "arwmass/tensor.hpp"

namespace arwmass {

struct Jet {
  int dim = 0;
  /// 2 when the Hessian is valid, 1 when only the gradient is, 0 for values.
  int order = 2;
  double v = 0.0;
  Vec d{};
  Mat dd{};

  static Jet constant(int dim, double value) {
    Jet j;
    j.dim = dim;
    j.v = value;
    return j;
  }

  static Jet coordinate(int dim, int k, double value) {
    Jet j = constant(dim, value);
    j.d[k] = 1.0;
    return j;
  }
};

inline int min_order(const Jet& a, const Jet& b) { return a.order < b.order ? a.order : b.order; }

inline Jet operator+(const Jet& a, const Jet& b) {
  Jet r = a;
  r.order = min_order(a, b);
  r.v += b.v;
  for (int i = 0; i < a.dim; ++i) {
    r.d[i] += b.d[i];
    for (int j = 0; j < a.dim; ++j) r.dd[i][j] += b.dd[i][j];
  }
  return r;
}

inline Jet operator-(const Jet& a) {
  Jet r = a;
  r.v = -a.v;
  for (int i = 0; i < a.dim; ++i) {
    r.d[i] = -a.d[i];
    for (int j = 0; j < a.dim; ++j) r.dd[i][j] = -a.dd[i][j];
  }
  return r;
}

inline Jet operator-(const Jet& a, const Jet& b) { return a + (-b); }

inline Jet operator*(const Jet& a, double s) {
  Jet r = a;
  r.v *= s;
  for (int i = 0; i < a.dim; ++i) {
    r.d[i] *= s;
    for (int j = 0; j < a.dim; ++j) r.dd[i][j] *= s;
  }
  return r;
}

inline Jet operator*(double s, const Jet& a) { return a * s; }

inline Jet operator+(const Jet& a, double s) {
  Jet r = a;
  r.v += s;
  return r;
}

inline Jet operator*(const Jet& a, const Jet& b) {
  Jet r;
  r.dim = a.dim;
  r.order = min_order(a, b);
  r.v = a.v * b.v;
  for (int i = 0; i < a.dim; ++i) {
    r.d[i] = a.d[i] * b.v + a.v * b.d[i];
    for (int j = 0; j < a.dim; ++j)
      r.dd[i][j] = a.dd[i][j] * b.v + a.d[i] * b.d[j] + b.d[i] * a.d[j] + a.v * b.dd[i][j];
  }
  return r;
}

/// g(a) given g, g', g'' evaluated at a.v.
inline Jet chain(const Jet& a, double g0, double g1, double g2) {
  Jet r;
  r.dim = a.dim;
  r.order = a.order;
  r.v = g0;
  for (int i = 0; i < a.dim; ++i) {
    r.d[i] = g1 * a.d[i];
    for (int j = 0; j < a.dim; ++j) r.dd[i][j] = g2 * a.d[i] * a.d[j] + g1 * a.dd[i][j];
  }
  return r;
}

inline Jet reciprocal(const Jet& a) {
  const double x = 1.0 / a.v;
  return chain(a, x, -x * x, 2.0 * x * x * x);
}

inline Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }

inline Jet exp(const Jet& a) {
  const double e = std::exp(a.v);
  return chain(a, e, e, e);
}

inline Jet log(const Jet& a) { return chain(a, std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v)); }

inline Jet sqrt(const Jet& a) {
  const double s = std::sqrt(a.v);
  return chain(a, s, 0.5 / s, -0.25 / (s * a.v));
}

inline Jet sin(const Jet& a) { return chain(a, std::sin(a.v), std::cos(a.v), -std::sin(a.v)); }
inline Jet cos(const Jet& a) { return chain(a, std::cos(a.v), -std::sin(a.v), -std::cos(a.v)); }

inline Jet pow(const Jet& a, double p) {
  return chain(a, std::pow(a.v, p), p * std::pow(a.v, p - 1.0), p * (p - 1.0) * std::pow(a.v, p - 2.0));
}

/// Partial derivative along variable k; one order is lost.
inline Jet partial(const Jet& a, int k) {
  Jet r;
  r.dim = a.dim;
  r.order = a.order > 0 ? a.order - 1 : 0;
  r.v = a.d[k];
  for (int i = 0; i < a.dim; ++i) r.d[i] = a.dd[k][i];
  return r;
}

/// outer(inner(y)): `outer` is a jet in x at x = inner(y).v, `inner` holds one
/// jet in y per x-variable.
inline Jet compose(const Jet& outer, std::span<const Jet> inner) {
  Jet r;
  r.dim = inner.empty() ? 0 : inner[0].dim;
  r.order = outer.order;
  r.v = outer.v;
  for (const Jet& x : inner) r.order = r.order < x.order ? r.order : x.order;
  for (int a = 0; a < outer.dim; ++a) {
    const Jet& xa = inner[a];
    for (int k = 0; k < r.dim; ++k) {
      r.d[k] += outer.d[a] * xa.d[k];
      for (int l = 0; l < r.dim; ++l) {
        double s = outer.d[a] * xa.dd[k][l];
        for (int b = 0; b < outer.dim; ++b) s += outer.dd[a][b] * xa.d[k] * inner[b].d[l];
        r.dd[k][l] += s;
      }
    }
  }
  return r;
}

}  // namespace arwmass
