#pragma once

// Riemann, Ricci, scalar and Einstein tensors.
//
// R^a_bcd = d_c Gamma^a_bd - d_d Gamma^a_bc + Gamma^a_ce Gamma^e_bd - Gamma^a_de Gamma^e_bc,
// R_bd = R^a_bad. With this convention the unit round S^n has R = n(n-1).

#include <span>

#include "arwmass/arw.hpp"
#include "arwmass/geometry.hpp"

namespace arwmass {

struct CurvatureBundle {
  int dim = 0;
  MetricSample metric;
  Connection connection;
  Rank4 riemann{};        // R^a_bcd
  Rank4 riemann_lower{};  // R_abcd = g_ae R^e_bcd
  Mat ricci{};
  double scalar = 0.0;
  Mat einstein{};  // G_ab = R_ab - R g_ab / 2
};

CurvatureBundle curvature_from(const MetricSample& sample);
CurvatureBundle curvature_at(const SpacetimeMetric& metric, std::span<const double> event);

/// Index-raised Einstein tensor G^a_b.
Mat einstein_mixed(const CurvatureBundle& c);

struct ConformalResiduals {
  /// max |Rbar_ab - (conformal right-hand side)| over 1 + the largest term magnitude.
  double ricci = 0.0;
  /// |Rbar - e^{-2 psi}(...)| over 1 + the largest term magnitude.
  double scalar = 0.0;
  double ricci_abs = 0.0;
  double scalar_abs = 0.0;
};

/// Compares the curvature of `metric` against the conformal transformation
/// formulas applied to metric.conformal() and the conformal factor. The
/// factor's covariant derivatives and norms are taken in the conformal metric.
ConformalResiduals conformal_residuals(const SpacetimeMetric& metric, std::span<const double> event);
ConformalResiduals conformal_residuals(const ARWSpec& spec, std::span<const double> event);

/// max_b |nabla_a G^a_b| with the partials of G^a_b from central differences of
/// step h and exact Christoffels. Throws NumericalAbort when the stencil leaves
/// the domain of the metric.
double einstein_divergence_residual(const SpacetimeMetric& metric, std::span<const double> event, double h);

}  // namespace arwmass
