#pragma once

// Spacelike graphs M = {t = u(x)} in a Gaussian metric e^{2 psi}(-dt^2 + sigma),
// restricted to u = u(theta1). The normal is always the past directed one,
//   nu = -v^{-1} e^{-psi} (1, u^i),  u^i = sigma^{ij} u_j,  v^2 = 1 - sigma^{ij} u_i u_j,
// and h_ij is fixed by the Gauss formula x_ij = h_ij nu, so that
//   e^{-psi} v^{-1} h_ij = -u_;ij - Gamma^0_00 u_i u_j - Gamma^0_0j u_i - Gamma^0_0i u_j - Gamma^0_ij.

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "arwmass/curvature.hpp"
#include "arwmass/expr.hpp"
#include "arwmass/geometry.hpp"

namespace arwmass {

class GraphHypersurface {
 public:
  /// `u` may only depend on theta1 (aliases theta, x1 accepted).
  GraphHypersurface(SpacetimeMetric ambient, const expr::Expression& u);
  GraphHypersurface(SpacetimeMetric ambient, double u);

  const SpacetimeMetric& ambient() const { return ambient_; }
  int dim() const { return ambient_.spatial_dim(); }
  const expr::Expression& height_expression() const { return u_; }
  std::optional<double> constant_height() const;
  /// u, u', u'', u''' at theta1.
  std::array<double, 4> height(double theta1) const;
  /// Same graph function over another ambient metric on the same chart.
  GraphHypersurface with_ambient(SpacetimeMetric ambient) const;

 private:
  SpacetimeMetric ambient_;
  expr::Expression u_;
  std::array<expr::CompiledExpression, 4> du_;
};

struct ExtrinsicData {
  int n = 0;
  std::vector<double> event;  // (u(x), x)
  Mat g{};                    // induced metric
  Mat g_inv{};
  double du2 = 0.0;  // sigma^{ij} u_i u_j
  double v = 1.0;
  double psi = 0.0;  // conformal factor at the event
  Vec nu{};          // past directed unit normal, upper index
  Vec nu_lower{};
  std::array<Vec, kMaxDim> tangent{};  // tangent[i][alpha] = x^alpha_i
  bool has_second = false;
  Mat h{};
  double H = 0.0;
  double norm_A2 = 0.0;  // h^i_j h^j_i
  double intrinsic_scalar = 0.0;
};

/// Induced metric, tilt factor and normal. Throws NumericalAbort when
/// |Du| >= 1 at the node.
ExtrinsicData graph_geometry(const GraphHypersurface& surface, std::span<const double> node);

/// graph_geometry plus h_ij, H, |A|^2 and the intrinsic scalar curvature.
ExtrinsicData second_fundamental(const GraphHypersurface& surface, std::span<const double> node);

/// h_ij = -g(x_ij, nu) from all components of the covariant Hessian of the
/// embedding, and max |g(x_ij, x_k)| which must vanish.
struct EmbeddingHessianCheck {
  Mat h{};
  double tangential = 0.0;
};
EmbeddingHessianCheck embedding_hessian_check(const GraphHypersurface& surface, std::span<const double> node);

/// h_ij = e^{psi}(-sigma_ij' / 2 - psi' sigma_ij) of the slice {t = tau} at a
/// spatial node.
Mat coordinate_slice_curvature(const SpacetimeMetric& metric, double tau, std::span<const double> node);

struct GaussCodazziResiduals {
  double gauss_trace = 0.0;  // |R + (H^2 - |A|^2) - 2 G(nu, nu)|
  double gauss_full = 0.0;   // max |R_ijkl + (h_ik h_jl - h_il h_jk) - Rbar(x_i, x_j, x_k, x_l)|
  double codazzi = 0.0;      // max |h_ij;k - h_ik;j - Rbar(nu, x_i, x_j, x_k)|
  double two_G_nu_nu = 0.0;
  /// Largest magnitude among the terms of each identity, for relative use.
  double trace_scale = 0.0;
  double full_scale = 0.0;
  double codazzi_scale = 0.0;
};
GaussCodazziResiduals gauss_codazzi_residuals(const GraphHypersurface& surface, std::span<const double> node);

/// max_ij |e^{psi} h^j_i - h~^j_i - psi_a nu~^a delta^j_i| with the tilde
/// quantities taken in the conformal metric; `relative` divides by 1 + the
/// largest term magnitude.
struct ExtrinsicConformalResidual {
  double absolute = 0.0;
  double relative = 0.0;
};
ExtrinsicConformalResidual conformal_extrinsic_residual(const GraphHypersurface& surface,
                                                        std::span<const double> node);

}  // namespace arwmass
