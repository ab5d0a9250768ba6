#include "arwmass/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "arwmass/error.hpp"

namespace arwmass {

CurvatureBundle curvature_from(const MetricSample& sample) {
  CurvatureBundle c;
  const int n = sample.dim;
  c.dim = n;
  c.metric = sample;
  c.connection = connection_from(sample);
  const Rank3& G = c.connection.gamma;
  const Rank4& dG = c.connection.dgamma;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int p = 0; p < n; ++p)
        for (int q = p + 1; q < n; ++q) {
          double r = dG[p][a][b][q] - dG[q][a][b][p];
          for (int e = 0; e < n; ++e) r += G[a][p][e] * G[e][b][q] - G[a][q][e] * G[e][b][p];
          c.riemann[a][b][p][q] = r;
          c.riemann[a][b][q][p] = -r;
        }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) {
          double r = 0.0;
          for (int e = 0; e < n; ++e) r += sample.g[a][e] * c.riemann[e][b][p][q];
          c.riemann_lower[a][b][p][q] = r;
        }
  for (int b = 0; b < n; ++b)
    for (int d = b; d < n; ++d) {
      double r = 0.0;
      for (int a = 0; a < n; ++a) r += c.riemann[a][b][a][d];
      c.ricci[b][d] = r;
    }
  // symmetric by construction up to roundoff; use the average
  for (int b = 0; b < n; ++b)
    for (int d = b + 1; d < n; ++d) {
      double r = 0.0;
      for (int a = 0; a < n; ++a) r += c.riemann[a][d][a][b];
      c.ricci[b][d] = c.ricci[d][b] = 0.5 * (c.ricci[b][d] + r);
    }
  double R = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) R += sample.g_inv[a][b] * c.ricci[a][b];
  c.scalar = R;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) c.einstein[a][b] = c.ricci[a][b] - 0.5 * R * sample.g[a][b];
  return c;
}

CurvatureBundle curvature_at(const SpacetimeMetric& metric, std::span<const double> event) {
  return curvature_from(metric_at(metric, event));
}

Mat einstein_mixed(const CurvatureBundle& c) {
  Mat out{};
  for (int a = 0; a < c.dim; ++a)
    for (int b = 0; b < c.dim; ++b) {
      double s = 0.0;
      for (int m = 0; m < c.dim; ++m) s += c.metric.g_inv[a][m] * c.einstein[m][b];
      out[a][b] = s;
    }
  return out;
}

ConformalResiduals conformal_residuals(const SpacetimeMetric& metric, std::span<const double> event) {
  const int N = metric.dim();
  const int n = metric.spatial_dim();
  const CurvatureBundle bar = curvature_at(metric, event);
  const CurvatureBundle tilde = curvature_at(metric.conformal(), event);
  const Jet psi = metric.conformal_factor().jet(event);
  const Mat& gt = tilde.metric.g;
  const Mat& gti = tilde.metric.g_inv;
  const Rank3& Gt = tilde.connection.gamma;

  Mat hess{};
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) {
      double s = psi.dd[a][b];
      for (int c = 0; c < N; ++c) s -= Gt[c][a][b] * psi.d[c];
      hess[a][b] = s;
    }
  double lap = 0.0;
  double grad2 = 0.0;
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) {
      lap += gti[a][b] * hess[a][b];
      grad2 += gti[a][b] * psi.d[a] * psi.d[b];
    }
  double ric_abs = 0.0;
  double ric_scale = 0.0;
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) {
      const double rhs = tilde.ricci[a][b] - (n - 1) * (hess[a][b] - psi.d[a] * psi.d[b]) -
                         gt[a][b] * (lap + (n - 1) * grad2);
      ric_abs = std::max(ric_abs, std::fabs(bar.ricci[a][b] - rhs));
      const double terms = std::fabs(tilde.ricci[a][b]) + (n - 1) * (std::fabs(hess[a][b]) + std::fabs(psi.d[a] * psi.d[b])) +
                           std::fabs(gt[a][b]) * (std::fabs(lap) + (n - 1) * std::fabs(grad2));
      ric_scale = std::max({ric_scale, std::fabs(bar.ricci[a][b]), terms});
    }
  const double scal_rhs = std::exp(-2.0 * psi.v) * (tilde.scalar - 2.0 * n * lap - n * (n - 1.0) * grad2);
  ConformalResiduals r;
  r.ricci_abs = ric_abs;
  r.scalar_abs = std::fabs(bar.scalar - scal_rhs);
  r.ricci = ric_abs / (1.0 + ric_scale);
  const double scal_terms =
      std::exp(-2.0 * psi.v) * (std::fabs(tilde.scalar) + 2.0 * n * std::fabs(lap) + n * (n - 1.0) * std::fabs(grad2));
  r.scalar = r.scalar_abs / (1.0 + std::max(std::fabs(bar.scalar), scal_terms));
  return r;
}

ConformalResiduals conformal_residuals(const ARWSpec& spec, std::span<const double> event) {
  return conformal_residuals(spec.metric(), event);
}

double einstein_divergence_residual(const SpacetimeMetric& metric, std::span<const double> event, double h) {
  if (!(h > 0.0)) throw InvalidArgument("divergence step must be positive");
  const int N = metric.dim();
  const CurvatureBundle center = curvature_at(metric, event);
  const Mat G = einstein_mixed(center);
  const Rank3& Gam = center.connection.gamma;
  std::vector<double> x(event.begin(), event.end());
  Rank3 dG{};  // dG[c][a][b] = d_c G^a_b
  for (int c = 0; c < N; ++c) {
    const double x0 = x[c];
    Mat plus;
    Mat minus;
    try {
      x[c] = x0 + h;
      plus = einstein_mixed(curvature_at(metric, x));
      x[c] = x0 - h;
      minus = einstein_mixed(curvature_at(metric, x));
    } catch (const Error& e) {
      throw NumericalAbort("divergence stencil leaves the domain at " + format_event(event) + ": " + e.what());
    }
    x[c] = x0;
    for (int a = 0; a < N; ++a)
      for (int b = 0; b < N; ++b) dG[c][a][b] = (plus[a][b] - minus[a][b]) / (2.0 * h);
  }
  double worst = 0.0;
  for (int b = 0; b < N; ++b) {
    double s = 0.0;
    for (int a = 0; a < N; ++a) {
      s += dG[a][a][b];
      for (int l = 0; l < N; ++l) s += Gam[a][a][l] * G[l][b] - Gam[l][a][b] * G[a][l];
    }
    worst = std::max(worst, std::fabs(s));
  }
  return worst;
}

}  // namespace arwmass
