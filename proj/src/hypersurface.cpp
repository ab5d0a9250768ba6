#include "arwmass/hypersurface.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "arwmass/error.hpp"
#include "arwmass/field.hpp"

namespace arwmass {

using expr::Expression;

namespace {

const std::string kTheta1 = "theta1";

using JetMat = std::array<std::array<Jet, kMaxDim>, kMaxDim>;

JetMat zero_jets(int dim) {
  JetMat m{};
  for (auto& row : m)
    for (Jet& j : row) j = Jet::constant(dim, 0.0);
  return m;
}

// Inverse of a symmetric matrix of 2-jets:
// d(A^-1) = -A^-1 dA A^-1,
// dd(A^-1) = A^-1 (dA_k A^-1 dA_l + dA_l A^-1 dA_k - ddA_kl) A^-1.
JetMat invert_jets(int n, const JetMat& a, int dim) {
  Mat v{};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) v[i][j] = a[i][j].v;
  Mat vi{};
  if (!invert(v, n, vi)) throw NumericalAbort("singular spatial metric on graph");
  auto mul = [n](const Mat& x, const Mat& y) {
    Mat r{};
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) r[i][j] += x[i][k] * y[k][j];
    return r;
  };
  std::array<Mat, kMaxDim> dA{};
  for (int k = 0; k < dim; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) dA[k][i][j] = a[i][j].d[k];
  JetMat out = zero_jets(dim);
  int order = 2;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) order = std::min(order, a[i][j].order);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      out[i][j].v = vi[i][j];
      out[i][j].order = order;
    }
  for (int k = 0; k < dim; ++k) {
    const Mat d = mul(mul(vi, dA[k]), vi);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out[i][j].d[k] = -d[i][j];
    for (int l = 0; l < dim; ++l) {
      Mat inner = mul(mul(dA[k], vi), dA[l]);
      const Mat other = mul(mul(dA[l], vi), dA[k]);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) inner[i][j] += other[i][j] - a[i][j].dd[k][l];
      const Mat dd = mul(mul(vi, inner), vi);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out[i][j].dd[k][l] = dd[i][j];
    }
  }
  return out;
}

// Everything about the graph at one node, as jets in the spatial coordinates.
struct Pullback {
  int n = 0;
  int N = 0;
  std::vector<double> event;
  std::string where;
  std::array<Jet, kMaxDim> X{};                   // X^alpha(y)
  std::array<std::array<Jet, kMaxDim>, kMaxDim> T{};  // T[i][alpha] = d_i X^alpha
  MetricSample ambient;
  MetricSample induced;
  Jet psi;
  Jet v;
  double du2 = 0.0;
  Vec nu{};
  Vec nu_lower{};
  Vec u_up{};  // sigma^{ij} u_j
};

Pullback pull_back(const GraphHypersurface& s, std::span<const double> node) {
  Pullback p;
  p.n = s.dim();
  p.N = p.n + 1;
  const int n = p.n;
  const int N = p.N;
  if (static_cast<int>(node.size()) != n) throw InvalidArgument("graph node has wrong dimension");
  const auto hu = s.height(node[0]);
  p.event.assign(static_cast<std::size_t>(N), 0.0);
  p.event[0] = hu[0];
  for (int k = 0; k < n; ++k) p.event[static_cast<std::size_t>(k + 1)] = node[static_cast<std::size_t>(k)];
  p.where = format_event(p.event);

  p.X[0] = Jet::constant(n, hu[0]);
  p.X[0].d[0] = hu[1];
  p.X[0].dd[0][0] = hu[2];
  for (int k = 0; k < n; ++k) p.X[k + 1] = Jet::coordinate(n, k, node[static_cast<std::size_t>(k)]);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < N; ++a) p.T[i][a] = Jet::constant(n, a == i + 1 ? 1.0 : 0.0);
  p.T[0][0] = Jet::constant(n, hu[1]);
  p.T[0][0].d[0] = hu[2];
  p.T[0][0].dd[0][0] = hu[3];

  const SpacetimeMetric& m = s.ambient();
  const auto comps = m.component_jets(p.event);
  p.ambient = sample_from_jets(N, comps, p.where);
  const std::span<const Jet> X(p.X.data(), static_cast<std::size_t>(N));

  JetMat gbar = zero_jets(n);
  for (int a = 0; a < N; ++a)
    for (int b = a; b < N; ++b) gbar[a][b] = gbar[b][a] = compose(comps[a][b], X);
  JetMat gind = zero_jets(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Jet acc = Jet::constant(n, 0.0);
      for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b) acc = acc + gbar[a][b] * p.T[i][a] * p.T[j][b];
      gind[i][j] = gind[j][i] = acc;
    }
  p.induced = sample_from_jets(n, gind, p.where);

  p.psi = m.conformal_factor().is_zero() ? Jet::constant(n, 0.0) : compose(m.conformal_factor().jet(p.event), X);

  JetMat sigma = zero_jets(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const ScalarField& f = m.sigma(i, j);
      if (f.is_zero()) continue;
      sigma[i][j] = sigma[j][i] = compose(f.jet(p.event), X);
    }
  const JetMat sigma_inv = invert_jets(n, sigma, n);
  Jet du2 = Jet::constant(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) du2 = du2 + sigma_inv[i][j] * p.T[i][0] * p.T[j][0];
  p.du2 = du2.v;
  if (!(du2.v < 1.0)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", du2.v);
    throw NumericalAbort("graph is not spacelike at " + p.where + ": |Du|^2 = " + buf);
  }
  p.v = sqrt(Jet::constant(n, 1.0) - du2);

  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += sigma_inv[i][j].v * p.T[j][0].v;
    p.u_up[i] = s;
  }
  const double nu0 = -1.0 / (p.v.v * std::exp(p.psi.v));
  p.nu[0] = nu0;
  for (int i = 0; i < n; ++i) p.nu[i + 1] = nu0 * p.u_up[i];
  for (int a = 0; a < N; ++a) {
    double s = 0.0;
    for (int b = 0; b < N; ++b) s += p.ambient.g[a][b] * p.nu[b];
    p.nu_lower[a] = s;
  }
  return p;
}

ExtrinsicData first_part(const Pullback& p) {
  ExtrinsicData e;
  e.n = p.n;
  e.event = p.event;
  e.g = p.induced.g;
  e.g_inv = p.induced.g_inv;
  e.du2 = p.du2;
  e.v = p.v.v;
  e.psi = p.psi.v;
  e.nu = p.nu;
  e.nu_lower = p.nu_lower;
  for (int i = 0; i < p.n; ++i)
    for (int a = 0; a < p.N; ++a) e.tangent[i][a] = p.T[i][a].v;
  return e;
}

// h_ij as 1-jets in the spatial coordinates.
struct SecondData {
  Connection induced;
  Connection ambient;
  std::array<std::array<Jet, kMaxDim>, kMaxDim> h{};
};

SecondData second_part(const Pullback& p) {
  const int n = p.n;
  const int N = p.N;
  SecondData d;
  d.induced = connection_from(p.induced);
  d.ambient = connection_from(p.ambient);
  auto gamma_ind = [&](int k, int i, int j) {
    Jet r = Jet::constant(n, d.induced.gamma[k][i][j]);
    r.order = 1;
    for (int l = 0; l < n; ++l) r.d[l] = d.induced.dgamma[l][k][i][j];
    return r;
  };
  auto gamma0 = [&](int b, int c) {
    Jet r = Jet::constant(n, d.ambient.gamma[0][b][c]);
    r.order = 1;
    for (int l = 0; l < n; ++l) {
      double s = 0.0;
      for (int a = 0; a < N; ++a) s += d.ambient.dgamma[a][0][b][c] * p.X[a].d[l];
      r.d[l] = s;
    }
    return r;
  };
  const Jet scale = p.v * exp(p.psi) * -1.0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Jet b = partial(p.T[i][0], j);
      for (int k = 0; k < n; ++k) b = b - gamma_ind(k, i, j) * p.T[k][0];
      for (int x = 0; x < N; ++x)
        for (int y = 0; y < N; ++y) b = b + gamma0(x, y) * p.T[i][x] * p.T[j][y];
      d.h[i][j] = d.h[j][i] = scale * b;
    }
  return d;
}

void fill_second(ExtrinsicData& e, const Pullback& p, const SecondData& d) {
  const int n = p.n;
  e.has_second = true;
  Mat mixed{};  // h^i_j
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      e.h[i][j] = d.h[i][j].v;
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += p.induced.g_inv[i][k] * e.h[k][j];
      mixed[i][j] = s;
    }
  e.H = 0.0;
  e.norm_A2 = 0.0;
  for (int i = 0; i < n; ++i) {
    e.H += mixed[i][i];
    for (int j = 0; j < n; ++j) e.norm_A2 += mixed[i][j] * mixed[j][i];
  }
}

}  // namespace

GraphHypersurface::GraphHypersurface(SpacetimeMetric ambient, const Expression& u)
    : ambient_(std::move(ambient)), u_(canonical_coordinates(u)) {
  for (const std::string& var : u_.free_variables())
    if (var != kTheta1) throw InvalidArgument("graph function may depend on theta1 only, found '" + var + "'");
  const std::span<const std::string> slots(&kTheta1, 1);
  du_[0] = expr::CompiledExpression(u_, slots);
  for (int k = 1; k < 4; ++k) du_[static_cast<std::size_t>(k)] = expr::CompiledExpression(expr::differentiate(u_, kTheta1, k), slots);
}

GraphHypersurface::GraphHypersurface(SpacetimeMetric ambient, double u)
    : GraphHypersurface(std::move(ambient), Expression(u)) {}

std::optional<double> GraphHypersurface::constant_height() const {
  if (u_.is_number()) return u_.number_value();
  return std::nullopt;
}

std::array<double, 4> GraphHypersurface::height(double theta1) const {
  const double x[1] = {theta1};
  return {du_[0](x), du_[1](x), du_[2](x), du_[3](x)};
}

GraphHypersurface GraphHypersurface::with_ambient(SpacetimeMetric ambient) const {
  if (ambient.spatial_dim() != ambient_.spatial_dim()) throw InvalidArgument("ambient dimension mismatch");
  GraphHypersurface out = *this;
  out.ambient_ = std::move(ambient);
  return out;
}

ExtrinsicData graph_geometry(const GraphHypersurface& surface, std::span<const double> node) {
  return first_part(pull_back(surface, node));
}

ExtrinsicData second_fundamental(const GraphHypersurface& surface, std::span<const double> node) {
  const Pullback p = pull_back(surface, node);
  ExtrinsicData e = first_part(p);
  fill_second(e, p, second_part(p));
  e.intrinsic_scalar = curvature_from(p.induced).scalar;
  return e;
}

EmbeddingHessianCheck embedding_hessian_check(const GraphHypersurface& surface, std::span<const double> node) {
  const Pullback p = pull_back(surface, node);
  const int n = p.n;
  const int N = p.N;
  const Connection ind = connection_from(p.induced);
  const Connection amb = connection_from(p.ambient);
  EmbeddingHessianCheck out;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Vec x{};  // x^alpha_ij
      for (int a = 0; a < N; ++a) {
        double s = p.T[i][a].d[j];
        for (int k = 0; k < n; ++k) s -= ind.gamma[k][i][j] * p.T[k][a].v;
        for (int b = 0; b < N; ++b)
          for (int c = 0; c < N; ++c) s += amb.gamma[a][b][c] * p.T[i][b].v * p.T[j][c].v;
        x[a] = s;
      }
      double hn = 0.0;
      for (int a = 0; a < N; ++a) hn -= x[a] * p.nu_lower[a];
      out.h[i][j] = hn;
      for (int k = 0; k < n; ++k) {
        double t = 0.0;
        for (int a = 0; a < N; ++a)
          for (int b = 0; b < N; ++b) t += p.ambient.g[a][b] * x[a] * p.T[k][b].v;
        out.tangential = std::max(out.tangential, std::fabs(t));
      }
    }
  return out;
}

Mat coordinate_slice_curvature(const SpacetimeMetric& metric, double tau, std::span<const double> node) {
  const int n = metric.spatial_dim();
  if (static_cast<int>(node.size()) != n) throw InvalidArgument("slice node has wrong dimension");
  std::vector<double> ev{tau};
  ev.insert(ev.end(), node.begin(), node.end());
  const Jet psi = metric.conformal_factor().jet(ev);
  const double e = std::exp(psi.v);
  Mat h{};
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const ScalarField& s = metric.sigma(i, j);
      if (s.is_zero()) continue;
      const Jet sj = s.jet(ev);
      h[i][j] = h[j][i] = e * (-0.5 * sj.d[0] - psi.d[0] * sj.v);
    }
  return h;
}

GaussCodazziResiduals gauss_codazzi_residuals(const GraphHypersurface& surface, std::span<const double> node) {
  const Pullback p = pull_back(surface, node);
  const int n = p.n;
  const int N = p.N;
  const SecondData d = second_part(p);
  ExtrinsicData e = first_part(p);
  fill_second(e, p, d);
  const CurvatureBundle intr = curvature_from(p.induced);
  const CurvatureBundle amb = curvature_from(p.ambient);
  GaussCodazziResiduals r;

  // Rbar(w, x_j, x_k, x_l) for an ambient vector w.
  auto rbar = [&](const Vec& w, int j, int k, int l) {
    double s = 0.0;
    for (int a = 0; a < N; ++a) {
      if (w[a] == 0.0) continue;
      for (int b = 0; b < N; ++b) {
        const double xb = p.T[j][b].v;
        if (xb == 0.0) continue;
        for (int c = 0; c < N; ++c) {
          const double xc = p.T[k][c].v;
          if (xc == 0.0) continue;
          for (int q = 0; q < N; ++q) {
            const double xq = p.T[l][q].v;
            if (xq == 0.0) continue;
            s += amb.riemann_lower[a][b][c][q] * w[a] * xb * xc * xq;
          }
        }
      }
    }
    return s;
  };
  auto tangent = [&](int i) {
    Vec w{};
    for (int a = 0; a < N; ++a) w[a] = p.T[i][a].v;
    return w;
  };

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const double ext = e.h[i][k] * e.h[j][l] - e.h[i][l] * e.h[j][k];
          const double amb_term = rbar(tangent(i), j, k, l);
          const double lhs = intr.riemann_lower[i][j][k][l];
          r.gauss_full = std::max(r.gauss_full, std::fabs(lhs + ext - amb_term));
          r.full_scale = std::max({r.full_scale, std::fabs(lhs), std::fabs(ext), std::fabs(amb_term)});
        }

  double Gnn = 0.0;
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) Gnn += amb.einstein[a][b] * p.nu[a] * p.nu[b];
  r.two_G_nu_nu = 2.0 * Gnn;
  r.gauss_trace = std::fabs(intr.scalar + (e.H * e.H - e.norm_A2) - 2.0 * Gnn);
  r.trace_scale = std::max({std::fabs(intr.scalar), e.H * e.H, std::fabs(e.norm_A2), std::fabs(2.0 * Gnn)});

  // h_ij;k = d_k h_ij - Gamma^l_ki h_lj - Gamma^l_kj h_il
  auto cov = [&](int i, int j, int k) {
    double s = d.h[i][j].d[k];
    for (int l = 0; l < n; ++l) s -= d.induced.gamma[l][k][i] * e.h[l][j] + d.induced.gamma[l][k][j] * e.h[i][l];
    return s;
  };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double lhs = cov(i, j, k) - cov(i, k, j);
        const double amb_term = rbar(p.nu, i, j, k);
        r.codazzi = std::max(r.codazzi, std::fabs(lhs - amb_term));
        r.codazzi_scale = std::max({r.codazzi_scale, std::fabs(cov(i, j, k)), std::fabs(amb_term)});
      }
  return r;
}

ExtrinsicConformalResidual conformal_extrinsic_residual(const GraphHypersurface& surface,
                                                        std::span<const double> node) {
  const ExtrinsicData bar = second_fundamental(surface, node);
  const ExtrinsicData tilde = second_fundamental(surface.with_ambient(surface.ambient().conformal()), node);
  const int n = bar.n;
  const int N = n + 1;
  const Jet psi = surface.ambient().conformal_factor().jet(bar.event);
  double psi_nu = 0.0;
  for (int a = 0; a < N; ++a) psi_nu += psi.d[a] * tilde.nu[a];
  const double e = std::exp(psi.v);
  ExtrinsicConformalResidual r;
  double scale = std::fabs(psi_nu);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double hb = 0.0;
      double ht = 0.0;
      for (int k = 0; k < n; ++k) {
        hb += bar.g_inv[j][k] * bar.h[i][k];
        ht += tilde.g_inv[j][k] * tilde.h[i][k];
      }
      const double res = e * hb - ht - (i == j ? psi_nu : 0.0);
      r.absolute = std::max(r.absolute, std::fabs(res));
      scale = std::max({scale, std::fabs(e * hb), std::fabs(ht)});
    }
  r.relative = r.absolute / (1.0 + scale);
  return r;
}

}  // namespace arwmass
