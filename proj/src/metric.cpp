#include "arwmass/geometry.hpp"

#include <cstdio>

#include "arwmass/error.hpp"

namespace arwmass {

SpacetimeMetric::SpacetimeMetric(int n, ScalarField conformal_factor, std::vector<ScalarField> sigma,
                                 std::vector<std::string> labels)
    : n_(n), psi_(std::move(conformal_factor)), sigma_(std::move(sigma)), labels_(std::move(labels)) {
  if (n < 1 || n + 1 > kMaxDim) throw InvalidArgument("spatial dimension must be in [1, 3]");
  if (sigma_.size() != static_cast<std::size_t>(n * n)) throw InvalidArgument("sigma must have n*n components");
  if (labels_.empty()) {
    for (int k = 0; k <= n; ++k) labels_.push_back(coordinate_name(k));
  }
  if (labels_.size() != static_cast<std::size_t>(n + 1)) throw InvalidArgument("need one chart label per coordinate");
}

SpacetimeMetric SpacetimeMetric::flat(int n) {
  std::vector<ScalarField> sigma(static_cast<std::size_t>(n * n));
  for (int i = 0; i < n; ++i) sigma[static_cast<std::size_t>(i * n + i)] = ScalarField::constant(1.0);
  return SpacetimeMetric(n, ScalarField(), std::move(sigma));
}

SpacetimeMetric SpacetimeMetric::conformal() const { return SpacetimeMetric(n_, ScalarField(), sigma_, labels_); }

bool SpacetimeMetric::depends_only_on_t_and_x1() const {
  unsigned mask = psi_.dependency_mask();
  for (const ScalarField& s : sigma_) mask |= s.dependency_mask();
  return (mask & ~3u) == 0;
}

std::array<std::array<Jet, kMaxDim>, kMaxDim> SpacetimeMetric::component_jets(std::span<const double> event) const {
  const int dim = n_ + 1;
  if (static_cast<int>(event.size()) != dim) throw InvalidArgument("event has wrong dimension");
  std::array<std::array<Jet, kMaxDim>, kMaxDim> g{};
  for (auto& row : g)
    for (Jet& j : row) j = Jet::constant(dim, 0.0);
  const bool unit = psi_.is_zero();
  const Jet e = unit ? Jet::constant(dim, 1.0) : exp(psi_.jet(event) * 2.0);
  g[0][0] = -e;
  for (int i = 0; i < n_; ++i) {
    for (int j = i; j < n_; ++j) {
      const ScalarField& s = sigma(i, j);
      if (s.is_zero()) continue;
      const Jet c = unit ? s.jet(event) : e * s.jet(event);
      g[i + 1][j + 1] = c;
      g[j + 1][i + 1] = c;
    }
  }
  return g;
}

std::string format_event(std::span<const double> event) {
  std::string out = "(";
  char buf[32];
  for (std::size_t k = 0; k < event.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", event[k]);
    if (k) out += ", ";
    out += buf;
  }
  return out + ")";
}

MetricSample sample_from_jets(int dim, const std::array<std::array<Jet, kMaxDim>, kMaxDim>& g,
                              const std::string& where) {
  MetricSample s;
  s.dim = dim;
  for (int a = 0; a < dim; ++a) {
    for (int b = 0; b < dim; ++b) {
      s.g[a][b] = g[a][b].v;
      for (int c = 0; c < dim; ++c) {
        s.dg[c][a][b] = g[a][b].d[c];
        for (int d = 0; d < dim; ++d) s.ddg[c][d][a][b] = g[a][b].dd[c][d];
      }
    }
  }
  s.det = determinant(s.g, dim);
  // Degeneracy is judged on the diagonally normalized matrix so that the
  // overall conformal scale (tiny near the singularity) does not matter.
  Vec scale{};
  double largest = 0.0;
  for (int a = 0; a < dim; ++a) largest = std::fmax(largest, std::fabs(s.g[a][a]));
  bool degenerate = !(largest > 0.0);
  for (int a = 0; a < dim && !degenerate; ++a) {
    const double d = std::fabs(s.g[a][a]);
    if (!(d > 1e-14 * largest)) degenerate = true;
    scale[a] = 1.0 / std::sqrt(d);
  }
  if (!degenerate) {
    Mat unit{};
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b) unit[a][b] = s.g[a][b] * scale[a] * scale[b];
    degenerate = !(std::fabs(determinant(unit, dim)) >= 1e-14);
  }
  if (degenerate || !invert(s.g, dim, s.g_inv)) throw NumericalAbort("degenerate metric at " + where);
  for (int a = 0; a < dim; ++a)
    for (int b = a + 1; b < dim; ++b) s.g_inv[a][b] = s.g_inv[b][a] = 0.5 * (s.g_inv[a][b] + s.g_inv[b][a]);
  return s;
}

MetricSample metric_at(const SpacetimeMetric& metric, std::span<const double> event) {
  const auto jets = metric.component_jets(event);
  return sample_from_jets(metric.dim(), jets, format_event(event));
}

Connection connection_from(const MetricSample& s) {
  const int n = s.dim;
  Connection c;
  c.dim = n;
  // S_dbc = d_b g_dc + d_c g_db - d_d g_bc
  Rank3 S{};
  for (int d = 0; d < n; ++d)
    for (int b = 0; b < n; ++b)
      for (int k = b; k < n; ++k) S[d][b][k] = S[d][k][b] = s.dg[b][d][k] + s.dg[k][d][b] - s.dg[d][b][k];
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int k = b; k < n; ++k) {
        double acc = 0.0;
        for (int d = 0; d < n; ++d) acc += s.g_inv[a][d] * S[d][b][k];
        c.gamma[a][b][k] = c.gamma[a][k][b] = 0.5 * acc;
      }
  // d_e Gamma^a_bc = -g^{ap} d_e g_pq Gamma^q_bc + 1/2 g^{ad} d_e S_dbc
  for (int e = 0; e < n; ++e) {
    Mat M{};  // g^{-1} d_e g
    for (int a = 0; a < n; ++a)
      for (int q = 0; q < n; ++q) {
        double acc = 0.0;
        for (int p = 0; p < n; ++p) acc += s.g_inv[a][p] * s.dg[e][p][q];
        M[a][q] = acc;
      }
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int k = b; k < n; ++k) {
          double acc = 0.0;
          for (int q = 0; q < n; ++q) acc -= M[a][q] * c.gamma[q][b][k];
          double dS = 0.0;
          for (int d = 0; d < n; ++d)
            dS += s.g_inv[a][d] * (s.ddg[e][b][d][k] + s.ddg[e][k][d][b] - s.ddg[e][d][b][k]);
          c.dgamma[e][a][b][k] = c.dgamma[e][a][k][b] = acc + 0.5 * dS;
        }
  }
  return c;
}

Rank3 christoffel_at(const SpacetimeMetric& metric, std::span<const double> event) {
  const MetricSample s = metric_at(metric, event);
  const int n = s.dim;
  Rank3 gamma{};
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = b; c < n; ++c) {
        double acc = 0.0;
        for (int d = 0; d < n; ++d) acc += s.g_inv[a][d] * (s.dg[b][d][c] + s.dg[c][d][b] - s.dg[d][b][c]);
        gamma[a][b][c] = gamma[a][c][b] = 0.5 * acc;
      }
  return gamma;
}

Mat round_sphere_metric(int n, std::span<const double> angles) {
  Mat m{};
  double w = 1.0;
  for (int i = 0; i < n; ++i) {
    m[i][i] = w;
    const double s = std::sin(angles[static_cast<std::size_t>(i)]);
    w *= s * s;
  }
  return m;
}

}  // namespace arwmass
