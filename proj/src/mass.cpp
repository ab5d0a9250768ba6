#include "arwmass/mass.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "arwmass/error.hpp"
#include "arwmass/extrapolation.hpp"
#include "arwmass/parallel.hpp"

namespace arwmass {

using expr::Expression;

namespace {

using Density = std::function<double(std::span<const double>)>;

// Integral over the spatial chart of a density that already carries its
// area element.
double integrate_density(const WeightedSpacetime& w, const QuadratureGrid& grid, const Density& density) {
  if (grid.dim() != w.metric.spatial_dim()) throw InvalidArgument("grid dimension does not match the metric");
  if (w.rotational && grid.spherical()) return integrate_x1(grid, density);
  const int n = grid.dim();
  return integrate_slice(grid, density, [n](std::span<const double>) { return identity(n); });
}

std::vector<double> event_at(double t, std::span<const double> x) {
  std::vector<double> ev{t};
  ev.insert(ev.end(), x.begin(), x.end());
  return ev;
}

double spatial_volume_element(const MetricSample& s) {
  const int n = s.dim - 1;
  Mat block{};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) block[i][j] = s.g[i + 1][j + 1];
  return std::sqrt(determinant(block, n));
}

// G(eta, eta) e^{w} dA on the slice {t = tau}, eta = e^{-psi}(1, 0, ..., 0).
double slice_density(const WeightedSpacetime& w, double tau, std::span<const double> x) {
  const std::vector<double> ev = event_at(tau, x);
  const CurvatureBundle c = curvature_at(w.metric, ev);
  Vec eta{};
  eta[0] = 1.0 / std::sqrt(-c.metric.g[0][0]);
  return einstein_normal(c, eta) * std::exp(w.log_weight.value(ev)) * spatial_volume_element(c.metric);
}

Mat raise_both(const Mat& g_inv, const Mat& t, int dim) {
  Mat out{};
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b) {
      double s = 0.0;
      for (int p = 0; p < dim; ++p)
        for (int q = 0; q < dim; ++q) s += g_inv[a][p] * t[p][q] * g_inv[q][b];
      out[a][b] = s;
    }
  return out;
}

struct EigenRange {
  double min = 0.0;
  double max_abs = 0.0;
};

// Eigenvalues of B^{-1} A for symmetric A and positive definite B.
EigenRange generalized_eigenvalues(const Mat& a, const Mat& b, int n) {
  Eigen::MatrixXd A(n, n);
  Eigen::MatrixXd B(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      A(i, j) = 0.5 * (a[i][j] + a[j][i]);
      B(i, j) = 0.5 * (b[i][j] + b[j][i]);
    }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, B, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalAbort("eigenvalue solver failed");
  return {es.eigenvalues().minCoeff(), es.eigenvalues().cwiseAbs().maxCoeff()};
}

// Spatial sample points of a scan: the theta1 axis for rotational specs on
// spheres, every node otherwise.
std::vector<std::vector<double>> scan_points(const WeightedSpacetime& w, const QuadratureGrid& grid) {
  std::vector<std::vector<double>> pts;
  if (w.rotational && grid.spherical()) {
    for (double x1 : grid.axis(0).nodes) pts.push_back(grid.reference_point(x1));
    return pts;
  }
  std::vector<double> x(static_cast<std::size_t>(grid.dim()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.node(i, x);
    pts.push_back(x);
  }
  return pts;
}

Trend classify(std::span<const double> seq, double rel_tol, bool* strictly_up) {
  double scale = 0.0;
  for (double v : seq) scale = std::max(scale, std::fabs(v));
  const double tol = rel_tol * scale;
  bool up = false;
  bool down = false;
  bool all_up = seq.size() > 1;
  for (std::size_t k = 1; k < seq.size(); ++k) {
    const double d = seq[k] - seq[k - 1];
    if (d > tol) up = true;
    if (d < -tol) down = true;
    if (!(d > tol)) all_up = false;
  }
  if (strictly_up) *strictly_up = all_up;
  if (up && down) return Trend::Mixed;
  if (up) return Trend::Increasing;
  if (down) return Trend::Decreasing;
  return Trend::Constant;
}

constexpr double kTrendTolerance = 1e-13;

}  // namespace

WeightedSpacetime WeightedSpacetime::from_spec(const ARWSpec& spec) {
  return WeightedSpacetime{spec.metric(), spec.log_weight(), true};
}

WeightedSpacetime WeightedSpacetime::unweighted(SpacetimeMetric metric) {
  return WeightedSpacetime{std::move(metric), ScalarField(), false};
}

double einstein_normal(const CurvatureBundle& c, const Vec& nu) {
  double s = 0.0;
  for (int a = 0; a < c.dim; ++a)
    for (int b = 0; b < c.dim; ++b) s += c.einstein[a][b] * nu[a] * nu[b];
  return s;
}

double mass_integrand(const WeightedSpacetime& w, const ExtrinsicData& e) {
  const CurvatureBundle c = curvature_at(w.metric, e.event);
  return einstein_normal(c, e.nu) * std::exp(w.log_weight.value(e.event));
}

double slice_mass_integral(const WeightedSpacetime& w, double tau, const QuadratureGrid& grid) {
  return integrate_density(w, grid, [&](std::span<const double> x) { return slice_density(w, tau, x); });
}

double slice_mass_integral(const ARWSpec& spec, double tau, const QuadratureGrid& grid) {
  return slice_mass_integral(WeightedSpacetime::from_spec(spec), tau, grid);
}

QuadratureValue slice_mass_estimate(const ARWSpec& spec, double tau, int nodes_per_axis) {
  const WeightedSpacetime w = WeightedSpacetime::from_spec(spec);
  QuadratureValue q;
  q.value = slice_mass_integral(w, tau, QuadratureGrid::sphere(spec.n, nodes_per_axis));
  const double coarse = slice_mass_integral(w, tau, QuadratureGrid::sphere(spec.n, std::max(2, nodes_per_axis / 2)));
  q.error = std::fabs(q.value - coarse);
  return q;
}

double graph_mass_integral(const WeightedSpacetime& w, const GraphHypersurface& surface, const QuadratureGrid& grid) {
  return integrate_density(w, grid, [&](std::span<const double> x) {
    const ExtrinsicData e = graph_geometry(surface, x);
    return mass_integrand(w, e) * std::sqrt(determinant(e.g, e.n));
  });
}

double graph_mass_integral(const ARWSpec& spec, const GraphHypersurface& surface, const QuadratureGrid& grid) {
  return graph_mass_integral(WeightedSpacetime::from_spec(spec), surface, grid);
}

double weighted_graph_integral(const WeightedSpacetime& w, const GraphHypersurface& surface, const QuadratureGrid& grid,
                               const std::function<double(const ExtrinsicData&)>& density, bool second) {
  return integrate_density(w, grid, [&](std::span<const double> x) {
    const ExtrinsicData e = second ? second_fundamental(surface, x) : graph_geometry(surface, x);
    return density(e) * std::exp(w.log_weight.value(e.event)) * std::sqrt(determinant(e.g, e.n));
  });
}

double mass_from_integral(int n, double integral) { return 2.0 * integral / (n * (n - 1.0) * sphere_volume(n)); }

MassReport mass_limit(const ARWSpec& spec, const QuadratureGrid& grid, std::span<const double> times) {
  if (times.size() < 3) throw InvalidArgument("mass_limit needs at least three times");
  const WeightedSpacetime w = WeightedSpacetime::from_spec(spec);
  MassReport r;
  r.times.assign(times.begin(), times.end());
  r.integrals = parallel_map<double>(times.size(), [&](std::size_t k) { return slice_mass_integral(w, times[k], grid); });
  const Extrapolated ex = aitken(r.integrals);
  r.limit = ex.value;
  r.error = ex.error;
  r.m_hat = mass_from_integral(spec.n, r.limit);
  const Trend t = classify(r.integrals, kTrendTolerance, nullptr);
  r.monotone = t == Trend::Constant || t == Trend::Increasing;
  return r;
}

SlabBalance slab_balance(const WeightedSpacetime& w, double t1, double t2, const QuadratureGrid& grid, int time_nodes) {
  if (!(t1 < t2)) throw InvalidArgument("slab needs t1 < t2");
  const int N = w.metric.dim();
  const int n = w.metric.spatial_dim();
  SlabBalance s;
  s.t1 = t1;
  s.t2 = t2;
  s.B1 = slice_mass_integral(w, t1, grid);
  s.B2 = slice_mass_integral(w, t2, grid);

  auto volume_density = [&](double tau, std::span<const double> x) {
    const std::vector<double> ev = event_at(tau, x);
    const CurvatureBundle c = curvature_at(w.metric, ev);
    const Mat G = raise_both(c.metric.g_inv, c.einstein, N);
    const Mat hb = coordinate_slice_curvature(w.metric, tau, x);
    const Jet lw = w.log_weight.jet(ev);
    const double psi = w.metric.conformal_factor().value(ev);
    double s_ij = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s_ij += G[i + 1][j + 1] * hb[i][j];
    const double bulk = s_ij + G[0][0] * lw.d[0] * std::exp(psi);
    return bulk * std::exp(lw.v) * std::sqrt(std::fabs(c.metric.det));
  };
  const QuadratureAxis ta = gauss_legendre(time_nodes, t1, t2);
  const std::vector<double> layers = parallel_map<double>(ta.nodes.size(), [&](std::size_t k) {
    return integrate_density(w, grid, [&](std::span<const double> x) { return volume_density(ta.nodes[k], x); });
  });
  s.V = 0.0;
  for (std::size_t k = 0; k < layers.size(); ++k) s.V += ta.weights[k] * layers[k];
  s.residual = std::fabs(s.B2 - s.B1 - s.V);
  s.relative = s.residual / std::max({std::fabs(s.B1), std::fabs(s.B2), std::fabs(s.V), 1.0});
  return s;
}

SlabBalance slab_balance(const ARWSpec& spec, double t1, double t2, const QuadratureGrid& grid, int time_nodes) {
  return slab_balance(WeightedSpacetime::from_spec(spec), t1, t2, grid, time_nodes);
}

std::string to_string(Trend t) {
  switch (t) {
    case Trend::Constant:
      return "constant";
    case Trend::Increasing:
      return "increasing";
    case Trend::Decreasing:
      return "decreasing";
    case Trend::Mixed:
      break;
  }
  return "mixed";
}

MonotonicityReport monotonicity_scan(const ARWSpec& spec, std::span<const double> times, const QuadratureGrid& grid) {
  const WeightedSpacetime w = WeightedSpacetime::from_spec(spec);
  const int n = spec.n;
  const int N = n + 1;
  const std::vector<std::vector<double>> pts = scan_points(w, grid);
  MonotonicityReport r;
  r.times.assign(times.begin(), times.end());
  r.integrals = parallel_map<double>(times.size(), [&](std::size_t k) { return slice_mass_integral(w, times[k], grid); });
  r.f_prime_negative = r.g00_nonnegative = r.gij_psd = r.convex = true;
  for (double tau : times) {
    const double fp = spec.f.derivatives(tau)[1];
    r.f_prime.push_back(fp);
    if (!(fp < 0.0)) r.f_prime_negative = false;
    double g00 = std::numeric_limits<double>::infinity();
    double gij = g00;
    double conv = g00;
    for (const std::vector<double>& x : pts) {
      const CurvatureBundle c = curvature_at(w.metric, event_at(tau, x));
      const Mat G = raise_both(c.metric.g_inv, c.einstein, N);
      const Mat mixed = einstein_mixed(c);
      const double g_size = 1.0 + max_abs(mixed, N);
      Mat Gs{};
      Mat gs_inv{};
      Mat gs{};
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          Gs[i][j] = G[i + 1][j + 1];
          gs_inv[i][j] = c.metric.g_inv[i + 1][j + 1];
          gs[i][j] = c.metric.g[i + 1][j + 1];
        }
      g00 = std::min(g00, G[0][0]);
      // G^{00} g_00^2 = G_00 = g_00 G^0_0 is bounded by |g_00| max |G^a_b|
      if (G[0][0] * c.metric.g[0][0] * c.metric.g[0][0] < -1e-9 * g_size * std::fabs(c.metric.g[0][0]))
        r.g00_nonnegative = false;
      const EigenRange ge = generalized_eigenvalues(Gs, gs_inv, n);
      gij = std::min(gij, ge.min);
      if (ge.min < -1e-9 * g_size) r.gij_psd = false;
      const EigenRange he = generalized_eigenvalues(coordinate_slice_curvature(w.metric, tau, x), gs, n);
      conv = std::min(conv, he.min);
      if (he.min < -1e-9 * (1.0 + he.max_abs)) r.convex = false;
    }
    r.g00_min.push_back(g00);
    r.gij_min_eig.push_back(gij);
    r.convexity_min.push_back(conv);
  }
  r.trend = classify(r.integrals, kTrendTolerance, &r.strictly_increasing);
  return r;
}

namespace {

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Orthonormal frame of a Gaussian-form metric: e0 along t, spatial vectors by
// Gram-Schmidt on the coordinate basis.
std::array<Vec, kMaxDim> orthonormal_frame(const MetricSample& s) {
  const int N = s.dim;
  std::array<Vec, kMaxDim> e{};
  e[0][0] = 1.0 / std::sqrt(-s.g[0][0]);
  auto dot = [&](const Vec& a, const Vec& b) {
    double r = 0.0;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) r += s.g[i][j] * a[i] * b[j];
    return r;
  };
  for (int k = 1; k < N; ++k) {
    Vec v{};
    v[k] = 1.0;
    // g(v, e0) = 0 already in Gaussian form; remove the spatial projections
    for (int j = 1; j < k; ++j) {
      const double c = dot(v, e[j]);
      for (int i = 0; i < N; ++i) v[i] -= c * e[j][i];
    }
    const double norm = std::sqrt(dot(v, v));
    for (int i = 0; i < N; ++i) e[k][i] = v[i] / norm;
  }
  return e;
}

}  // namespace

TccReport tcc_check(const SpacetimeMetric& metric, std::span<const std::vector<double>> events, int directions,
                    std::uint64_t seed, double max_rapidity, double tolerance) {
  if (directions < 1) throw InvalidArgument("tcc_check needs at least one direction per event");
  const int N = metric.dim();
  const int n = N - 1;
  std::mt19937_64 rng(seed);
  // draw every direction up front so the result does not depend on threading
  std::vector<std::vector<std::pair<double, Vec>>> draws(events.size());
  for (auto& per_event : draws) {
    for (int d = 0; d < directions; ++d) {
      Vec dir{};
      double norm = 0.0;
      while (norm < 1e-12) {
        norm = 0.0;
        for (int k = 0; k < n; ++k) {
          // Box-Muller keeps the stream platform independent
          const double u1 = 1.0 - unit_uniform(rng);
          const double u2 = unit_uniform(rng);
          dir[k] = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
          norm += dir[k] * dir[k];
        }
      }
      for (int k = 0; k < n; ++k) dir[k] /= std::sqrt(norm);
      per_event.emplace_back(max_rapidity * unit_uniform(rng), dir);
    }
  }
  struct EventResult {
    double minimum = std::numeric_limits<double>::infinity();
    std::vector<TccViolation> violations;
  };
  const std::vector<EventResult> results = parallel_map<EventResult>(events.size(), [&](std::size_t i) {
    const CurvatureBundle c = curvature_at(metric, events[i]);
    const std::array<Vec, kMaxDim> e = orthonormal_frame(c.metric);
    EventResult out;
    for (const auto& [chi, dir] : draws[i]) {
      Vec nu{};
      for (int a = 0; a < N; ++a) {
        nu[a] = std::cosh(chi) * e[0][a];
        for (int k = 0; k < n; ++k) nu[a] += std::sinh(chi) * dir[k] * e[k + 1][a];
      }
      double value = 0.0;
      double size = 0.0;
      for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b) {
          const double t = c.ricci[a][b] * nu[a] * nu[b];
          value += t;
          size += std::fabs(t);
        }
      out.minimum = std::min(out.minimum, value);
      if (value < -tolerance * (1.0 + size)) out.violations.push_back({events[i], nu, value});
    }
    return out;
  });
  TccReport r;
  r.minimum = std::numeric_limits<double>::infinity();
  for (const EventResult& e : results) {
    r.minimum = std::min(r.minimum, e.minimum);
    r.violations.insert(r.violations.end(), e.violations.begin(), e.violations.end());
  }
  r.samples = events.size() * static_cast<std::size_t>(directions);
  if (events.empty()) r.minimum = 0.0;
  return r;
}

std::vector<std::vector<double>> sample_events(int n, std::size_t count, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> out(count);
  for (std::vector<double>& ev : out) {
    ev.push_back(lo + (hi - lo) * unit_uniform(rng));
    for (int k = 0; k < n; ++k) ev.push_back(0.1 + (std::numbers::pi - 0.2) * unit_uniform(rng));
  }
  return out;
}

double slice_carrier_volume(const ARWSpec& spec, int nodes_per_axis) {
  const QuadratureGrid grid = QuadratureGrid::sphere(spec.n, nodes_per_axis);
  const ScalarField lambda = spec.lambda_field();
  const double c = std::pow(spec.sigma_scale, 0.5 * spec.n);
  return integrate_x1(grid, [&](std::span<const double> x) {
    const std::vector<double> ev = event_at(0.0, x);
    const Mat round = round_sphere_metric(spec.n, x);
    return c * std::exp(spec.n * lambda.value(ev)) * std::sqrt(determinant(round, spec.n));
  });
}

std::pair<ARWSpec, double> normalize(const ARWSpec& spec, int nodes_per_axis) {
  spec.check();
  const double vol = slice_carrier_volume(spec, nodes_per_axis);
  const double lam = std::pow(sphere_volume(spec.n) / vol, 2.0 / spec.n);
  if (std::fabs(lam - 1.0) <= 4.0 * std::numeric_limits<double>::epsilon()) return {spec, 1.0};
  return {rescale(spec, lam), lam};
}

ARWSpec reparametrize_time(const ARWSpec& spec, double eps) {
  spec.check();
  if (eps == 0.0) return spec;
  // phi'(s) runs between sqrt(1 + 4 eps a) at the start and 1 at s = 0
  const double disc = 1.0 + 4.0 * eps * spec.a;
  if (!(disc > 0.0)) throw InvalidArgument("time map s + eps s^2 is not increasing on the domain");
  ARWSpec out = spec;
  out.a = (-1.0 + std::sqrt(disc)) / (2.0 * eps);
  const Expression t = Expression::variable("t");
  const Expression phi = t + Expression(eps) * expr::pow(t, Expression(2.0));
  const Expression slope = Expression(1.0) + Expression(2.0 * eps) * t;
  out.f = spec.f.reparametrized(eps);
  out.psi = expr::substitute(canonical_coordinates(spec.psi), "t", phi);
  out.lambda = expr::substitute(canonical_coordinates(spec.lambda), "t", phi) - expr::log(slope);
  return out;
}

}  // namespace arwmass
