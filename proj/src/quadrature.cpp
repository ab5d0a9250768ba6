#include "arwmass/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "arwmass/error.hpp"
#include "arwmass/parallel.hpp"

namespace arwmass {

QuadratureAxis gauss_legendre(int m, double lo, double hi) {
  if (m < 1) throw InvalidArgument("quadrature needs at least one node");
  QuadratureAxis ax;
  ax.lo = lo;
  ax.hi = hi;
  ax.nodes.resize(static_cast<std::size_t>(m));
  ax.weights.resize(static_cast<std::size_t>(m));
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  for (int i = 0; i < (m + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = m * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-16) break;
    }
    // one more derivative evaluation at the converged root
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= m; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = m * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    const auto lo_i = static_cast<std::size_t>(i);
    const auto hi_i = static_cast<std::size_t>(m - 1 - i);
    ax.nodes[lo_i] = mid - half * x;
    ax.nodes[hi_i] = mid + half * x;
    ax.weights[lo_i] = ax.weights[hi_i] = half * w;
  }
  return ax;
}

QuadratureGrid QuadratureGrid::sphere(int n, int nodes_per_axis) {
  if (n < 1 || n > 3) throw InvalidArgument("sphere grids support n in [1, 3]");
  QuadratureGrid g;
  g.spherical_ = true;
  g.nodes_per_axis_ = nodes_per_axis;
  for (int k = 0; k < n; ++k) {
    const double hi = (k == n - 1) ? 2.0 * std::numbers::pi : std::numbers::pi;
    g.axes_.push_back(gauss_legendre(nodes_per_axis, 0.0, hi));
  }
  return g;
}

QuadratureGrid QuadratureGrid::box(std::vector<std::pair<double, double>> ranges, int nodes_per_axis) {
  if (ranges.empty() || ranges.size() > 3) throw InvalidArgument("box grids support 1 to 3 axes");
  QuadratureGrid g;
  g.nodes_per_axis_ = nodes_per_axis;
  for (const auto& [lo, hi] : ranges) {
    if (!(hi > lo)) throw InvalidArgument("box axis must have hi > lo");
    g.axes_.push_back(gauss_legendre(nodes_per_axis, lo, hi));
  }
  return g;
}

std::size_t QuadratureGrid::size() const {
  std::size_t s = 1;
  for (const QuadratureAxis& a : axes_) s *= a.nodes.size();
  return s;
}

void QuadratureGrid::node(std::size_t flat, std::span<double> out) const {
  for (int k = dim() - 1; k >= 0; --k) {
    const QuadratureAxis& a = axes_[static_cast<std::size_t>(k)];
    out[static_cast<std::size_t>(k)] = a.nodes[flat % a.nodes.size()];
    flat /= a.nodes.size();
  }
}

double QuadratureGrid::weight(std::size_t flat) const {
  double w = 1.0;
  for (int k = dim() - 1; k >= 0; --k) {
    const QuadratureAxis& a = axes_[static_cast<std::size_t>(k)];
    w *= a.weights[flat % a.nodes.size()];
    flat /= a.nodes.size();
  }
  return w;
}

std::vector<double> QuadratureGrid::reference_point(double x1) const {
  std::vector<double> p(axes_.size());
  p[0] = x1;
  for (std::size_t k = 1; k < axes_.size(); ++k)
    p[k] = spherical_ ? 0.5 * std::numbers::pi : 0.5 * (axes_[k].lo + axes_[k].hi);
  return p;
}

double QuadratureGrid::transverse_factor() const {
  double f = 1.0;
  const int n = dim();
  for (int k = 1; k < n; ++k) {
    const QuadratureAxis& a = axes_[static_cast<std::size_t>(k)];
    if (!spherical_) {
      f *= a.hi - a.lo;
      continue;
    }
    // sqrt det of the round metric carries sin^{n-1-k} of theta_{k+1}
    const int power = n - 1 - k;
    double s = 0.0;
    for (std::size_t j = 0; j < a.nodes.size(); ++j) s += a.weights[j] * std::pow(std::sin(a.nodes[j]), power);
    f *= s;
  }
  return f;
}

double integrate_slice(const QuadratureGrid& grid, const std::function<double(std::span<const double>)>& integrand,
                       const std::function<Mat(std::span<const double>)>& volume_metric) {
  const int n = grid.dim();
  const std::vector<double> terms = parallel_map<double>(grid.size(), [&](std::size_t i) {
    std::array<double, kMaxDim> x{};
    const std::span<double> pt(x.data(), static_cast<std::size_t>(n));
    grid.node(i, pt);
    const double v = integrand(pt);
    if (!std::isfinite(v)) throw NumericalAbort("non-finite integrand at quadrature node " + std::to_string(i));
    const double det = determinant(volume_metric(pt), n);
    return grid.weight(i) * v * std::sqrt(det);
  });
  double sum = 0.0;
  for (double t : terms) sum += t;
  return sum;
}

double integrate_x1(const QuadratureGrid& grid, const std::function<double(std::span<const double>)>& density) {
  const QuadratureAxis& a = grid.axis(0);
  const std::vector<double> terms = parallel_map<double>(a.nodes.size(), [&](std::size_t i) {
    const std::vector<double> p = grid.reference_point(a.nodes[i]);
    const double v = density(p);
    if (!std::isfinite(v)) throw NumericalAbort("non-finite integrand at quadrature node " + std::to_string(i));
    return a.weights[i] * v;
  });
  double sum = 0.0;
  for (double t : terms) sum += t;
  return sum * grid.transverse_factor();
}

double sphere_volume(int n) {
  if (n < 1) throw InvalidArgument("sphere_volume needs n >= 1");
  const double h = 0.5 * (n + 1);
  return 2.0 * std::pow(std::numbers::pi, h) / std::tgamma(h);
}

}  // namespace arwmass
