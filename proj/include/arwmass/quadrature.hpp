#pragma once

// Tensor-product Gauss-Legendre grids on the spherical chart of S^n
// (theta1..theta_{n-1} in (0, pi), theta_n in (0, 2 pi)) or on coordinate boxes.

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "arwmass/tensor.hpp"

namespace arwmass {

struct QuadratureAxis {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// m-point Gauss-Legendre rule mapped to [lo, hi].
QuadratureAxis gauss_legendre(int m, double lo, double hi);

class QuadratureGrid {
 public:
  static QuadratureGrid sphere(int n, int nodes_per_axis);
  static QuadratureGrid box(std::vector<std::pair<double, double>> ranges, int nodes_per_axis);

  int dim() const { return static_cast<int>(axes_.size()); }
  bool spherical() const { return spherical_; }
  int nodes_per_axis() const { return nodes_per_axis_; }
  std::size_t size() const;
  const QuadratureAxis& axis(int k) const { return axes_[static_cast<std::size_t>(k)]; }

  /// Coordinates and tensor weight of a node in row-major (x1 slowest) order.
  void node(std::size_t flat, std::span<double> out) const;
  double weight(std::size_t flat) const;

  /// Point with first coordinate x1 and fixed transverse coordinates
  /// (pi/2 on spheres, axis midpoints on boxes), used for integrands that
  /// depend on x1 only.
  std::vector<double> reference_point(double x1) const;

  /// Quadrature of sqrt(det)(x)/sqrt(det)(reference) over x2..xn for the round
  /// metric, or the transverse box volume.
  double transverse_factor() const;

 private:
  std::vector<QuadratureAxis> axes_;
  bool spherical_ = false;
  int nodes_per_axis_ = 0;
};

/// Sum of weight * integrand * sqrt(det volume_metric) over all nodes.
/// Throws NumericalAbort naming the node when the integrand is not finite.
double integrate_slice(const QuadratureGrid& grid, const std::function<double(std::span<const double>)>& integrand,
                       const std::function<Mat(std::span<const double>)>& volume_metric);

/// Integral of a density that depends on x1 only; `density(point)` receives
/// reference_point(x1) and must already include the volume element there.
double integrate_x1(const QuadratureGrid& grid, const std::function<double(std::span<const double>)>& density);

/// |S^n| = 2 pi^{(n+1)/2} / Gamma((n+1)/2).
double sphere_volume(int n);

}  // namespace arwmass
