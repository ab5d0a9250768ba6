#pragma once

// Metrics in Gaussian form  e^{2 psi}( -dt^2 + sigma_ij dx^i dx^j )  and their
// pointwise data: components with exact first and second partials, inverse,
// Christoffel symbols and their first partials.

#include <array>
#include <span>
#include <string>
#include <vector>

#include "arwmass/field.hpp"
#include "arwmass/jet.hpp"
#include "arwmass/tensor.hpp"

namespace arwmass {

class SpacetimeMetric {
 public:
  /// `sigma` is the row-major n x n spatial block; it must be symmetric.
  SpacetimeMetric(int n, ScalarField conformal_factor, std::vector<ScalarField> sigma,
                  std::vector<std::string> labels = {});

  /// -dt^2 + delta_ij dx^i dx^j.
  static SpacetimeMetric flat(int n);

  int spatial_dim() const { return n_; }
  int dim() const { return n_ + 1; }
  const ScalarField& conformal_factor() const { return psi_; }
  const ScalarField& sigma(int i, int j) const { return sigma_[static_cast<std::size_t>(i * n_ + j)]; }
  const std::vector<std::string>& labels() const { return labels_; }

  /// Same sigma block, conformal factor removed.
  SpacetimeMetric conformal() const;

  /// True when no component depends on x2, ..., xn.
  bool depends_only_on_t_and_x1() const;

  /// Component jets g_ab at an event (dim = n + 1).
  std::array<std::array<Jet, kMaxDim>, kMaxDim> component_jets(std::span<const double> event) const;

 private:
  int n_;
  ScalarField psi_;
  std::vector<ScalarField> sigma_;
  std::vector<std::string> labels_;
};

struct MetricSample {
  int dim = 0;
  Mat g{};
  Mat g_inv{};
  double det = 0.0;
  Rank3 dg{};   // dg[c][a][b] = d_c g_ab
  Rank4 ddg{};  // ddg[c][d][a][b] = d_c d_d g_ab
};

struct Connection {
  int dim = 0;
  Rank3 gamma{};   // gamma[a][b][c] = Gamma^a_bc
  Rank4 dgamma{};  // dgamma[e][a][b][c] = d_e Gamma^a_bc
};

/// Builds a sample from component jets; throws NumericalAbort when
/// |det g| < 1e-14. `where` names the point in the error message.
MetricSample sample_from_jets(int dim, const std::array<std::array<Jet, kMaxDim>, kMaxDim>& g,
                              const std::string& where);

MetricSample metric_at(const SpacetimeMetric& metric, std::span<const double> event);

/// Christoffel symbols and their first partials (needs second partials of g).
Connection connection_from(const MetricSample& s);

Rank3 christoffel_at(const SpacetimeMetric& metric, std::span<const double> event);

/// Round unit S^n metric in spherical coordinates at angles (theta1..thetan).
Mat round_sphere_metric(int n, std::span<const double> angles);

std::string format_event(std::span<const double> event);

}  // namespace arwmass
