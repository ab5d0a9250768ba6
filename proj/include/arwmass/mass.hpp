#pragma once

// The mass functional  I(M) = int_M G(nu, nu) e^{omega f} e^{psi} dA  and the
// tools around it: singular limit, slab balance, monotonicity and TCC scans,
// normalization and time reparametrization.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "arwmass/arw.hpp"
#include "arwmass/hypersurface.hpp"
#include "arwmass/quadrature.hpp"

namespace arwmass {

/// A metric with the log of the mass weight (omega f + psi for ARW specs).
struct WeightedSpacetime {
  SpacetimeMetric metric;
  ScalarField log_weight;
  /// sigma = c e^{2 lambda(t, theta1)} round; lets integrals over spherical
  /// grids reduce to theta1.
  bool rotational = false;

  static WeightedSpacetime from_spec(const ARWSpec& spec);
  static WeightedSpacetime unweighted(SpacetimeMetric metric);
};

/// G_ab nu^a nu^b.
double einstein_normal(const CurvatureBundle& c, const Vec& nu);

/// Integrand of the mass functional at a graph node (without area element).
double mass_integrand(const WeightedSpacetime& w, const ExtrinsicData& e);

double slice_mass_integral(const WeightedSpacetime& w, double tau, const QuadratureGrid& grid);
double slice_mass_integral(const ARWSpec& spec, double tau, const QuadratureGrid& grid);

struct QuadratureValue {
  double value = 0.0;
  /// |I(grid) - I(grid with half the nodes per axis)|.
  double error = 0.0;
};
QuadratureValue slice_mass_estimate(const ARWSpec& spec, double tau, int nodes_per_axis);

/// Throws NumericalAbort when the graph is not spacelike at a node.
double graph_mass_integral(const WeightedSpacetime& w, const GraphHypersurface& surface, const QuadratureGrid& grid);
double graph_mass_integral(const ARWSpec& spec, const GraphHypersurface& surface, const QuadratureGrid& grid);

/// int_M F(e) e^{w} dA for a density F of the extrinsic data; with
/// `second` the data include h, H and |A|^2.
double weighted_graph_integral(const WeightedSpacetime& w, const GraphHypersurface& surface, const QuadratureGrid& grid,
                               const std::function<double(const ExtrinsicData&)>& density, bool second = false);

/// m-hat = 2 I / (n (n - 1) |S^n|).
double mass_from_integral(int n, double integral);

struct MassReport {
  std::vector<double> times;
  std::vector<double> integrals;
  double limit = 0.0;
  double m_hat = 0.0;
  double error = 0.0;    // last Aitken correction, in units of I
  bool monotone = false;  // I(t_k) nondecreasing in k up to roundoff
};
/// Throws InvalidArgument for fewer than three times.
MassReport mass_limit(const ARWSpec& spec, const QuadratureGrid& grid, std::span<const double> times);

struct SlabBalance {
  double t1 = 0.0;
  double t2 = 0.0;
  double B1 = 0.0;  // int_{M_t1} G(nu, eta) weight, eta future directed, nu = eta
  double B2 = 0.0;
  double V = 0.0;   // volume term
  double residual = 0.0;  // |B2 - B1 - V|
  double relative = 0.0;  // residual / max(|B1|, |B2|, |V|, 1)
};
/// Gauss-Legendre in time with `time_nodes` nodes; spatial integrals on `grid`.
SlabBalance slab_balance(const ARWSpec& spec, double t1, double t2, const QuadratureGrid& grid, int time_nodes = 32);
SlabBalance slab_balance(const WeightedSpacetime& w, double t1, double t2, const QuadratureGrid& grid,
                         int time_nodes = 32);

enum class Trend { Constant, Increasing, Decreasing, Mixed };
std::string to_string(Trend t);

struct MonotonicityReport {
  std::vector<double> times;
  std::vector<double> integrals;
  std::vector<double> f_prime;
  std::vector<double> g00_min;         // min over nodes of G^{00}
  std::vector<double> gij_min_eig;     // min eigenvalue of G^{ij} in an orthonormal frame
  std::vector<double> convexity_min;   // min eigenvalue of h_ij relative to g_ij
  bool f_prime_negative = false;
  bool g00_nonnegative = false;
  bool gij_psd = false;
  bool convex = false;
  Trend trend = Trend::Mixed;
  bool strictly_increasing = false;  // every step up by more than roundoff
};
MonotonicityReport monotonicity_scan(const ARWSpec& spec, std::span<const double> times, const QuadratureGrid& grid);

struct TccViolation {
  std::vector<double> event;
  Vec direction{};  // unit timelike, coordinate components
  double value = 0.0;
};
struct TccReport {
  double minimum = 0.0;
  std::size_t samples = 0;
  std::vector<TccViolation> violations;
};
/// Samples Ric(nu, nu) over `directions` boosted unit timelike vectors per
/// event: nu = cosh(chi) e0 + sinh(chi) e(n-hat) in an orthonormal frame,
/// chi uniform in [0, max_rapidity]. Values below -tolerance (1 + the size of
/// the terms) are violations.
TccReport tcc_check(const SpacetimeMetric& metric, std::span<const std::vector<double>> events, int directions,
                    std::uint64_t seed, double max_rapidity = 3.0, double tolerance = 1e-9);

/// Random events with t uniform in [lo, hi] and angles uniform in (0.1, pi - 0.1).
std::vector<std::vector<double>> sample_events(int n, std::size_t count, double lo, double hi, std::uint64_t seed);

/// int sqrt(det sigma-bar) with sigma-bar = c e^{2 lambda(0, theta1)} round.
double slice_carrier_volume(const ARWSpec& spec, int nodes_per_axis = 48);

/// Rescaled presentation with int sqrt(det sigma-bar) = |S^n|; returns the
/// spec and the factor lam = (|S^n| / Vol)^{2/n} applied to sigma-bar.
std::pair<ARWSpec, double> normalize(const ARWSpec& spec, int nodes_per_axis = 48);

/// Presentation in the time s with t = phi(s) = s + eps s^2:
/// f -> f o phi + log phi', psi -> psi o phi, lambda -> lambda o phi - log phi'.
/// Throws InvalidArgument when phi is not increasing on the domain.
ARWSpec reparametrize_time(const ARWSpec& spec, double eps);

}  // namespace arwmass
