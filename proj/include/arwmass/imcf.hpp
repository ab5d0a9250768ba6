#pragma once

// Inverse mean curvature flow x' = -H^{-1} nu for leaves {t = u} of a
// presentation whose slices are umbilic and homogeneous (psi and lambda
// depend on t only). The flow reduces to du/dt = e^{-psi~(u)} / H(u).

#include <vector>

#include "arwmass/arw.hpp"
#include "arwmass/mass.hpp"

namespace arwmass {

struct FlowState {
  double t = 0.0;
  double u = 0.0;
  double H = 0.0;
  double f_of_u = 0.0;
  double dfdt = 0.0;  // f'(u) du/dt
};

struct ImcfOptions {
  double tolerance = 1e-10;       // relative local error per step
  double abs_tolerance = 1e-22;   // absolute floor, below the halting |u|
  double halt_u = 1e-12;          // stop when |u| drops below
  double fixed_step = 0.0;        // > 0 selects fixed steps of this size
  double initial_step = 1e-3;
  long max_steps = 1000000;
};

struct Trajectory {
  std::vector<FlowState> states;  // every accepted step, starting at t = 0
  bool reached_singularity = false;
  long accepted = 0;
  long rejected = 0;
};

/// Dormand-Prince 5(4) with PI step control (or fixed steps). Throws
/// InvalidArgument when u0 is outside (a, 0) or psi / lambda depend on an
/// angle, NumericalAbort when H <= 0 is met.
Trajectory imcf_run(const ARWSpec& spec, double u0, double t_end, const ImcfOptions& options = {});

/// Mean curvature of the slice {t = u}.
double slice_mean_curvature(const ARWSpec& spec, double u);

struct FlowDiagnostics {
  double slope = 0.0;       // least squares d f(u) / dt over the final third
  double decay_rate = 0.0;  // least squares d log|u| / dt over the final third
};
/// Throws InvalidArgument when |u| decays by less than two decades.
FlowDiagnostics flow_diagnostics(const Trajectory& trajectory);

struct FlowMass {
  std::vector<double> times;
  std::vector<double> integrals;  // I(M(t))
  std::vector<double> lemma;      // int (R - [|A|^2 - H^2 / n]) e^{omega f} e^{psi}
  std::vector<double> h2_form;    // (n - 1) / (2n) int H^2 e^{omega f} e^{psi}
};
/// Leaf integrals at every `stride`-th state (and the last one).
FlowMass mass_along_flow(const ARWSpec& spec, const Trajectory& trajectory, const QuadratureGrid& grid,
                         std::size_t stride = 1);

}  // namespace arwmass
