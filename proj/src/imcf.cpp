#include "arwmass/imcf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "arwmass/error.hpp"
#include "arwmass/hypersurface.hpp"
#include "arwmass/parallel.hpp"

namespace arwmass {

namespace {

bool time_only(const expr::Expression& e) {
  for (const std::string& v : canonical_coordinates(e).free_variables())
    if (v != "t") return false;
  return true;
}

std::vector<double> equator(int n) { return std::vector<double>(static_cast<std::size_t>(n), 0.5 * std::numbers::pi); }

struct Flow {
  const ARWSpec& spec;
  SpacetimeMetric metric;
  ScalarField conformal;
  std::vector<double> node;

  double mean_curvature(double u) const {
    const int n = spec.n;
    const Mat h = coordinate_slice_curvature(metric, u, node);
    std::vector<double> ev{u};
    ev.insert(ev.end(), node.begin(), node.end());
    const MetricSample s = metric_at(metric, ev);
    Mat block{};
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) block[i][j] = s.g[i + 1][j + 1];
    Mat inv{};
    if (!invert(block, n, inv)) throw NumericalAbort("degenerate slice metric at u = " + std::to_string(u));
    double H = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) H += inv[i][j] * h[i][j];
    return H;
  }

  // du/dt; NaN outside the time domain so the stepper can back off.
  double rate(double u, double* H_out = nullptr) const {
    if (!(u < 0.0)) return std::numeric_limits<double>::quiet_NaN();
    const double H = mean_curvature(u);
    if (H_out) *H_out = H;
    if (!(H > 0.0)) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "mean curvature is not positive along the flow: u = %.17g, H = %.17g", u, H);
      throw NumericalAbort(buf);
    }
    std::vector<double> ev{u};
    ev.insert(ev.end(), node.begin(), node.end());
    return std::exp(-conformal.value(ev)) / H;
  }

  FlowState state(double t, double u) const {
    FlowState s;
    s.t = t;
    s.u = u;
    const double du = rate(u, &s.H);
    const auto f = spec.f.derivatives(u);
    s.f_of_u = f[0];
    s.dfdt = f[1] * du;
    return s;
  }
};

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;

struct StepResult {
  double u = 0.0;
  double err = 0.0;  // estimated local error
  double k7 = 0.0;   // rate at the new point (first stage of the next step)
  bool ok = false;
};

// The autonomous ODE needs no stage times.
StepResult dopri_step(const Flow& flow, double u, double k1, double h) {
  StepResult r;
  const double k2 = flow.rate(u + h * a21 * k1);
  const double k3 = flow.rate(u + h * (a31 * k1 + a32 * k2));
  const double k4 = flow.rate(u + h * (a41 * k1 + a42 * k2 + a43 * k3));
  const double k5 = flow.rate(u + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
  const double k6 = flow.rate(u + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
  r.u = u + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
  r.k7 = flow.rate(r.u);
  r.err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * r.k7);
  r.ok = std::isfinite(r.u) && std::isfinite(r.k7) && std::isfinite(r.err);
  return r;
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace

double slice_mean_curvature(const ARWSpec& spec, double u) {
  const Flow flow{spec, spec.metric(), spec.conformal_factor(), equator(spec.n)};
  return flow.mean_curvature(u);
}

Trajectory imcf_run(const ARWSpec& spec, double u0, double t_end, const ImcfOptions& options) {
  spec.check();
  if (!(u0 > spec.a && u0 < 0.0)) throw InvalidArgument("initial leaf u0 must lie in (a, 0)");
  if (!(t_end > 0.0)) throw InvalidArgument("flow end time must be positive");
  if (!time_only(spec.psi) || !time_only(spec.lambda))
    throw InvalidArgument("the symmetric flow needs psi and lambda depending on t only");
  if (!(options.tolerance > 0.0)) throw InvalidArgument("flow tolerance must be positive");

  const Flow flow{spec, spec.metric(), spec.conformal_factor(), equator(spec.n)};
  Trajectory tr;
  tr.states.push_back(flow.state(0.0, u0));

  double t = 0.0;
  double u = u0;
  double k1 = flow.rate(u);
  const bool fixed = options.fixed_step > 0.0;
  double h = fixed ? options.fixed_step : options.initial_step;
  double err_prev = 1.0;
  constexpr double kSafety = 0.9;
  constexpr double kAlpha = 0.17;
  constexpr double kBeta = 0.04;

  while (t < t_end) {
    if (tr.accepted + tr.rejected >= options.max_steps) throw NumericalAbort("flow exceeded the step limit");
    const double step = std::min(h, t_end - t);
    const StepResult r = dopri_step(flow, u, k1, step);
    if (fixed) {
      if (!r.ok) throw NumericalAbort("fixed-step flow left the time domain");
    } else {
      if (!r.ok) {
        ++tr.rejected;
        h = 0.25 * step;
        continue;
      }
      const double scale = options.abs_tolerance + options.tolerance * std::max(std::fabs(u), std::fabs(r.u));
      const double err = std::max(std::fabs(r.err) / scale, 1e-10);
      if (err > 1.0) {
        ++tr.rejected;
        h = step * std::max(0.2, kSafety * std::pow(err, -kAlpha));
        continue;
      }
      h = step * std::clamp(kSafety * std::pow(err, -kAlpha) * std::pow(err_prev, kBeta), 0.2, 10.0);
      err_prev = err;
    }
    ++tr.accepted;
    t = (t_end - t <= step) ? t_end : t + step;
    u = r.u;
    k1 = r.k7;
    tr.states.push_back(flow.state(t, u));
    if (std::fabs(u) < options.halt_u) {
      tr.reached_singularity = true;
      break;
    }
  }
  return tr;
}

FlowDiagnostics flow_diagnostics(const Trajectory& trajectory) {
  const auto& s = trajectory.states;
  if (s.size() < 6) throw InvalidArgument("trajectory too short");
  if (std::fabs(s.back().u) > 1e-2 * std::fabs(s.front().u))
    throw InvalidArgument("trajectory too short: |u| decays by less than two decades");
  const double t_cut = s.front().t + (2.0 / 3.0) * (s.back().t - s.front().t);
  std::vector<double> t, f, lu;
  for (const FlowState& st : s) {
    if (st.t < t_cut) continue;
    t.push_back(st.t);
    f.push_back(st.f_of_u);
    lu.push_back(std::log(std::fabs(st.u)));
  }
  if (t.size() < 3) throw InvalidArgument("trajectory too short: fewer than three states in the final third");
  return {least_squares_slope(t, f), least_squares_slope(t, lu)};
}

FlowMass mass_along_flow(const ARWSpec& spec, const Trajectory& trajectory, const QuadratureGrid& grid,
                         std::size_t stride) {
  if (stride == 0) throw InvalidArgument("stride must be positive");
  std::vector<std::size_t> picks;
  const std::size_t count = trajectory.states.size();
  for (std::size_t i = 0; i < count; i += stride) picks.push_back(i);
  if (count > 0 && picks.back() != count - 1) picks.push_back(count - 1);

  const WeightedSpacetime w = WeightedSpacetime::from_spec(spec);
  const double n = spec.n;
  FlowMass out;
  out.times.resize(picks.size());
  out.integrals.resize(picks.size());
  out.lemma.resize(picks.size());
  out.h2_form.resize(picks.size());
  parallel_for(picks.size(), [&](std::size_t k) {
    const FlowState& st = trajectory.states[picks[k]];
    const GraphHypersurface leaf(w.metric, st.u);
    out.times[k] = st.t;
    out.integrals[k] = graph_mass_integral(w, leaf, grid);
    out.lemma[k] = weighted_graph_integral(
        w, leaf, grid, [&](const ExtrinsicData& e) { return e.intrinsic_scalar - (e.norm_A2 - e.H * e.H / n); }, true);
    out.h2_form[k] =
        (n - 1.0) / (2.0 * n) * weighted_graph_integral(w, leaf, grid, [](const ExtrinsicData& e) { return e.H * e.H; }, true);
  });
  return out;
}

}  // namespace arwmass
