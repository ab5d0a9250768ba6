#include "scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "arwmass/curvature.hpp"
#include "arwmass/imcf.hpp"
#include "arwmass/mass.hpp"
#include "arwmass/sads.hpp"

namespace arwmass::cli {

using nlohmann::json;

namespace {

// Field access with dotted paths in error messages.
struct Section {
  const json& node;
  std::string path;

  bool has(const char* key) const { return node.is_object() && node.contains(key); }

  const json& at(const char* key) const {
    if (!has(key)) throw ConfigError("missing field '" + join(key) + "'");
    return node.at(key);
  }

  std::string join(const char* key) const { return path.empty() ? key : path + "." + key; }

  double number(const char* key) const {
    const json& v = at(key);
    if (!v.is_number()) throw ConfigError("field '" + join(key) + "' must be a number");
    return v.get<double>();
  }
  double number(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }

  long integer(const char* key) const {
    const json& v = at(key);
    if (!v.is_number_integer()) throw ConfigError("field '" + join(key) + "' must be an integer");
    return v.get<long>();
  }
  long integer(const char* key, long fallback) const { return has(key) ? integer(key) : fallback; }

  std::string text(const char* key) const {
    const json& v = at(key);
    if (!v.is_string()) throw ConfigError("field '" + join(key) + "' must be a string");
    return v.get<std::string>();
  }
  std::string text(const char* key, const std::string& fallback) const { return has(key) ? text(key) : fallback; }

  bool flag(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = node.at(key);
    if (!v.is_boolean()) throw ConfigError("field '" + join(key) + "' must be true or false");
    return v.get<bool>();
  }

  Section sub(const char* key) const {
    static const json empty = json::object();
    if (!has(key)) return {empty, join(key)};
    const json& v = node.at(key);
    if (!v.is_object()) throw ConfigError("field '" + join(key) + "' must be an object");
    return {v, join(key)};
  }
};

int positive_int(const Section& s, const char* key, long fallback, long lo = 1, long hi = 1 << 20) {
  const long v = s.integer(key, fallback);
  if (v < lo || v > hi)
    throw ConfigError("field '" + s.join(key) + "' must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<int>(v);
}

expr::Expression expression_field(const Section& s, const char* key, const char* fallback,
                                  const expr::Bindings& params) {
  const std::string src = s.has(key) ? s.text(key) : std::string(fallback);
  try {
    return expr::bind(expr::parse(src), params);
  } catch (const expr::ParseError& e) {
    throw ConfigError("field '" + s.join(key) + "': " + e.what());
  }
}

struct Scenario {
  std::string command;
  ARWSpec spec;
  std::optional<SAdSParams> sads;
  int nodes = 12;
  std::vector<double> schedule;
  std::uint64_t seed = 0;
  Section root;
};

ARWSpec build_spec(const Section& st, std::optional<SAdSParams>& sads) {
  const std::string kind = st.text("kind");
  if (kind == "sads") {
    SAdSParams p;
    p.n = positive_int(st, "n", 3, 2, 3);
    p.Lambda = st.number("Lambda", 0.0);
    p.m = st.number("m", 1.0);
    try {
      p.check();
    } catch (const InvalidArgument& e) {
      throw ConfigError(st.path + ": " + e.what());
    }
    sads = p;
    return as_arw_spec(p);
  }
  if (kind == "rw-family") {
    return rw_family(positive_int(st, "n", 3, 2, 3), st.number("omega", 1.0), st.number("k", 1.0), st.number("a", -1.0));
  }
  if (kind == "custom") {
    expr::Bindings params;
    const Section ps = st.sub("parameters");
    for (const auto& [name, value] : ps.node.items()) {
      if (!value.is_number()) throw ConfigError("field '" + ps.join(name.c_str()) + "' must be a number");
      params[name] = value.get<double>();
    }
    ARWSpec s;
    s.n = positive_int(st, "n", 3, 2, 3);
    s.omega = st.number("omega");
    if (!st.has("f")) throw ConfigError("missing field '" + st.join("f") + "'");
    s.f = TimeFunction::from_expression(expression_field(st, "f", "", params));
    s.psi = expression_field(st, "psi", "0", params);
    s.lambda = expression_field(st, "lambda", "0", params);
    s.a = st.number("a", -1.0);
    s.sigma_scale = st.number("sigma_scale", 1.0);
    s.label = "custom";
    try {
      s.check();
    } catch (const InvalidArgument& e) {
      throw ConfigError(st.path + ": " + e.what());
    }
    return s;
  }
  throw ConfigError("unknown spacetime kind '" + kind + "' (expected sads, rw-family or custom)");
}

Scenario parse_scenario(const json& config) {
  if (!config.is_object()) throw ConfigError("config must be a JSON object");
  Scenario sc{.root = Section{config, ""}};
  const Section& root = sc.root;
  sc.command = root.text("command");
  if (sc.command != "validate" && sc.command != "mass" && sc.command != "imcf" && sc.command != "check" &&
      sc.command != "sads-demo")
    throw ConfigError("unknown command '" + sc.command + "' (expected validate, mass, imcf, check or sads-demo)");
  sc.spec = build_spec(root.sub("spacetime"), sc.sads);
  if (root.sub("spacetime").flag("normalize", false)) sc.spec = normalize(sc.spec).first;
  sc.nodes = positive_int(root.sub("grid"), "nodes_per_axis", 12, 2, 256);
  const Section sch = root.sub("schedule");
  const double a = sch.number("a", sc.spec.a);
  if (!(a < 0.0) || a < sc.spec.a) throw ConfigError("field 'schedule.a' must lie in [a, 0) of the spacetime");
  sc.schedule = geometric_schedule(a, positive_int(sch, "K", 10, 2, 60));
  const long seed = root.integer("seed", 0);
  if (seed < 0) throw ConfigError("field 'seed' must be nonnegative");
  sc.seed = static_cast<std::uint64_t>(seed);
  if (sc.command == "sads-demo" && !sc.sads) throw ConfigError("sads-demo needs spacetime.kind = sads");
  return sc;
}

std::string yes_no(bool b) { return b ? "pass" : "fail"; }

QuadratureGrid grid_of(const Scenario& sc) { return QuadratureGrid::sphere(sc.spec.n, sc.nodes); }

Table run_validate(const Scenario& sc, int& code) {
  const ValidationReport r = arw_validate(sc.spec, sc.schedule);
  Table t;
  t.columns = {"t", "f_prime", "mass_sequence", "cauchy_increment", "curvature_sequence", "ratio2", "ratio3"};
  for (std::size_t k = 0; k < r.times.size(); ++k)
    t.rows.push_back({r.times[k], r.f_prime[k], r.mass_sequence[k],
                      k == 0 ? Cell(std::string()) : Cell(r.cauchy_increments[k - 1]), r.curvature_sequence[k],
                      r.ratio2[k], r.ratio3[k]});
  t.summary = {{"dimension n + omega - 2 > 0", yes_no(r.dimension_ok)},
               {"(i) f' < 0", yes_no(r.f_prime_negative)},
               {"(ii) mass limit", format_number(r.mass_limit)},
               {"(ii) mass error", format_number(r.mass_error)},
               {"(ii) positive limit", yes_no(r.mass_ok)},
               {"(iii) curvature growth per decade", format_number(r.curvature_growth)},
               {"(iii) bounded", yes_no(!r.curvature_divergent)},
               {"(iv) sup ratio2", format_number(r.sup_ratio2)},
               {"(iv) sup ratio3", format_number(r.sup_ratio3)},
               {"(iv) bounded", yes_no(r.derivative_bounds_ok)},
               {"passed", yes_no(r.passed())}};
  if (!r.passed()) code = kValidationFailure;
  return t;
}

Table run_mass(const Scenario& sc) {
  const QuadratureGrid grid = grid_of(sc);
  const MassReport m = mass_limit(sc.spec, grid, sc.schedule);
  const MonotonicityReport mono = monotonicity_scan(sc.spec, sc.schedule, grid);
  const Section ts = sc.root.sub("tcc");
  const Section tol = sc.root.sub("tolerances");
  const auto events = sample_events(sc.spec.n, static_cast<std::size_t>(positive_int(ts, "events", 100)),
                                    sc.schedule.front(), sc.schedule.back(), sc.seed);
  const TccReport tcc = tcc_check(sc.spec.metric(), events, positive_int(ts, "directions", 32), sc.seed + 1,
                                  ts.number("max_rapidity", 3.0), tol.number("tcc", 1e-9));
  Table t;
  t.columns = {"row", "t", "integral", "m_hat", "f_prime", "g00_min", "gij_min_eig", "convexity_min"};
  for (std::size_t k = 0; k < m.times.size(); ++k)
    t.rows.push_back({std::string("sample"), m.times[k], m.integrals[k], mass_from_integral(sc.spec.n, m.integrals[k]),
                      mono.f_prime[k], mono.g00_min[k], mono.gij_min_eig[k], mono.convexity_min[k]});
  const std::string none;
  t.rows.push_back({std::string("limit"), 0.0, m.limit, m.m_hat, none, none, none, none});
  t.summary = {{"m_hat", format_number(m.m_hat)},
               {"extrapolation error", format_number(m.error)},
               {"monotone", m.monotone ? "yes" : "no"},
               {"trend", to_string(mono.trend)},
               {"G^00 >= 0", yes_no(mono.g00_nonnegative)},
               {"G^ij >= 0", yes_no(mono.gij_psd)},
               {"convex slices", yes_no(mono.convex)},
               {"tcc samples", std::to_string(tcc.samples)},
               {"tcc minimum", format_number(tcc.minimum)},
               {"tcc violations", std::to_string(tcc.violations.size())}};
  return t;
}

Table run_imcf(const Scenario& sc) {
  const Section is = sc.root.sub("imcf");
  ImcfOptions o;
  o.tolerance = sc.root.sub("tolerances").number("ode", 1e-10);
  const double u0 = is.number("u0", 0.5 * sc.spec.a);
  const double t_end = is.number("t_end", 20.0);
  const Trajectory tr = imcf_run(sc.spec, u0, t_end, o);
  const auto stride = static_cast<std::size_t>(positive_int(is, "stride", 1));
  const FlowMass fm = mass_along_flow(sc.spec, tr, grid_of(sc), stride);
  Table t;
  t.columns = {"t", "u", "H", "f_of_u", "dfdt", "integral", "lemma", "h2_form"};
  std::size_t j = 0;
  for (std::size_t k = 0; k < tr.states.size(); ++k) {
    if (j >= fm.times.size() || fm.times[j] != tr.states[k].t) continue;
    const FlowState& s = tr.states[k];
    t.rows.push_back({s.t, s.u, s.H, s.f_of_u, s.dfdt, fm.integrals[j], fm.lemma[j], fm.h2_form[j]});
    ++j;
  }
  t.summary = {{"accepted steps", std::to_string(tr.accepted)},
               {"rejected steps", std::to_string(tr.rejected)},
               {"reached singularity", tr.reached_singularity ? "yes" : "no"}};
  try {
    const FlowDiagnostics d = flow_diagnostics(tr);
    t.summary.emplace_back("slope", format_number(d.slope));
    t.summary.emplace_back("decay rate", format_number(d.decay_rate));
  } catch (const InvalidArgument& e) {
    t.summary.emplace_back("diagnostics", e.what());
  }
  return t;
}

Table run_check(const Scenario& sc, int& code) {
  const Section cs = sc.root.sub("check");
  const Section tol = sc.root.sub("tolerances");
  const double tol_conf = tol.number("conformal", 1e-8);
  const double tol_gauss = tol.number("gauss", 1e-7);
  const double tol_slab = tol.number("slab", 1e-6);
  const double tol_div = tol.number("divergence", 1e-6);
  const double step = cs.number("divergence_step", 1e-5);  // relative to |t|
  const int n = sc.spec.n;
  const SpacetimeMetric metric = sc.spec.metric();
  const double lo = sc.schedule.front();
  const double hi = sc.schedule[sc.schedule.size() / 2];
  const auto events = sample_events(n, static_cast<std::size_t>(positive_int(cs, "events", 20)), lo, hi, sc.seed);

  Table t;
  t.columns = {"quantity", "t"};
  for (int i = 1; i <= n; ++i) t.columns.push_back("x" + std::to_string(i));
  t.columns.insert(t.columns.end(), {"value", "tolerance", "status"});
  bool ok = true;
  auto add = [&](const std::string& q, std::span<const double> ev, double value, double limit) {
    std::vector<Cell> row{q};
    for (double x : ev) row.emplace_back(x);
    for (std::size_t k = ev.size(); k < static_cast<std::size_t>(n + 1); ++k) row.emplace_back(std::string());
    const bool pass = value <= limit;
    ok = ok && pass;
    row.insert(row.end(), {value, limit, yes_no(pass)});
    t.rows.push_back(std::move(row));
  };

  for (const auto& ev : events) {
    const ConformalResiduals c = conformal_residuals(sc.spec, ev);
    add("conformal_ricci", ev, c.ricci, tol_conf);
    add("conformal_scalar", ev, c.scalar, tol_conf);
    const double tau = ev[0];
    const std::vector<double> node(ev.begin() + 1, ev.end());
    const GraphHypersurface g(metric, expr::parse(format_number(tau) + " + " + format_number(0.05 * tau) + "*cos(theta1)"));
    const GaussCodazziResiduals r = gauss_codazzi_residuals(g, node);
    const ExtrinsicData e = graph_geometry(g, node);
    add("gauss_trace", e.event, r.gauss_trace / std::fmax(1.0, r.trace_scale), tol_gauss);
    add("gauss_full", e.event, r.gauss_full / std::fmax(1.0, r.full_scale), tol_gauss * 10.0);
    add("codazzi", e.event, r.codazzi / std::fmax(1.0, r.codazzi_scale), tol_gauss * 10.0);
    const Mat mixed = einstein_mixed(curvature_at(metric, ev));
    add("einstein_divergence", ev, einstein_divergence_residual(metric, ev, step * std::fabs(ev[0])) / (1.0 + max_abs(mixed, n + 1)),
        tol_div);
  }
  const QuadratureGrid grid = grid_of(sc);
  const std::size_t m = sc.schedule.size();
  for (const auto& [i, j] : {std::pair<std::size_t, std::size_t>{0, 1}, {1, 2}, {2, m / 2}}) {
    if (!(j > i && j < m)) continue;
    const SlabBalance s = slab_balance(sc.spec, sc.schedule[i], sc.schedule[j], grid);
    const std::vector<double> ev{s.t1};
    add("slab_balance", ev, s.relative, tol_slab);
  }
  t.summary = {{"all within tolerance", yes_no(ok)}};
  if (!ok) code = kValidationFailure;
  return t;
}

Table run_sads_demo(const Scenario& sc) {
  const SAdSParams p = *sc.sads;
  const QuadratureGrid grid = grid_of(sc);
  const MassReport m = mass_limit(sc.spec, grid, sc.schedule);
  const WeightedSpacetime w = WeightedSpacetime::from_spec(sc.spec);
  const int n = p.n;
  std::vector<double> node(static_cast<std::size_t>(n), 0.5 * std::numbers::pi);
  Table t;
  t.columns = {"row", "r", "x0", "f", "f_prime", "h_tilde", "G_nu_nu_e2f", "G_oracle", "integral", "oracle_integral",
               "relative_error", "m_hat"};
  for (std::size_t k = 0; k < m.times.size(); ++k) {
    const double x0 = m.times[k];
    const double r = r_of_x0(p, x0);
    const auto f = sads_f_derivatives(p, r);
    const SAdSProfile pr = profile(p, r);
    std::vector<double> ev{x0};
    ev.insert(ev.end(), node.begin(), node.end());
    const CurvatureBundle c = curvature_at(w.metric, ev);
    Vec nu{};
    nu[0] = 1.0 / std::sqrt(-c.metric.g[0][0]);
    const double g_nn = einstein_normal(c, nu) * std::exp(2.0 * f[0]);
    const double oracle = oracle_mass_integral(p, r);
    t.rows.push_back({std::string("sample"), r, x0, f[0], f[1], pr.h_tilde, g_nn, 0.5 * n * (n - 1.0) * (pr.h_tilde + 1.0),
                      m.integrals[k], oracle, std::fabs(m.integrals[k] - oracle) / std::fabs(oracle),
                      mass_from_integral(n, m.integrals[k])});
  }
  const double limit_oracle = 0.5 * n * (n - 1.0) * sphere_volume(n) * p.m;
  const std::string none;
  t.rows.push_back({std::string("limit"), 0.0, 0.0, none, none, none, none, none, m.limit, limit_oracle,
                    std::fabs(m.limit - limit_oracle) / limit_oracle, m.m_hat});
  t.summary = {{"m_hat", format_number(m.m_hat)},
               {"mass parameter", format_number(p.m)},
               {"horizon", format_number(horizon(p))},
               {"monotone", m.monotone ? "yes" : "no"},
               {"extrapolation error", format_number(m.error)}};
  return t;
}

void write_output(const Table& table, const std::filesystem::path& file, const std::string& format,
                  const std::string& digest, const std::string& command) {
  std::filesystem::create_directories(file.parent_path().empty() ? std::filesystem::path(".") : file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + file.string());
  if (format == "json")
    write_json(out, table, digest, command);
  else
    write_csv(out, table, digest);
}

}  // namespace

std::string config_digest(const json& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_csv(std::ostream& out, const Table& table, const std::string& digest) {
  out << "# config digest " << digest << '\n';
  for (const auto& [key, value] : table.summary) out << "# " << key << ": " << value << '\n';
  for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      if (const double* d = std::get_if<double>(&row[i]))
        out << format_number(*d);
      else
        out << std::get<std::string>(row[i]);
    }
    out << '\n';
  }
}

void write_json(std::ostream& out, const Table& table, const std::string& digest, const std::string& command) {
  json doc;
  doc["command"] = command;
  doc["config_digest"] = digest;
  doc["columns"] = table.columns;
  json rows = json::array();
  for (const auto& row : table.rows) {
    json r = json::array();
    for (const Cell& c : row) {
      if (const double* d = std::get_if<double>(&c))
        r.push_back(std::isfinite(*d) ? json(*d) : json(format_number(*d)));
      else
        r.push_back(std::get<std::string>(c));
    }
    rows.push_back(std::move(r));
  }
  doc["rows"] = std::move(rows);
  json summary = json::object();
  for (const auto& [key, value] : table.summary) summary[key] = value;
  doc["summary"] = std::move(summary);
  out << doc.dump(2) << '\n';
}

RunResult run(const json& config, const std::optional<std::filesystem::path>& output_dir) {
  RunResult res;
  try {
    const Scenario sc = parse_scenario(config);
    const Section os = sc.root.sub("output");
    const std::string format = os.text("format", "csv");
    if (format != "csv" && format != "json") throw ConfigError("field 'output.format' must be csv or json");
    const std::filesystem::path dir = output_dir ? *output_dir : std::filesystem::path(os.text("path", "."));
    int code = kOk;
    if (sc.command == "validate")
      res.table = run_validate(sc, code);
    else if (sc.command == "mass")
      res.table = run_mass(sc);
    else if (sc.command == "imcf")
      res.table = run_imcf(sc);
    else if (sc.command == "check")
      res.table = run_check(sc, code);
    else
      res.table = run_sads_demo(sc);
    const std::filesystem::path file = dir / (sc.command + "." + format);
    write_output(res.table, file, format, config_digest(config), sc.command);
    res.output = file;
    res.exit_code = code;
    if (code == kValidationFailure) res.message = sc.command + ": validation failed";
  } catch (const ConfigError& e) {
    res.exit_code = kConfigError;
    res.message = std::string("config error: ") + e.what();
  } catch (const expr::UnboundVariable& e) {
    res.exit_code = kConfigError;
    res.message = std::string("config error: ") + e.what();
  } catch (const InvalidArgument& e) {
    res.exit_code = kConfigError;
    res.message = std::string("config error: ") + e.what();
  } catch (const NumericalAbort& e) {
    res.exit_code = kNumericalAbort;
    res.message = std::string("numerical abort: ") + e.what();
  } catch (const expr::DomainError& e) {
    res.exit_code = kNumericalAbort;
    res.message = std::string("numerical abort: ") + e.what();
  }
  return res;
}

RunResult run_file(const std::filesystem::path& config_path, const std::optional<std::filesystem::path>& output_dir) {
  std::ifstream in(config_path);
  if (!in) return {kConfigError, "config error: cannot open " + config_path.string(), std::nullopt, {}};
  json config;
  try {
    config = json::parse(in);
  } catch (const json::parse_error& e) {
    return {kConfigError, std::string("config error: ") + e.what(), std::nullopt, {}};
  }
  return run(config, output_dir);
}

}  // namespace arwmass::cli
