#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "doctest.h"
#include "scenario.hpp"

using namespace arwmass::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("arwmass_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> split(const std::string& row) {
  std::vector<std::string> out;
  std::istringstream in(row);
  for (std::string c; std::getline(in, c, ',');) out.push_back(c);
  return out;
}

// Value of `column` in the last data row.
double last_value(const std::string& csv, const std::string& column) {
  std::vector<std::string> header;
  std::vector<std::string> last;
  for (const std::string& l : lines(csv)) {
    if (l.empty() || l[0] == '#') continue;
    if (header.empty())
      header = split(l);
    else
      last = split(l);
  }
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == column) return std::stod(last.at(i));
  FAIL("no column " << column);
  return 0.0;
}

}  // namespace

TEST_CASE("sads-demo ends at the mass parameter") {
  const json cfg = json::parse(R"j({"command": "sads-demo", "spacetime": {"kind": "sads", "n": 3, "Lambda": 0, "m": 1}})j");
  const RunResult r = run(cfg, scratch("sads"));
  REQUIRE(r.exit_code == kOk);
  REQUIRE(r.output);
  CHECK(r.output->filename() == "sads-demo.csv");
  const std::string csv = slurp(*r.output);
  CHECK(last_value(csv, "m_hat") == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(lines(csv)[0] == "# config digest " + config_digest(cfg));
}

TEST_CASE("mass on the RW family") {
  const json cfg = json::parse(R"j({"command": "mass", "spacetime": {"kind": "rw-family", "k": 2}, "tcc": {"events": 20}})j");
  const RunResult r = run(cfg, scratch("mass"));
  REQUIRE(r.exit_code == kOk);
  CHECK(last_value(slurp(*r.output), "m_hat") == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("config errors exit 1 and name the field") {
  const RunResult r = run(json::parse(R"j({"command": "mass", "spacetime": {"kind": "custom", "f": "log(-t)"}})j"),
                          scratch("bad"));
  CHECK(r.exit_code == kConfigError);
  CHECK(r.message.find("omega") != std::string::npos);
  CHECK(!r.output);

  const RunResult kind = run(json::parse(R"j({"command": "mass", "spacetime": {"kind": "kerr"}})j"), scratch("bad2"));
  CHECK(kind.exit_code == kConfigError);
  CHECK(kind.message.find("kerr") != std::string::npos);

  const RunResult cmd = run(json::parse(R"j({"command": "plot", "spacetime": {"kind": "sads"}})j"), scratch("bad3"));
  CHECK(cmd.exit_code == kConfigError);

  const RunResult expr = run(json::parse(R"j({"command": "validate",
      "spacetime": {"kind": "custom", "omega": 1, "f": "log(-t"}})j"),
                             scratch("bad4"));
  CHECK(expr.exit_code == kConfigError);
  CHECK(expr.message.find("spacetime.f") != std::string::npos);
  CHECK(expr.message.find("offset") != std::string::npos);

  const RunResult unbound = run(json::parse(R"j({"command": "validate",
      "spacetime": {"kind": "custom", "omega": 1, "f": "log(-k*t)"}})j"),
                                scratch("bad5"));
  CHECK(unbound.exit_code == kConfigError);
  CHECK(unbound.message.find("'k'") != std::string::npos);

  CHECK(run_file(scratch("missing") / "none.json").exit_code == kConfigError);
}

TEST_CASE("validation failure and numerical abort") {
  const RunResult v = run(json::parse(R"j({"command": "validate",
      "spacetime": {"kind": "custom", "omega": 1, "f": "-log(-log(-t))", "a": -0.5}})j"),
                          scratch("val"));
  CHECK(v.exit_code == kValidationFailure);
  REQUIRE(v.output);
  CHECK(fs::exists(*v.output));

  const RunResult ok = run(json::parse(R"j({"command": "validate", "spacetime": {"kind": "rw-family"}})j"), scratch("val2"));
  CHECK(ok.exit_code == kOk);

  const RunResult abort = run(json::parse(R"j({"command": "imcf",
      "spacetime": {"kind": "custom", "omega": 1, "f": "log(-t)", "psi": "-5*t^2"}, "imcf": {"u0": -0.5}})j"),
                              scratch("abort"));
  CHECK(abort.exit_code == kNumericalAbort);
  CHECK(abort.message.find("mean curvature") != std::string::npos);
}

TEST_CASE("check and imcf tables") {
  const RunResult c = run(json::parse(R"j({"command": "check", "spacetime": {"kind": "sads", "Lambda": -1},
      "check": {"events": 4}, "seed": 3})j"),
                          scratch("check"));
  CHECK(c.exit_code == kOk);
  CHECK(c.table.columns.front() == "quantity");
  CHECK(c.table.rows.size() == 4 * 6 + 3);

  const RunResult i = run(json::parse(R"j({"command": "imcf", "spacetime": {"kind": "rw-family"},
      "imcf": {"u0": -0.5, "t_end": 3, "stride": 5}, "output": {"format": "json"}})j"),
                          scratch("imcf"));
  REQUIRE(i.exit_code == kOk);
  CHECK(i.output->filename() == "imcf.json");
  const json doc = json::parse(slurp(*i.output));
  CHECK(doc["columns"][1] == "u");
  CHECK(doc["rows"].back()[0].get<double>() == 3.0);
  CHECK(doc["rows"].back()[1].get<double>() == doctest::Approx(-0.1839397).epsilon(1e-7));
}

TEST_CASE("property: identical configs give identical files") {
  const json cfg = json::parse(R"j({"command": "mass", "spacetime": {"kind": "sads", "Lambda": -1}, "seed": 9,
      "tcc": {"events": 10}, "grid": {"nodes_per_axis": 8}})j");
  const RunResult a = run(cfg, scratch("det_a"));
  const RunResult b = run(cfg, scratch("det_b"));
  REQUIRE(a.exit_code == kOk);
  CHECK(slurp(*a.output) == slurp(*b.output));

  json other = cfg;
  other["seed"] = 10;
  CHECK(config_digest(other) != config_digest(cfg));
  // key order and whitespace do not enter the digest
  const json reordered = json::parse(R"j({"tcc": {"events": 10}, "seed": 9, "grid": {"nodes_per_axis": 8},
      "spacetime": {"Lambda": -1, "kind": "sads"}, "command": "mass"})j");
  CHECK(config_digest(reordered) == config_digest(cfg));
  fs::remove_all(fs::temp_directory_path() / ("arwmass_cli_" + std::to_string(::getpid())));
}
