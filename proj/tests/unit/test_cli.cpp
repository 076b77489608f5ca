#include <doctest.h>

#include <fstream>
#include <sstream>

#include "g2flow/app/commands.hpp"

using namespace g2;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = G2FLOW_SCENARIO_DIR;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "g2flow_cli_test" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_scenario(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "scenario.json";
  std::ofstream(p) << text;
  return p;
}

std::string read(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<double>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

struct Quiet {
  std::ostringstream out, err;
  RunOptions opt(const fs::path& dir, int halve = 0) {
    RunOptions o;
    o.out_dir = dir;
    o.dt_halve = halve;
    o.out = &out;
    o.err = &err;
    return o;
  }
};

std::string error_of(const std::string& text) {
  try {
    parse_scenario_text(text);
  } catch (const ScenarioError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("scenario files round-trip") {
  for (const char* name : {"flat", "nilpotent", "nilpotent_long", "lattice", "corrupted_phi"}) {
    CAPTURE(name);
    const Scenario s = load_scenario(kScenarios / (std::string(name) + ".json"));
    const auto emitted = emit_scenario(s).dump(2);
    const Scenario back = parse_scenario_text(emitted);
    CHECK(back == s);
    CHECK(emit_scenario(back).dump(2) == emitted);
  }
}

TEST_CASE("rational values round-trip exactly") {
  const Scenario s = parse_scenario_text(R"({
    "backend": {"type": "lie", "structure_constants": [[2, 3, 5, 0.5], [1, 3, 6, "2/4"]]},
    "initial": {"type": "standard"}})");
  CHECK(s.brackets[0].value == Rational(1, 2));
  CHECK(s.brackets[1].value == Rational(1, 2));
  CHECK(s.brackets[0].i == 1);
  const auto j = emit_scenario(s);
  CHECK(j["backend"]["structure_constants"][0][3] == "1/2");
  CHECK(j["backend"]["structure_constants"][0][0] == 2);
  CHECK(parse_scenario(nlohmann::json::parse(j.dump())) == s);
}

TEST_CASE("parse errors name the line or the field") {
  CHECK(error_of("{\n  \"backend\": {\n    \"type\": \"lie\",,\n  }\n}").find("line 3") != std::string::npos);
  CHECK(error_of(R"({"initial": {"type": "standard"}})").find("'backend'") != std::string::npos);
  CHECK(error_of(R"({"backend": {"type": "lie", "structure_constants": [[1, 2, 8, 1]]}})")
            .find("backend.structure_constants[0][2]") != std::string::npos);
  CHECK(error_of(R"({"backend": {"type": "lie", "structure_constants": [[2, 1, 3, 1]]}})")
            .find("i < j") != std::string::npos);
  CHECK(error_of(R"({"backend": {"type": "lie"}, "flow": {"dt": -1}})").find("'flow'") !=
        std::string::npos);
  CHECK(error_of(R"({"backend": {"type": "lie"}, "initial": {"type": "perturbation", "modes": []}})")
            .find("initial.type") != std::string::npos);
  CHECK(error_of(R"({"backend": {"type": "lie", "structure_constants": [[1, 2, 3, "x/y"]]}})")
            .find("backend.structure_constants[0][3]") != std::string::npos);
}

TEST_CASE("Jacobi, positivity and closedness are validated at load") {
  CHECK_THROWS_WITH_AS(load_scenario(kScenarios / "non_jacobi.json"),
                       doctest::Contains("Jacobi"), ScenarioError);
  // so(3) on e1..e3 with the standard 3-form: valid algebra, not closed.
  CHECK(error_of(R"({"backend": {"type": "lie", "structure_constants":
        [[1, 2, 3, 1], [2, 3, 1, 1], [1, 3, 2, -1]]}})")
            .find("not closed") != std::string::npos);
  CHECK(error_of(R"({"backend": {"type": "lie"}, "initial": {"type": "coefficients",
        "terms": [[1, 2, 3, 1]]}})")
            .find("rejected") != std::string::npos);
}

TEST_CASE("check command exit codes") {
  Quiet q;
  const auto dir = scratch("check");
  CHECK(run_command("check", kScenarios / "flat.json", q.opt(dir)) == kExitOk);
  CHECK(run_command("check", kScenarios / "nilpotent.json", q.opt(dir)) == kExitOk);
  CHECK(run_command("check", kScenarios / "corrupted_phi.json", q.opt(dir)) == kExitCheckFailed);
  const auto report = nlohmann::json::parse(read(dir / "check.json"));
  const auto failed = report["failed"].get<std::vector<std::string>>();
  CHECK(std::find(failed.begin(), failed.end(), "phi_components") != failed.end());
  CHECK(run_command("check", kScenarios / "non_jacobi.json", q.opt(dir)) == kExitUsage);
  CHECK(run_command("check", kScenarios / "missing.json", q.opt(dir)) == kExitUsage);
  CHECK(run_command("frobnicate", kScenarios / "flat.json", q.opt(dir)) == kExitUsage);
  auto seeded = q.opt(dir);
  seeded.seed = 7;
  CHECK(run_command("check", kScenarios / "nilpotent.json", seeded) == kExitOk);
}

TEST_CASE("flow command writes the CSV") {
  Quiet q;
  const auto dir = scratch("flow");
  REQUIRE(run_command("flow", kScenarios / "flat.json", q.opt(dir)) == kExitOk);
  CHECK(read(dir / "flat.csv").rfind(csv_header(), 0) == 0);
  const auto flat = read_csv(dir / "flat.csv");
  CHECK(flat.size() == 11);
  for (const auto& r : flat) {
    REQUIRE(r.size() == 7);
    CHECK(r[1] == 0);
    CHECK(r[3] == 1);
    CHECK(r[5] == 0);
    CHECK(r[6] == 1);
  }
  REQUIRE(run_command("flow", kScenarios / "nilpotent.json", q.opt(dir)) == kExitOk);
  const auto nil = read_csv(dir / "nilpotent.csv");
  for (std::size_t i = 1; i < nil.size(); ++i) CHECK(nil[i][3] > nil[i - 1][3]);
  for (const auto& r : nil) CHECK(r[1] <= 0);
  // --dt-halve keeps the sample times.
  REQUIRE(run_command("flow", kScenarios / "nilpotent.json", q.opt(dir, 1)) == kExitOk);
  const auto half = read_csv(dir / "nilpotent.csv");
  REQUIRE(half.size() == nil.size());
  CHECK(half.back()[0] == nil.back()[0]);
  CHECK(half.back()[3] == doctest::Approx(nil.back()[3]).epsilon(1e-10));
}

TEST_CASE("CSV rows carry 17 significant digits") {
  SampleRow r;
  r.t = 0.1;
  r.scalar = -1.0 / 3;
  CHECK(csv_row(r) == "0.10000000000000001,-0.33333333333333331,0,0,0,0,0\n");
}

TEST_CASE("blowup and closedness drift have distinct exit codes") {
  Quiet q;
  const auto dir = scratch("exit");
  const auto blow = write_scenario(dir, R"({
    "backend": {"type": "lie", "structure_constants": [[2, 3, 5, 1], [1, 3, 6, 1]]},
    "flow": {"dt": 0.001, "t_end": 0.01, "rm_ceiling": 1.0}})");
  CHECK(run_command("flow", blow, q.opt(dir)) == kExitBlowup);
  CHECK(q.err.str().find("blowup") != std::string::npos);
  const auto drift = write_scenario(dir, R"({
    "backend": {"type": "lattice", "active_dims": [1, 2], "sizes": [8, 8],
                "spacings": [0.125, 0.125]},
    "initial": {"type": "perturbation", "modes": [
      {"component": [3, 4], "amplitude": 0.02, "wavevector": [1, 1]}]},
    "flow": {"dt": 0.0002, "t_end": 0.001, "closedness_tol": 1e-30}})");
  CHECK(run_command("flow", drift, q.opt(dir)) == kExitClosednessDrift);
  CHECK(q.err.str().find("closedness") != std::string::npos);
}

TEST_CASE("lattice flow output is deterministic") {
  Quiet q;
  const auto dir = scratch("determinism");
  const auto sc = write_scenario(dir, R"({
    "backend": {"type": "lattice", "active_dims": [1, 2], "sizes": [8, 8],
                "spacings": [0.125, 0.125]},
    "initial": {"type": "perturbation", "modes": [
      {"component": [3, 4], "amplitude": 0.02, "wavevector": [1, 1]}]},
    "flow": {"dt": 0.0002, "t_end": 0.002, "sample_every": 5},
    "output": {"csv": "a.csv"}})");
  REQUIRE(run_command("flow", sc, q.opt(dir)) == kExitOk);
  const std::string first = read(dir / "a.csv");
  REQUIRE(run_command("flow", sc, q.opt(dir)) == kExitOk);
  CHECK(read(dir / "a.csv") == first);
  for (const auto& r : read_csv(dir / "a.csv")) CHECK(r[5] < 1e-10);
}

TEST_CASE("diagnose on the flat scenario has vanishing residuals") {
  Quiet q;
  const auto dir = scratch("diag_flat");
  REQUIRE(run_command("diagnose", kScenarios / "flat.json", q.opt(dir, 1)) == kExitOk);
  const auto rep = nlohmann::json::parse(read(dir / "flat_diagnostics.json"));
  for (const auto& level : rep["levels"])
    for (const auto& [name, v] : level["residual_max"].items()) CHECK(v.get<double>() <= 1e-12);
  CHECK(rep["flat_point"]["corrected"] == "0");
  CHECK(rep["failed"].empty());
}

TEST_CASE("diagnose on the nilpotent scenario converges at second order") {
  Quiet q;
  const auto dir = scratch("diag_nil");
  REQUIRE(run_command("diagnose", kScenarios / "nilpotent.json", q.opt(dir, 2)) == kExitOk);
  const auto rep = nlohmann::json::parse(read(dir / "nilpotent_diagnostics.json"));
  for (const auto& [name, orders] : rep["orders"].items())
    for (const auto& o : orders) CHECK(o.get<double>() >= 1.9);
  CHECK(rep["flat_point"]["uncorrected"] == "42");
  CHECK(fs::exists(dir / "residuals.csv"));
  CHECK(fs::exists(dir / "estimates.csv"));
}
