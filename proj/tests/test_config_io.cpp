#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "motsim/config.hpp"
#include "motsim/run.hpp"
#include "motsim/snapshot.hpp"

using namespace motsim;
namespace fs = std::filesystem;

namespace {

const char* kMinimalConfig = R"({
  "grid": {"nx": 8, "ny": 8, "lx": 1.0, "ly": 1.0},
  "params": {"m": 2.0, "alpha": 1.0, "beta": 0.5, "d_coef": 4.0},
  "initial": {"kind": "constants", "u0": 1.0, "v0": 1.0, "w0": 0.5},
  "stop": {"max_time": 1.0}
})";

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path fresh_dir(const char* name) {
  fs::path dir = fs::path("config_io_out") / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

RunConfig homogeneous_config() {
  RunConfig cfg;
  cfg.grid = GridSpec{4, 4, 10.0, 10.0};
  cfg.params.m = 2.0;
  cfg.params.alpha = 1.0;
  cfg.params.beta = 0.5;
  cfg.params.d_coef = 5.0;
  cfg.params.response = ResponseKind::linear();
  cfg.initial.kind = InitialData::Kind::constants;
  cfg.initial.u0 = 1.0;
  cfg.initial.v0 = 1.0;
  cfg.initial.w0 = 2.0;
  cfg.control.dt_max = 0.05;
  cfg.control.dt_init = 0.05;
  cfg.stop.max_time = 100.0;
  cfg.stop.tol_conv = 1e-4;
  cfg.sampling = 50;
  return cfg;
}

}  // namespace

TEST_CASE("minimal config parses with the documented defaults") {
  ConfigParseResult parsed = parse_config(kMinimalConfig);
  REQUIRE(parsed.ok());
  const RunConfig& cfg = *parsed.config;
  CHECK(cfg.control.dt_init == 1e-4);
  CHECK(cfg.control.cg_tol == 1e-10);
  CHECK(cfg.control.safety == 0.5);
  CHECK(cfg.sampling == 50);
  CHECK(cfg.eta == 1.0);
  CHECK(cfg.params.eps == 0.0);
  CHECK(cfg.params.response.type == ResponseType::linear);
  CHECK(cfg.seed == 0);
  CHECK(cfg.snapshot_times.empty());
  CHECK(!cfg.stop.tol_conv.has_value());
}

TEST_CASE("unknown keys are rejected by name") {
  std::string text = kMinimalConfig;
  text.insert(text.rfind('}'), R"(, "mm": 3)");
  ConfigParseResult parsed = parse_config(text);
  REQUIRE(!parsed.ok());
  bool found = false;
  for (const auto& e : parsed.errors) found |= e.find("unknown key: mm") != std::string::npos;
  CHECK(found);
}

TEST_CASE("nested unknown keys carry their path") {
  std::string text = R"({
    "grid": {"nx": 8, "ny": 8, "lx": 1.0, "ly": 1.0, "nz": 2},
    "params": {"m": 2.0, "alpha": 1.0, "beta": 0.5, "d_coef": 4.0},
    "initial": {"kind": "constants", "u0": 1.0, "v0": 1.0, "w0": 0.5},
    "stop": {"max_time": 1.0}
  })";
  ConfigParseResult parsed = parse_config(text);
  REQUIRE(!parsed.ok());
  bool found = false;
  for (const auto& e : parsed.errors)
    found |= e.find("unknown key: grid.nz") != std::string::npos;
  CHECK(found);
}

TEST_CASE("semantic violations aggregate through core validation") {
  std::string text = R"({
    "grid": {"nx": 8, "ny": 8, "lx": 1.0, "ly": 1.0},
    "params": {"m": 0.5, "alpha": 1.0, "beta": 0.5, "d_coef": 4.0},
    "initial": {"kind": "constants", "u0": 1.0, "v0": 1.0, "w0": 0.5},
    "stop": {"max_time": 1.0}
  })";
  ConfigParseResult parsed = parse_config(text);
  REQUIRE(!parsed.ok());
  bool found = false;
  for (const auto& e : parsed.errors) found |= e.find("m must exceed 1") != std::string::npos;
  CHECK(found);
}

TEST_CASE("syntax errors surface the parser position") {
  ConfigParseResult parsed = parse_config("{\n  \"grid\": [,]\n}");
  REQUIRE(!parsed.ok());
  CHECK(parsed.errors.size() == 1);
  CHECK(parsed.errors[0].find("parse error") != std::string::npos);
}

TEST_CASE("parse-serialize-parse is the identity") {
  std::string text = R"({
    "grid": {"nx": 16, "ny": 12, "lx": 2.0, "ly": 1.5},
    "params": {"m": 2.5, "alpha": 0.7, "beta": 1.25, "d_coef": 16.0, "eps": 0.25,
               "cap_m": 4.0, "response": {"kind": "saturating", "lambda": 0.3}},
    "control": {"dt_init": 2e-4, "dt_min": 1e-11, "dt_max": 5e-3, "safety": 0.8,
                "cg_tol": 1e-11, "cg_max_iter": 500, "negativity_tol": 1e-13},
    "initial": {"kind": "perturbed", "u0": 1.0, "v0": 1.0, "w0": 0.5,
                "amplitude": 0.2, "kx": 2, "ky": 1},
    "stop": {"max_time": 7.5, "tol_conv": 1e-3},
    "sampling": 25,
    "eta": 0.5,
    "seed": 42,
    "snapshot_times": [0.5, 1.0],
    "v_floor": 0.02
  })";
  ConfigParseResult first = parse_config(text);
  REQUIRE(first.ok());
  const std::string round1 = serialize_config(*first.config);
  ConfigParseResult second = parse_config(round1);
  REQUIRE(second.ok());
  CHECK(serialize_config(*second.config) == round1);
  CHECK(second.config->params.response.lambda == first.config->params.response.lambda);
  CHECK(second.config->control.cg_tol == first.config->control.cg_tol);
  CHECK(second.config->snapshot_times == first.config->snapshot_times);
  CHECK(second.config->v_floor == first.config->v_floor);
}

TEST_CASE("initial data variants build valid states") {
  GridSpec g{8, 8, 1.0, 1.0};
  InitialData init;
  init.kind = InitialData::Kind::perturbed;
  init.u0 = 1.0;
  init.v0 = 1.0;
  init.w0 = 0.5;
  init.amplitude = 0.2;
  FieldState s = build_initial_state(g, init, 0);
  CHECK(field_mean(s.u) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(field_min(s.u) > 0.0);

  init.kind = InitialData::Kind::random;
  init.amplitude = 0.5;
  FieldState r1 = build_initial_state(g, init, 7);
  FieldState r2 = build_initial_state(g, init, 7);
  for (std::size_t c = 0; c < r1.u.size(); ++c)
    CHECK(r1.u.data()[c] == r2.u.data()[c]);
  init.seed = 8;
  FieldState r3 = build_initial_state(g, init, 7);
  bool differs = false;
  for (std::size_t c = 0; c < r1.u.size(); ++c)
    differs |= r1.u.data()[c] != r3.u.data()[c];
  CHECK(differs);

  init.amplitude = 2.0;  // would make u negative
  CHECK_THROWS_AS(build_initial_state(g, init, 0), std::invalid_argument);
}

TEST_CASE("snapshot layout is bit-exact") {
  GridSpec g{4, 4, 1.0, 2.0};
  FieldState s;
  s.u = ScalarField(g, 0.0);
  s.v = ScalarField(g, 0.0);
  s.w = ScalarField(g, 0.0);
  s.t = 0.75;
  for (std::size_t c = 0; c < s.u.size(); ++c) {
    s.u.data()[c] = 0.1 * static_cast<double>(c) + 1.0 / 3.0;
    s.v.data()[c] = 1.0 + 1e-17 * static_cast<double>(c);
    s.w.data()[c] = c % 3 == 0 ? 0.0 : 1.0 / 7.0;
  }
  fs::path dir = fresh_dir("snapshot");
  fs::path file = dir / "state.ksf";
  write_snapshot(s, file);
  CHECK(fs::file_size(file) == 4 + 8 + 24 + 24 * 16);

  FieldState back = read_snapshot(file);
  CHECK(back.t == s.t);
  CHECK(back.u.grid() == g);
  for (std::size_t c = 0; c < s.u.size(); ++c) {
    CHECK(back.u.data()[c] == s.u.data()[c]);
    CHECK(back.v.data()[c] == s.v.data()[c]);
    CHECK(back.w.data()[c] == s.w.data()[c]);
  }

  std::string raw = read_file(file);
  raw[0] = 'X';
  std::ofstream(file, std::ios::binary) << raw;
  CHECK_THROWS_AS(read_snapshot(file), FormatError);
}

TEST_CASE("csv rows have 16 fields that round-trip at 17 digits") {
  DiagnosticsRecord rec;
  rec.t = M_PI;
  rec.mass_u = 1.0 / 3.0;
  rec.mass_w = 2.0 / 7.0;
  rec.mass_combined = rec.mass_u + 0.5 * rec.mass_w;
  rec.mass_v = std::sqrt(2.0);
  rec.max_w = 0.5;
  rec.min_v = 1e-300;
  rec.l2_u = 1.0 + 1e-15;
  rec.dirichlet_v = 3.7e-11;
  rec.dirichlet_u_pow = 0.0;
  rec.duality_integrand = 123456.789012345;
  rec.consumption_rate = 6.02e23;
  rec.lyapunov = 1.0;
  rec.norm_to_target = 1e-9;
  rec.dt_used = 2.5e-5;
  CumulativeIntegrals tot;
  tot.consumption_total = 0.1234567890123456789;

  std::ostringstream out;
  write_csv_row(out, rec, tot);
  std::string row = out.str();
  REQUIRE(!row.empty());
  row.pop_back();  // newline

  std::vector<std::string> fields;
  std::stringstream ss(row);
  std::string item;
  while (std::getline(ss, item, ',')) fields.push_back(item);
  REQUIRE(fields.size() == 16);

  CHECK(std::strtod(fields[0].c_str(), nullptr) == rec.t);
  CHECK(std::strtod(fields[1].c_str(), nullptr) == rec.mass_u);
  CHECK(std::strtod(fields[6].c_str(), nullptr) == rec.min_v);
  CHECK(std::strtod(fields[11].c_str(), nullptr) == rec.consumption_rate);
  CHECK(std::strtod(fields[12].c_str(), nullptr) == tot.consumption_total);
  CHECK(std::strtod(fields[15].c_str(), nullptr) == rec.dt_used);

  std::string header(kDiagnosticsCsvHeader);
  CHECK(std::count(header.begin(), header.end(), ',') == 15);
}

TEST_CASE("run_command drives the homogeneous config to the target") {
  RunConfig cfg = homogeneous_config();
  fs::path dir = fresh_dir("run_homog");
  RunArtifacts art = execute_run(cfg, dir.string(), /*quiet=*/true);
  CHECK(art.exit_code == kExitConverged);
  CHECK(art.report.u_star == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(art.report.final_norm < 1e-4);

  const std::string report = read_file(dir / "report.json");
  CHECK(report.find("\"classification\": \"converged\"") != std::string::npos);
  CHECK(report.find("\"u_star\": 2.0") != std::string::npos);

  const std::string csv = read_file(dir / "diagnostics.csv");
  CHECK(csv.rfind(kDiagnosticsCsvHeader, 0) == 0);
}

TEST_CASE("empty budget exits with the budget code and one sample") {
  RunConfig cfg = homogeneous_config();
  cfg.stop.max_time = 0.0;
  cfg.stop.tol_conv.reset();
  fs::path dir = fresh_dir("run_budget");
  RunArtifacts art = execute_run(cfg, dir.string(), /*quiet=*/true);
  CHECK(art.exit_code == kExitBudget);
  CHECK(art.report.steps == 0);
  const std::string csv = read_file(dir / "diagnostics.csv");
  // header plus exactly one sample row
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
}

TEST_CASE("nonpositive v0 aborts before stepping") {
  RunConfig cfg = homogeneous_config();
  cfg.initial.v0 = 0.0;
  fs::path dir = fresh_dir("run_bad_v0");
  RunArtifacts art = execute_run(cfg, dir.string(), /*quiet=*/true);
  CHECK(art.exit_code == kExitAborted);
  CHECK(art.error.find("v0") != std::string::npos);
}

TEST_CASE("snapshots are written at the requested times") {
  RunConfig cfg = homogeneous_config();
  cfg.stop.tol_conv.reset();
  cfg.stop.max_time = 0.5;
  cfg.snapshot_times = {0.2, 0.4};
  fs::path dir = fresh_dir("run_snaps");
  RunArtifacts art = execute_run(cfg, dir.string(), /*quiet=*/true);
  CHECK(art.exit_code == kExitBudget);
  FieldState s0 = read_snapshot(dir / "snapshot_000.ksf");
  FieldState s1 = read_snapshot(dir / "snapshot_001.ksf");
  CHECK(s0.t == 0.2);
  CHECK(s1.t == 0.4);
}

TEST_CASE("sweep produces an ordered deterministic table with a threshold") {
  RunConfig cfg = homogeneous_config();
  std::vector<double> ds{2.0, 8.0};
  fs::path dir1 = fresh_dir("sweep_a");
  SweepResult r1 = sweep_command(cfg, ds, dir1.string(), 2);
  CHECK(r1.exit_code == 0);
  REQUIRE(r1.rows.size() == 2);
  CHECK(r1.rows[0].d_coef == 2.0);
  CHECK(r1.rows[1].d_coef == 8.0);
  CHECK(r1.rows[0].classification == "converged");
  CHECK(r1.rows[1].classification == "converged");
  REQUIRE(r1.threshold_candidate.has_value());
  CHECK(*r1.threshold_candidate == 2.0);

  fs::path dir2 = fresh_dir("sweep_b");
  SweepResult r2 = sweep_command(cfg, ds, dir2.string(), 1);
  CHECK(read_file(dir1 / "sweep.csv") == read_file(dir2 / "sweep.csv"));
  CHECK(read_file(dir1 / "D_2" / "diagnostics.csv") ==
        read_file(dir2 / "D_2" / "diagnostics.csv"));
}

TEST_CASE("singleton sweep reports its D as the threshold candidate") {
  RunConfig cfg = homogeneous_config();
  std::vector<double> ds{1.0};
  fs::path dir = fresh_dir("sweep_single");
  SweepResult r = sweep_command(cfg, ds, dir.string(), 1);
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0].classification == "converged");
  REQUIRE(r.threshold_candidate.has_value());
  CHECK(*r.threshold_candidate == 1.0);
}

TEST_CASE("oracle command prints the trajectory csv") {
  RunConfig cfg = homogeneous_config();
  cfg.stop.max_time = 1.0;
  cfg.control.dt_init = 1e-3;
  cfg.sampling = 100;
  std::ostringstream out;
  CHECK(oracle_command(cfg, out) == 0);
  std::string text = out.str();
  CHECK(text.rfind("t,u,v,w\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') >= 3);
}
