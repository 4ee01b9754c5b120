#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "pmlab/io.hpp"
#include "pmlab/scenarios.hpp"

using namespace pmlab;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / "pmlab_test" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kContractCfg = R"(
seed = 7
diffusion.m = 0.5
grid.cells = 64
exponents.alpha = 0.75
exponents.p = 2
solver.t_end = 0.2
solver.sample_every = 0.05
initial.kind = cosine
initial.base = 1.0
initial.amplitude = 0.2
initial2.kind = cosine
initial2.base = 1.2
initial2.amplitude = 0.2
initial2.phase = 1.1
)";

} // namespace

TEST_CASE("parse_config: errors carry line numbers, unknown keys rejected") {
  CHECK_THROWS_AS(parse_config(""), ConfigError);
  CHECK_THROWS_AS(parse_config("   \n# only comments\n"), ConfigError);

  try {
    parse_config("diffusion.m = 1.0\nbogus.key = 3\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    CHECK(std::string(e.what()).find("bogus.key") != std::string::npos);
  }

  try {
    parse_config("diffusion.m = fast\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }

  CHECK_THROWS_AS(parse_config("diffusion.m = 1\ndiffusion.m = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("solver.cfl = 1.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("grid.dim = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("no equals sign here\n"), ConfigError);
}

TEST_CASE("parse_config round-trips through serialize_config") {
  auto cfg = parse_config(kContractCfg);
  cfg.scenario = Scenario::Contract;
  cfg.scenario_set = true;
  auto cfg2 = parse_config(serialize_config(cfg));
  CHECK(cfg2.scenario == Scenario::Contract);
  CHECK(cfg2.seed == 7);
  CHECK(cfg2.m == 0.5);
  CHECK(cfg2.cells == 64);
  CHECK(cfg2.alpha == 0.75);
  CHECK(cfg2.initial2.phase == 1.1);
  CHECK(cfg2.has_initial2);
  CHECK(serialize_config(cfg2) == serialize_config(cfg));
}

TEST_CASE("validate_config rejects inconsistent scenarios") {
  auto cfg = parse_config(kContractCfg);
  cfg.scenario = Scenario::Contract;

  // alpha < |n| lies outside the admissible set
  auto bad = cfg;
  bad.m = 1.5;
  bad.alpha = 0.3;
  CHECK_THROWS_AS(validate_config(bad), ConfigError);

  // contract needs a second initial datum
  auto solo = cfg;
  solo.has_initial2 = false;
  CHECK_THROWS_AS(validate_config(solo), ConfigError);

  // region scenarios need |n| < 1
  auto wide = cfg;
  wide.scenario = Scenario::Region;
  wide.m = 2.5;
  CHECK_THROWS_AS(validate_config(wide), ConfigError);

  // gradflow pins alpha = 1 + n/2 and p = 2
  auto gf = cfg;
  gf.scenario = Scenario::Gradflow;
  gf.m = 1.0;
  gf.alpha = 0.9;
  CHECK_THROWS_AS(validate_config(gf), ConfigError);

  CHECK_NOTHROW(validate_config(cfg));
}

TEST_CASE("contract scenario: identical data give a zero lyapunov and exit 0") {
  auto cfg = parse_config(kContractCfg);
  cfg.scenario = Scenario::Contract;
  cfg.initial2 = cfg.initial;
  cfg.out_dir = temp_dir("contract_same").string();
  CHECK(run(cfg) == kExitOk);
  const auto csv = slurp(fs::path(cfg.out_dir) /
                         "contract_n-0.500_a0.750_p2.000_N64_s7.csv");
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line); // header
  while (std::getline(in, line)) {
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    CHECK(line.substr(c1 + 1, c2 - c1 - 1) == "0");
  }
}

TEST_CASE("region scenario is deterministic byte-for-byte") {
  ExperimentConfig cfg;
  cfg.scenario = Scenario::Region;
  cfg.m = 1.5;
  cfg.region_alpha_steps = 16;
  cfg.region_p_steps = 16;
  cfg.region_p_max = 5.0;

  const auto dir_a = temp_dir("region_a");
  const auto dir_b = temp_dir("region_b");
  cfg.out_dir = dir_a.string();
  CHECK(run(cfg) == kExitOk);
  cfg.out_dir = dir_b.string();
  CHECK(run(cfg) == kExitOk);
  CHECK(fnv1a64_file(dir_a / "region.csv") == fnv1a64_file(dir_b / "region.csv"));
  CHECK(slurp(dir_a / "region.csv") == slurp(dir_b / "region.csv"));
}

TEST_CASE("matrices scenario with an equivalence sample") {
  ExperimentConfig cfg;
  cfg.scenario = Scenario::Matrices;
  cfg.m = 1.5;
  cfg.alpha = 0.75;
  cfg.p = 2.0;
  cfg.scan_steps = 400;
  cfg.scan_samples = 25;
  cfg.region_p_max = 8.0;
  cfg.seed = 3;
  cfg.out_dir = temp_dir("matrices").string();
  CHECK(run(cfg) == kExitOk);
  CHECK(fs::exists(fs::path(cfg.out_dir) / "scan.csv"));
  CHECK(fs::exists(fs::path(cfg.out_dir) / "equivalence.csv"));
  CHECK(fs::exists(fs::path(cfg.out_dir) / "manifest.json"));
}

TEST_CASE("sweep scenario: worker count does not change the bytes") {
  auto base = parse_config(kContractCfg);
  base.scenario = Scenario::Sweep;
  base.sweep_n = {-0.5, 0.5};
  base.sweep_alpha_min = 0.6;
  base.sweep_alpha_max = 0.9;
  base.sweep_alpha_count = 3;
  base.sweep_p_min = 1.5;
  base.sweep_p_max = 3.0;
  base.sweep_p_count = 3;
  base.scan_steps = 300;
  base.t_end = 0.1;

  const auto dir1 = temp_dir("sweep1");
  const auto dir4 = temp_dir("sweep4");
  base.workers = 1;
  base.out_dir = dir1.string();
  CHECK(run(base) == kExitOk);
  base.workers = 4;
  base.out_dir = dir4.string();
  CHECK(run(base) == kExitOk);
  CHECK(slurp(dir1 / "sweep.csv") == slurp(dir4 / "sweep.csv"));
  CHECK(slurp(dir1 / "equivalence.csv") == slurp(dir4 / "equivalence.csv"));
}

TEST_CASE("directional and gradflow scenarios pass their checks") {
  auto cfg = parse_config(kContractCfg);
  cfg.scenario = Scenario::Directional;
  cfg.t_end = 0.5;
  cfg.cells = 128;
  cfg.xi_t = 0.0;
  cfg.xi_x = 1;
  cfg.eta_levels = 3;
  cfg.out_dir = temp_dir("directional").string();
  CHECK(run(cfg) == kExitOk);

  ExperimentConfig gf;
  gf.scenario = Scenario::Gradflow;
  gf.m = 1.0 - 2.0 / 3.0;
  gf.alpha = 1.0 + gf.n() / 2.0;
  gf.p = 2.0;
  gf.cells = 128;
  gf.t_end = 0.5;
  gf.sample_every = 0.02;
  gf.initial.kind = InitialKind::ConstantPlusCosine;
  gf.initial.base = 1.0;
  gf.initial.amplitude = 0.25;
  gf.out_dir = temp_dir("gradflow").string();
  CHECK(run(gf) == kExitOk);
}

TEST_CASE("fnv1a64 reference vectors") {
  CHECK(fnv1a64("", 0) == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a", 1) == 0xaf63dc4c8601ec8cull);
  CHECK(hex64(0xcbf29ce484222325ull) == "cbf29ce484222325");
}

TEST_CASE("snapshot and trajectory round-trips") {
  auto g = TorusGrid<double>::make(2, 16, 3.5);
  auto f = sample(g, [](double x, double y) { return std::sin(x) + std::cos(2 * y) + 2.0; });
  const auto dir = temp_dir("io");

  write_snapshot_binary(dir / "f.f64", f, 0.625);
  double t = 0;
  auto f2 = read_snapshot_binary<double>(dir / "f.f64", &t);
  CHECK(t == 0.625);
  CHECK(f2.grid == g);
  CHECK((f2.values == f.values).all());

  write_snapshot_csv(dir / "f.csv", f);
  const auto first = slurp(dir / "f.csv").substr(0, 12);
  CHECK(first == "i,j,value\n0,");

  // trajectory persistence
  auto prm = DiffusionParams<double>::from_m(1.5, 1);
  auto g1 = TorusGrid<double>::make(1, 32, 6.283185307179586);
  InitialSpec<double> s;
  s.base = 1.0;
  s.amplitude = 0.2;
  SolverConfig<double> sc{prm};
  sc.t_end = 0.2;
  sc.sample_every = 0.1;
  sc.variable = SolveVariable::UAlpha;
  sc.alpha = 0.8;
  auto traj = evolve(make_initial(s, g1, prm), sc);
  write_trajectory(dir / "traj", traj);
  auto traj2 = read_trajectory<double>(dir / "traj");
  REQUIRE(traj2.times.size() == traj.times.size());
  CHECK(traj2.config.alpha == 0.8);
  CHECK(traj2.config.variable == SolveVariable::UAlpha);
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    CHECK(traj2.times[k] == traj.times[k]);
    CHECK((traj2.fields[k].values == traj.fields[k].values).all());
  }

  CHECK_THROWS(read_snapshot_binary<double>(dir / "missing.f64"));
}
