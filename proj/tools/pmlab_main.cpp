// pmlab: numerical laboratory for the two-parameter contraction family
// of porous medium / fast diffusion equations on the torus.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "pmlab/scenarios.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw pmlab::ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"pmlab: contraction-family laboratory for m U_t = Lap(U^m)"};
  app.require_subcommand(1);
  app.fallthrough(true);

  std::string config_path;
  std::string out_override;
  long long seed_override = -1;
  int workers_override = 0;
  app.add_option("--config", config_path, "experiment config file (key = value)")
      ->required();
  app.add_option("--out", out_override, "output directory (overrides 'out')");
  app.add_option("--seed", seed_override, "RNG seed (overrides 'seed')");
  app.add_option("--workers", workers_override, "sweep worker count (overrides 'workers')");

  const char* names[] = {"region",      "matrices", "simulate", "contract", "gradient",
                         "directional", "gradflow", "sweep",    "validate"};
  const char* descs[] = {"classify the admissible exponent set on an (alpha, p) grid",
                         "Q/M matrix scans and region-positivity equivalence",
                         "evolve one initial datum and persist the trajectory",
                         "two-solution contraction functional and balance diagnostics",
                         "gradient functional decay and balance diagnostics",
                         "directional difference-quotient decay",
                         "energy decay and L2 gradient-flow residual",
                         "sweep (n, alpha, p): classification, spectra, monotonicity",
                         "solver validation battery (oracles and conservation)"};
  for (int i = 0; i < 9; ++i) app.add_subcommand(names[i], descs[i]);

  CLI11_PARSE(app, argc, argv);

  try {
    pmlab::ExperimentConfig cfg = pmlab::parse_config(read_file(config_path));
    const auto sub = app.get_subcommands().front()->get_name();
    const auto scenario = pmlab::scenario_from_string(sub);
    if (cfg.scenario_set && cfg.scenario != scenario)
      throw pmlab::ConfigError("config says 'scenario = " +
                               std::string(pmlab::to_string(cfg.scenario)) +
                               "' but the subcommand is '" + sub + "'");
    cfg.scenario = scenario;
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
    if (workers_override > 0) cfg.workers = workers_override;

    const int code = pmlab::run(cfg);
    if (code == pmlab::kExitOk)
      std::printf("pmlab %s: pass (outputs in %s)\n", sub.c_str(), cfg.out_dir.c_str());
    else
      std::printf("pmlab %s: CHECK FAILURE (see %s/manifest.json)\n", sub.c_str(),
                  cfg.out_dir.c_str());
    return code;
  } catch (const pmlab::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return pmlab::kExitConfigError;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return pmlab::kExitConfigError;
  } catch (const pmlab::InstabilityError& e) {
    std::fprintf(stderr, "solver instability: %s\n", e.what());
    return pmlab::kExitInstability;
  }
}
