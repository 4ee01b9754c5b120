#pragma once

// Scenario pipelines behind the CLI subcommands. Each run validates its
// config, writes CSV/JSON artifacts plus a manifest into the output
// directory, and reports pass/fail of the enabled checks through the exit
// status (0 pass, 4 check failure; config and stability errors are thrown).

#include <atomic>
#include <cmath>
#include <filesystem>
#include <random>
#include <thread>
#include <vector>

#include "pmlab/config.hpp"
#include "pmlab/functionals.hpp"
#include "pmlab/io.hpp"

namespace pmlab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitInstability = 3;
inline constexpr int kExitCheckFailure = 4;

namespace detail {

inline std::string run_tag(double n, double alpha, double p, Eigen::Index cells,
                           std::uint64_t seed) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "n%+.3f_a%.3f_p%.3f_N%lld_s%llu", n, alpha, p,
                static_cast<long long>(cells), static_cast<unsigned long long>(seed));
  return buf;
}

// accumulates output files and named checks for the run manifest
struct RunLog {
  std::filesystem::path dir;
  nlohmann::json outputs = nlohmann::json::array();
  nlohmann::json checks = nlohmann::json::array();
  bool ok = true;

  explicit RunLog(const std::filesystem::path& d) : dir(d) {
    std::filesystem::create_directories(dir);
  }

  void track(const std::string& rel) {
    const auto p = dir / rel;
    outputs.push_back({{"file", rel},
                       {"bytes", std::filesystem::file_size(p)},
                       {"fnv1a64", hex64(fnv1a64_file(p))}});
  }

  void check(const std::string& name, bool pass, double value, double threshold) {
    checks.push_back({{"name", name}, {"pass", pass}, {"value", value}, {"threshold", threshold}});
    ok = ok && pass;
  }

  int finish(const ExperimentConfig& cfg) {
    std::ofstream echo(dir / "config.echo");
    echo << serialize_config(cfg);
    echo.close();
    track("config.echo");
    nlohmann::json manifest;
    manifest["format_version"] = 1;
    manifest["scenario"] = to_string(cfg.scenario);
    manifest["seed"] = cfg.seed;
    manifest["outputs"] = outputs;
    manifest["checks"] = checks;
    manifest["status"] = ok ? "pass" : "fail";
    std::ofstream mf(dir / "manifest.json");
    mf << manifest.dump(2) << '\n';
    return ok ? kExitOk : kExitCheckFailure;
  }
};

template <typename Rows>
double max_positive_jump(const Rows& rows) {
  double jump = 0;
  for (std::size_t k = 1; k < rows.size(); ++k)
    jump = std::max(jump, rows[k].lyapunov - rows[k - 1].lyapunov);
  return jump;
}

inline TorusGrid<double> make_grid(const ExperimentConfig& cfg) {
  return TorusGrid<double>::make(cfg.dim, cfg.cells, cfg.period);
}

// Evolve the contraction pair in the u = U^alpha variable.
inline std::pair<Trajectory<double>, Trajectory<double>> evolve_pair(const ExperimentConfig& cfg) {
  const auto grid = make_grid(cfg);
  const auto prm = cfg.diffusion();
  auto sc = cfg.solver_config();
  return {evolve(make_initial(cfg.initial, grid, prm), sc),
          evolve(make_initial(cfg.initial2, grid, prm), sc)};
}

} // namespace detail

inline int run_region(const ExperimentConfig& cfg, detail::RunLog& log) {
  const auto grid =
      sample_region(cfg.n(), cfg.region_alpha_steps, cfg.region_p_max, cfg.region_p_steps, cfg.tol);
  write_region_csv(log.dir / "region.csv", grid);
  log.track("region.csv");
  return log.finish(cfg);
}

inline int run_matrices(const ExperimentConfig& cfg, detail::RunLog& log) {
  write_scan_csv(log.dir / "scan.csv", cfg.n(), cfg.alpha, cfg.p, cfg.scan_w_min, cfg.scan_w_max,
                 cfg.scan_steps);
  log.track("scan.csv");

  const auto cls = classify(cfg.n(), ExponentPair<double>{cfg.alpha, cfg.p}, cfg.tol);
  const auto rep =
      q_positivity_scan(cfg.n(), cfg.alpha, cfg.p, cfg.scan_w_min, cfg.scan_w_max, cfg.scan_steps);
  const auto m = m_matrix(cfg.n(), cfg.alpha, cfg.p);
  log.checks.push_back({{"name", "matrices_summary"},
                        {"pass", true},
                        {"class", to_string(cls)},
                        {"m_matrix", {m.a11, m.a12, m.a22}},
                        {"m_eig_min", m.eig_min()},
                        {"m_eig_max", m.eig_max()},
                        {"nu", rep.nu},
                        {"nu0", rep.nu0},
                        {"nu1", rep.nu1},
                        {"witness_w", rep.witnesses.front().first}});
  if (cls == RegionClass::Interior) {
    log.check("interior_q_scan_nonnegative", rep.min_scaled_eig >= -1e-10, rep.min_scaled_eig,
              -1e-10);
    log.check("interior_m_positive", rep.nu1 > 0.0, rep.nu1, 0.0);
  }

  if (cfg.scan_samples > 0) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> ua(1e-3, 1.0), up(1.0 + 1e-6, cfg.region_p_max);
    std::vector<EquivalenceRow<double>> rows;
    bool consistent = true;
    for (int i = 0; i < cfg.scan_samples; ++i) {
      const double a = ua(rng), p = up(rng);
      const auto c = classify(cfg.n(), ExponentPair<double>{a, p}, cfg.tol);
      const auto r = q_positivity_scan(cfg.n(), a, p, 1e-6, 1.0, cfg.scan_steps);
      rows.push_back({cfg.n(), a, p, c, r.min_scaled_eig, r.witnesses.front().first});
      if (c == RegionClass::Interior && r.min_scaled_eig < -1e-10) consistent = false;
      if (c == RegionClass::Outside && r.min_scaled_eig > -1e-8) consistent = false;
    }
    write_equivalence_csv(log.dir / "equivalence.csv", rows);
    log.track("equivalence.csv");
    log.check("region_positivity_equivalence", consistent, consistent ? 1.0 : 0.0, 1.0);
  }
  return log.finish(cfg);
}

inline int run_simulate(const ExperimentConfig& cfg, detail::RunLog& log) {
  const auto grid = detail::make_grid(cfg);
  const auto prm = cfg.diffusion();
  auto traj = evolve(make_initial(cfg.initial, grid, prm), cfg.solver_config());
  write_trajectory(log.dir / "trajectory", traj);
  log.track("trajectory/trajectory.json");

  std::ofstream csv(log.dir / "simulate.csv");
  csv << "t,mass,min,max\n";
  double mass0 = -1, drift = 0;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    // the conserved quantity lives in the U variable
    auto Uk = cfg.store_u ? pow_field(traj.fields[k], 1.0 / cfg.alpha) : traj.fields[k];
    const double mk = mass(Uk);
    if (k == 0)
      mass0 = mk;
    else
      drift = std::max(drift, std::abs(mk - mass0));
    csv << format_scalar(traj.times[k]) << ',' << format_scalar(mk) << ','
        << format_scalar(traj.fields[k].values.minCoeff()) << ','
        << format_scalar(traj.fields[k].values.maxCoeff()) << '\n';
  }
  csv.close();
  log.track("simulate.csv");
  log.check("mass_conservation_rel", drift <= 1e-10 * std::abs(mass0), drift / std::abs(mass0),
            1e-10);
  return log.finish(cfg);
}

inline int run_contract(const ExperimentConfig& cfg, detail::RunLog& log) {
  auto [tu, tv] = detail::evolve_pair(cfg);
  auto rows = contraction_balance(tu, tv, cfg.n(), cfg.alpha, cfg.p, cfg.effective_u_floor());
  const auto name =
      "contract_" + detail::run_tag(cfg.n(), cfg.alpha, cfg.p, cfg.cells, cfg.seed) + ".csv";
  write_diagnostics_csv(log.dir / name, rows);
  log.track(name);

  const double lyap0 = rows.front().lyapunov;
  log.check("lyapunov_monotone", detail::max_positive_jump(rows) <= 1e-8 * lyap0,
            detail::max_positive_jump(rows), 1e-8 * lyap0);
  double min_diss = 0;
  for (const auto& r : rows) min_diss = std::min(min_diss, r.dissipation);
  log.check("dissipation_nonnegative", min_diss >= -1e-10 * std::max(1.0, lyap0), min_diss,
            -1e-10 * std::max(1.0, lyap0));
  return log.finish(cfg);
}

inline int run_gradient(const ExperimentConfig& cfg, detail::RunLog& log) {
  const auto grid = detail::make_grid(cfg);
  auto traj = evolve(make_initial(cfg.initial, grid, cfg.diffusion()), cfg.solver_config());
  FloorSpec<double> floors{cfg.effective_u_floor(), cfg.g_floor};
  auto rows = gradient_balance(traj, cfg.n(), cfg.alpha, cfg.p, floors);
  const auto name =
      "gradient_" + detail::run_tag(cfg.n(), cfg.alpha, cfg.p, cfg.cells, cfg.seed) + ".csv";
  write_diagnostics_csv(log.dir / name, rows);
  log.track(name);

  const double lyap0 = rows.front().lyapunov;
  log.check("lyapunov_monotone", detail::max_positive_jump(rows) <= 1e-8 * lyap0,
            detail::max_positive_jump(rows), 1e-8 * lyap0);
  return log.finish(cfg);
}

inline int run_directional(const ExperimentConfig& cfg, detail::RunLog& log) {
  const auto grid = detail::make_grid(cfg);
  auto traj = evolve(make_initial(cfg.initial, grid, cfg.diffusion()), cfg.solver_config());
  DirectionVector<double> xi{cfg.xi_t, {cfg.xi_x, cfg.xi_y}};
  auto rep = directional_quotient(traj, xi, cfg.eta_levels, cfg.p);

  const auto name =
      "directional_" + detail::run_tag(cfg.n(), cfg.alpha, cfg.p, cfg.cells, cfg.seed) + ".csv";
  std::ofstream csv(log.dir / name);
  csv << "t,eta,quotient\n";
  for (std::size_t it = 0; it < rep.times.size(); ++it)
    for (std::size_t j = 0; j < rep.etas.size(); ++j)
      csv << format_scalar(rep.times[it]) << ',' << format_scalar(rep.etas[j]) << ','
          << format_scalar(rep.quotients[it][j]) << '\n';
  csv.close();
  log.track(name);

  const double excess = directional_max_excess(rep);
  log.check("quotient_below_c_xi", excess <= 1e-6 * rep.c_xi, excess, 1e-6 * rep.c_xi);
  log.checks.back()["c_xi"] = rep.c_xi;
  return log.finish(cfg);
}

inline int run_gradflow(const ExperimentConfig& cfg, detail::RunLog& log) {
  const auto grid = detail::make_grid(cfg);
  auto traj = evolve(make_initial(cfg.initial, grid, cfg.diffusion()), cfg.solver_config());
  const double gamma = cfg.n() / cfg.alpha;

  const auto name =
      "gradflow_" + detail::run_tag(cfg.n(), cfg.alpha, cfg.p, cfg.cells, cfg.seed) + ".csv";
  std::ofstream csv(log.dir / name);
  csv << "t,energy\n";
  double e0 = -1, jump = 0, prev = 0;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const double e = energy_E(traj.fields[k], gamma);
    if (k == 0)
      e0 = e;
    else
      jump = std::max(jump, e - prev);
    prev = e;
    csv << format_scalar(traj.times[k]) << ',' << format_scalar(e) << '\n';
  }
  csv.close();
  log.track(name);

  const double residual = gradient_flow_residual(traj, cfg.n());
  log.check("energy_monotone", jump <= 1e-10 * e0, jump, 1e-10 * e0);
  log.check("gradient_flow_residual", residual <= 5e-2, residual, 5e-2);
  return log.finish(cfg);
}

inline int run_validate(const ExperimentConfig& cfg, detail::RunLog& log) {
  std::ofstream csv(log.dir / "validate.csv");
  csv << "check,value,threshold,pass\n";
  auto record = [&](const std::string& name, double value, double threshold, bool pass) {
    csv << name << ',' << format_scalar(value) << ',' << format_scalar(threshold) << ','
        << (pass ? "true" : "false") << '\n';
    log.check(name, pass, value, threshold);
  };

  { // heat equation: single-mode decay rate against e^{-k^2 t}
    auto g = TorusGrid<double>::make(1, 256, 6.283185307179586);
    auto prm = DiffusionParams<double>::from_m(1.0, 1);
    InitialSpec<double> s;
    s.base = 1.0;
    s.amplitude = 0.1;
    SolverConfig<double> sc{prm};
    sc.t_end = 0.5;
    sc.sample_every = 0.5;
    auto traj = evolve(make_initial(s, g, prm), sc);
    auto amp = [&](const ScalarField<double>& f) {
      double acc = 0;
      for (Eigen::Index i = 0; i < g.cells; ++i) acc += f.values[i] * std::cos(i * g.spacing());
      return 2.0 * acc * g.spacing() / g.period;
    };
    const double rate = std::log(amp(traj.fields[0]) / amp(traj.fields[1])) / sc.t_end;
    record("heat_mode_decay_rate_error", std::abs(rate - 1.0), 1e-3, std::abs(rate - 1.0) <= 1e-3);
  }

  { // PME front against the self-similar profile: L1 error halves as N doubles
    auto prm = DiffusionParams<double>::from_m(2.0, 1);
    double prev = 0;
    bool halves = true;
    double worst_ratio = 0;
    for (Eigen::Index N : {128, 256, 512}) {
      auto g = TorusGrid<double>::make(1, N, 40.0);
      InitialSpec<double> s;
      s.kind = InitialKind::Barenblatt;
      auto u0 = make_initial(s, g, prm);
      SolverConfig<double> sc{prm};
      sc.t_end = 2.0;
      sc.sample_every = 2.0;
      auto traj = evolve(u0, sc);
      const double tau = 1.0 + sc.t_end / prm.m;
      double err = 0;
      for (Eigen::Index i = 0; i < g.cells; ++i)
        err += std::abs(traj.fields.back().values[i] -
                        barenblatt_value(2.0, 1, 1.0, tau, std::abs(i * g.spacing() - 20.0)));
      err *= g.spacing();
      if (prev > 0) {
        worst_ratio = std::max(worst_ratio, err / prev);
        halves = halves && err <= 0.5 * prev;
      }
      prev = err;
    }
    record("barenblatt_l1_halving_ratio", worst_ratio, 0.5, halves);
  }

  { // mass conservation and L1 contraction on a fast-diffusion pair
    auto g = TorusGrid<double>::make(1, 256, 6.283185307179586);
    auto prm = DiffusionParams<double>::from_m(0.5, 1);
    InitialSpec<double> s1;
    s1.base = 1.0;
    s1.amplitude = 0.4;
    InitialSpec<double> s2 = s1;
    s2.phase = 1.3;
    SolverConfig<double> sc{prm};
    sc.t_end = 1.0;
    sc.sample_every = 0.05;
    auto tu = evolve(make_initial(s1, g, prm), sc);
    auto tv = evolve(make_initial(s2, g, prm), sc);

    double drift = 0;
    const double m0 = mass(tu.fields.front());
    for (const auto& f : tu.fields) drift = std::max(drift, std::abs(mass(f) - m0));
    record("mass_conservation_rel", drift / m0, 1e-10, drift <= 1e-10 * m0);

    double jump = 0, prev_l1 = 0, init = 0;
    for (std::size_t k = 0; k < tu.times.size(); ++k) {
      ScalarField<double> diff{g, tu.fields[k].values - tv.fields[k].values};
      const double l1 = integrate_lp(diff, 1.0);
      if (k == 0)
        init = l1;
      else
        jump = std::max(jump, l1 - prev_l1);
      prev_l1 = l1;
    }
    record("l1_contraction_max_jump_rel", jump / init, 1e-8, jump <= 1e-8 * init);

    // comparison principle: ordered data stay ordered
    auto v0 = make_initial(s1, g, prm);
    v0.values += 0.25;
    auto tw = evolve(v0, sc);
    double worst = -1e300;
    for (std::size_t k = 0; k < tu.times.size(); ++k)
      worst = std::max(worst, (tu.fields[k].values - tw.fields[k].values).maxCoeff());
    record("comparison_principle_excess", worst, 1e-10, worst <= 1e-10);
  }

  csv.close();
  log.track("validate.csv");
  return log.finish(cfg);
}

inline int run_sweep(const ExperimentConfig& cfg, detail::RunLog& log) {
  struct Point {
    double n, alpha, p;
  };
  std::vector<Point> points;
  for (double n : cfg.sweep_n)
    for (int i = 0; i < cfg.sweep_alpha_count; ++i)
      for (int j = 0; j < cfg.sweep_p_count; ++j) {
        const double a =
            cfg.sweep_alpha_count == 1
                ? cfg.sweep_alpha_min
                : cfg.sweep_alpha_min + (cfg.sweep_alpha_max - cfg.sweep_alpha_min) * i /
                                            double(cfg.sweep_alpha_count - 1);
        const double p = cfg.sweep_p_count == 1
                             ? cfg.sweep_p_min
                             : cfg.sweep_p_min + (cfg.sweep_p_max - cfg.sweep_p_min) * j /
                                                     double(cfg.sweep_p_count - 1);
        points.push_back({n, a, p});
      }

  // one U-space pair evolution per n, shared by all (alpha, p) points
  std::map<double, std::pair<Trajectory<double>, Trajectory<double>>> pairs;
  if (cfg.sweep_simulate) {
    if (!cfg.has_initial2)
      throw ConfigError("sweep with sweep.simulate needs initial2.* for the contraction pair");
    for (double n : cfg.sweep_n) {
      ExperimentConfig one = cfg;
      one.m = 1.0 + n;
      one.store_u = false;
      pairs.emplace(n, detail::evolve_pair(one));
    }
  }

  struct Row {
    Point pt;
    RegionClass cls;
    double min_scaled_eig, witness_w, m_eig_min;
    double max_jump, final_residual, lyap0;
    bool simulated;
  };
  std::vector<Row> rows(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= points.size()) return;
      const auto& pt = points[i];
      Row r{};
      r.pt = pt;
      r.cls = classify(pt.n, ExponentPair<double>{pt.alpha, pt.p}, cfg.tol);
      const auto rep =
          q_positivity_scan(pt.n, pt.alpha, pt.p, cfg.scan_w_min, cfg.scan_w_max, cfg.scan_steps);
      r.min_scaled_eig = rep.min_scaled_eig;
      r.witness_w = rep.witnesses.front().first;
      r.m_eig_min = rep.nu1;
      r.max_jump = std::numeric_limits<double>::quiet_NaN();
      r.final_residual = std::numeric_limits<double>::quiet_NaN();
      r.simulated = false;
      if (cfg.sweep_simulate && r.cls == RegionClass::Interior && pt.p > 1.0) {
        const auto& pr = pairs.at(pt.n);
        auto tu = pr.first.transformed_to_alpha(pt.alpha);
        auto tv = pr.second.transformed_to_alpha(pt.alpha);
        auto bal = contraction_balance(tu, tv, pt.n, pt.alpha, pt.p, cfg.effective_u_floor());
        r.max_jump = detail::max_positive_jump(bal);
        r.final_residual = bal.back().balance_residual;
        r.lyap0 = bal.front().lyapunov;
        r.simulated = true;
      }
      rows[i] = r;
    }
  };
  std::vector<std::thread> threads;
  const int nt = std::max(1, std::min<int>(cfg.workers, int(points.size())));
  threads.reserve(nt);
  for (int t = 0; t < nt; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  std::ofstream csv(log.dir / "sweep.csv");
  csv << "n,alpha,p,class,min_scaled_eig,m_eig_min,max_positive_jump,final_balance_residual\n";
  std::vector<EquivalenceRow<double>> eq;
  bool monotone_ok = true, equivalence_ok = true;
  for (const auto& r : rows) {
    csv << format_scalar(r.pt.n) << ',' << format_scalar(r.pt.alpha) << ','
        << format_scalar(r.pt.p) << ',' << to_string(r.cls) << ','
        << format_scalar(r.min_scaled_eig) << ',' << format_scalar(r.m_eig_min) << ','
        << format_scalar(r.max_jump) << ',' << format_scalar(r.final_residual) << '\n';
    eq.push_back({r.pt.n, r.pt.alpha, r.pt.p, r.cls, r.min_scaled_eig, r.witness_w});
    if (r.simulated && !(r.max_jump <= 1e-8 * r.lyap0)) monotone_ok = false;
    if (r.cls == RegionClass::Interior && r.min_scaled_eig < -1e-10) equivalence_ok = false;
    if (r.cls == RegionClass::Outside && r.pt.p > 1.0 + cfg.tol && r.pt.alpha <= 1.0 &&
        r.min_scaled_eig > -1e-8)
      equivalence_ok = false;
  }
  csv.close();
  log.track("sweep.csv");
  write_equivalence_csv(log.dir / "equivalence.csv", eq);
  log.track("equivalence.csv");
  log.check("sweep_monotonicity", monotone_ok, monotone_ok ? 1.0 : 0.0, 1.0);
  log.check("sweep_region_equivalence", equivalence_ok, equivalence_ok ? 1.0 : 0.0, 1.0);
  return log.finish(cfg);
}

// Dispatch a validated configuration. Throws ConfigError (exit 2) and
// InstabilityError (exit 3); returns 0 or 4 (check failure).
inline int run(const ExperimentConfig& cfg) {
  validate_config(cfg);
  detail::RunLog log(cfg.out_dir);
  switch (cfg.scenario) {
    case Scenario::Region: return run_region(cfg, log);
    case Scenario::Matrices: return run_matrices(cfg, log);
    case Scenario::Simulate: return run_simulate(cfg, log);
    case Scenario::Contract: return run_contract(cfg, log);
    case Scenario::Gradient: return run_gradient(cfg, log);
    case Scenario::Directional: return run_directional(cfg, log);
    case Scenario::Gradflow: return run_gradflow(cfg, log);
    case Scenario::Sweep: return run_sweep(cfg, log);
    case Scenario::Validate: return run_validate(cfg, log);
  }
  throw ConfigError("unknown scenario");
}

} // namespace pmlab
