#pragma once

// Experiment configuration: the documented line-oriented `key = value`
// format with dotted section keys, full validation with line-numbered
// errors, and a canonical serialization that round-trips.

#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmlab/exponents.hpp"
#include "pmlab/solver.hpp"

namespace pmlab {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Scenario {
  Region,
  Matrices,
  Simulate,
  Contract,
  Gradient,
  Directional,
  Gradflow,
  Sweep,
  Validate
};

inline const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::Region: return "region";
    case Scenario::Matrices: return "matrices";
    case Scenario::Simulate: return "simulate";
    case Scenario::Contract: return "contract";
    case Scenario::Gradient: return "gradient";
    case Scenario::Directional: return "directional";
    case Scenario::Gradflow: return "gradflow";
    case Scenario::Sweep: return "sweep";
    case Scenario::Validate: return "validate";
  }
  return "?";
}

inline Scenario scenario_from_string(const std::string& s) {
  if (s == "region") return Scenario::Region;
  if (s == "matrices") return Scenario::Matrices;
  if (s == "simulate") return Scenario::Simulate;
  if (s == "contract") return Scenario::Contract;
  if (s == "gradient") return Scenario::Gradient;
  if (s == "directional") return Scenario::Directional;
  if (s == "gradflow") return Scenario::Gradflow;
  if (s == "sweep") return Scenario::Sweep;
  if (s == "validate") return Scenario::Validate;
  throw ConfigError("unknown scenario '" + s + "'");
}

struct ExperimentConfig {
  Scenario scenario{Scenario::Simulate};
  bool scenario_set{false};
  std::uint64_t seed{0};
  std::string out_dir{"out"};
  int workers{1};

  double m{1.0};
  int dim{1};
  Eigen::Index cells{256};
  double period{6.283185307179586};

  double alpha{1.0};
  double p{2.0};

  double cfl{0.4};
  double t_end{1.0};
  double sample_every{0.05};
  double epsilon{0.0};
  bool store_u{true}; // snapshots in u = U^alpha (else U)

  InitialSpec<double> initial{};
  InitialSpec<double> initial2{};
  bool has_initial2{false};

  int region_alpha_steps{64};
  double region_p_max{6.0};
  int region_p_steps{64};
  double tol{1e-9};

  double scan_w_min{1e-3};
  double scan_w_max{1.0};
  int scan_steps{2000};
  int scan_samples{0};

  double xi_t{0.0};
  Eigen::Index xi_x{1};
  Eigen::Index xi_y{0};
  int eta_levels{3};

  std::vector<double> sweep_n{};
  double sweep_alpha_min{0.55};
  double sweep_alpha_max{0.95};
  int sweep_alpha_count{5};
  double sweep_p_min{1.5};
  double sweep_p_max{3.5};
  int sweep_p_count{5};
  bool sweep_simulate{true};

  double u_floor{-1.0}; // < 0: 10 * epsilon
  double g_floor{-1.0}; // < 0: 1e-8 * max |grad u(0)|

  double n() const { return m - 1.0; }
  DiffusionParams<double> diffusion() const { return DiffusionParams<double>::from_m(m, dim); }

  SolverConfig<double> solver_config() const {
    SolverConfig<double> cfg{diffusion()};
    cfg.cfl_fraction = cfl;
    cfg.t_end = t_end;
    cfg.sample_every = sample_every;
    cfg.epsilon_floor = epsilon;
    cfg.variable = store_u ? SolveVariable::UAlpha : SolveVariable::U;
    cfg.alpha = store_u ? alpha : 1.0;
    return cfg;
  }

  double effective_u_floor() const { return u_floor >= 0 ? u_floor : 10.0 * epsilon; }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

struct KeyValue {
  std::string value;
  int line;
};

inline double parse_double(const KeyValue& kv, const std::string& key) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(kv.value, &pos);
  } catch (...) {
    throw ConfigError("line " + std::to_string(kv.line) + ": value for '" + key +
                      "' is not a number: '" + kv.value + "'");
  }
  if (pos != kv.value.size())
    throw ConfigError("line " + std::to_string(kv.line) + ": trailing junk in value for '" + key +
                      "'");
  return v;
}

inline long parse_int(const KeyValue& kv, const std::string& key) {
  const double v = parse_double(kv, key);
  const long r = static_cast<long>(v);
  if (double(r) != v)
    throw ConfigError("line " + std::to_string(kv.line) + ": '" + key + "' must be an integer");
  return r;
}

inline bool parse_bool(const KeyValue& kv, const std::string& key) {
  if (kv.value == "true" || kv.value == "1") return true;
  if (kv.value == "false" || kv.value == "0") return false;
  throw ConfigError("line " + std::to_string(kv.line) + ": '" + key + "' must be true or false");
}

inline InitialKind parse_kind(const KeyValue& kv, const std::string& key) {
  if (kv.value == "cosine") return InitialKind::ConstantPlusCosine;
  if (kv.value == "gaussian") return InitialKind::Gaussian;
  if (kv.value == "bump") return InitialKind::Bump;
  if (kv.value == "barenblatt") return InitialKind::Barenblatt;
  throw ConfigError("line " + std::to_string(kv.line) + ": '" + key +
                    "' must be one of cosine|gaussian|bump|barenblatt");
}

inline bool apply_initial_key(InitialSpec<double>& spec, const std::string& field,
                              const KeyValue& kv, const std::string& key) {
  if (field == "kind")
    spec.kind = parse_kind(kv, key);
  else if (field == "base")
    spec.base = parse_double(kv, key);
  else if (field == "amplitude")
    spec.amplitude = parse_double(kv, key);
  else if (field == "phase")
    spec.phase = parse_double(kv, key);
  else if (field == "mode")
    spec.mode = int(parse_int(kv, key));
  else if (field == "center")
    spec.center = parse_double(kv, key);
  else if (field == "width")
    spec.width = parse_double(kv, key);
  else if (field == "radius")
    spec.radius = parse_double(kv, key);
  else if (field == "t0")
    spec.t0 = parse_double(kv, key);
  else if (field == "c")
    spec.C = parse_double(kv, key);
  else
    return false;
  return true;
}

} // namespace detail

// Parses the line-oriented config format:
//   - one `key = value` per line, '#' starts a comment
//   - dotted section keys (diffusion.m, grid.cells, initial.kind, ...)
//   - unknown keys and malformed values are errors with line numbers
ExperimentConfig inline parse_config(const std::string& text) {
  std::map<std::string, detail::KeyValue> kvs;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  bool any = false;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    std::string line = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
    if (kvs.count(key))
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    kvs[key] = {value, lineno};
    any = true;
  }
  if (!any) throw ConfigError("empty config");

  ExperimentConfig cfg;
  for (const auto& [key, kv] : kvs) {
    using detail::parse_bool;
    using detail::parse_double;
    using detail::parse_int;
    auto err = [&](const std::string& msg) {
      throw ConfigError("line " + std::to_string(kv.line) + ": " + msg);
    };
    if (key == "scenario") {
      try {
        cfg.scenario = scenario_from_string(kv.value);
      } catch (const ConfigError& e) {
        err(e.what());
      }
      cfg.scenario_set = true;
    } else if (key == "seed") {
      const long s = parse_int(kv, key);
      if (s < 0) err("seed must be >= 0");
      cfg.seed = std::uint64_t(s);
    } else if (key == "out") {
      cfg.out_dir = kv.value;
    } else if (key == "workers") {
      const long w = parse_int(kv, key);
      if (w < 1) err("workers must be >= 1");
      cfg.workers = int(w);
    } else if (key == "diffusion.m") {
      cfg.m = parse_double(kv, key);
      if (!(cfg.m > 0)) err("diffusion.m must be > 0");
    } else if (key == "grid.dim") {
      const long d = parse_int(kv, key);
      if (d != 1 && d != 2) err("grid.dim must be 1 or 2");
      cfg.dim = int(d);
    } else if (key == "grid.cells") {
      const long c = parse_int(kv, key);
      if (c < 8) err("grid.cells must be >= 8");
      cfg.cells = c;
    } else if (key == "grid.period") {
      cfg.period = parse_double(kv, key);
      if (!(cfg.period > 0)) err("grid.period must be > 0");
    } else if (key == "exponents.alpha") {
      cfg.alpha = parse_double(kv, key);
      if (!(cfg.alpha > 0 && cfg.alpha <= 1)) err("exponents.alpha must lie in (0,1]");
    } else if (key == "exponents.p") {
      cfg.p = parse_double(kv, key);
      if (!(cfg.p >= 1)) err("exponents.p must be >= 1");
    } else if (key == "solver.cfl") {
      cfg.cfl = parse_double(kv, key);
      if (!(cfg.cfl > 0 && cfg.cfl < 1)) err("solver.cfl must lie in (0,1)");
    } else if (key == "solver.t_end") {
      cfg.t_end = parse_double(kv, key);
      if (!(cfg.t_end >= 0)) err("solver.t_end must be >= 0");
    } else if (key == "solver.sample_every") {
      cfg.sample_every = parse_double(kv, key);
      if (!(cfg.sample_every > 0)) err("solver.sample_every must be > 0");
    } else if (key == "solver.epsilon") {
      cfg.epsilon = parse_double(kv, key);
      if (!(cfg.epsilon >= 0)) err("solver.epsilon must be >= 0");
    } else if (key == "solver.variable") {
      if (kv.value == "u")
        cfg.store_u = true;
      else if (kv.value == "U")
        cfg.store_u = false;
      else
        err("solver.variable must be 'u' or 'U'");
    } else if (key.rfind("initial.", 0) == 0) {
      if (!detail::apply_initial_key(cfg.initial, key.substr(8), kv, key))
        err("unknown key '" + key + "'");
    } else if (key.rfind("initial2.", 0) == 0) {
      if (!detail::apply_initial_key(cfg.initial2, key.substr(9), kv, key))
        err("unknown key '" + key + "'");
      cfg.has_initial2 = true;
    } else if (key == "region.alpha_steps") {
      cfg.region_alpha_steps = int(parse_int(kv, key));
      if (cfg.region_alpha_steps < 2) err("region.alpha_steps must be >= 2");
    } else if (key == "region.p_max") {
      cfg.region_p_max = parse_double(kv, key);
      if (!(cfg.region_p_max >= 1)) err("region.p_max must be >= 1");
    } else if (key == "region.p_steps") {
      cfg.region_p_steps = int(parse_int(kv, key));
      if (cfg.region_p_steps < 2) err("region.p_steps must be >= 2");
    } else if (key == "region.tol") {
      cfg.tol = parse_double(kv, key);
      if (!(cfg.tol > 0)) err("region.tol must be > 0");
    } else if (key == "scan.w_min") {
      cfg.scan_w_min = parse_double(kv, key);
      if (!(cfg.scan_w_min > 0)) err("scan.w_min must be > 0");
    } else if (key == "scan.w_max") {
      cfg.scan_w_max = parse_double(kv, key);
    } else if (key == "scan.steps") {
      cfg.scan_steps = int(parse_int(kv, key));
      if (cfg.scan_steps < 1) err("scan.steps must be >= 1");
    } else if (key == "scan.samples") {
      cfg.scan_samples = int(parse_int(kv, key));
      if (cfg.scan_samples < 0) err("scan.samples must be >= 0");
    } else if (key == "directional.xi_t") {
      cfg.xi_t = parse_double(kv, key);
    } else if (key == "directional.xi_x") {
      cfg.xi_x = parse_int(kv, key);
    } else if (key == "directional.xi_y") {
      cfg.xi_y = parse_int(kv, key);
    } else if (key == "directional.eta_levels") {
      cfg.eta_levels = int(parse_int(kv, key));
      if (cfg.eta_levels < 1) err("directional.eta_levels must be >= 1");
    } else if (key == "sweep.n") {
      std::istringstream vs(kv.value);
      std::string tok;
      cfg.sweep_n.clear();
      while (std::getline(vs, tok, ',')) {
        try {
          cfg.sweep_n.push_back(std::stod(detail::trim(tok)));
        } catch (...) {
          err("sweep.n must be a comma-separated list of numbers");
        }
      }
      if (cfg.sweep_n.empty()) err("sweep.n must be nonempty");
    } else if (key == "sweep.alpha_min") {
      cfg.sweep_alpha_min = parse_double(kv, key);
    } else if (key == "sweep.alpha_max") {
      cfg.sweep_alpha_max = parse_double(kv, key);
    } else if (key == "sweep.alpha_count") {
      cfg.sweep_alpha_count = int(parse_int(kv, key));
      if (cfg.sweep_alpha_count < 1) err("sweep.alpha_count must be >= 1");
    } else if (key == "sweep.p_min") {
      cfg.sweep_p_min = parse_double(kv, key);
    } else if (key == "sweep.p_max") {
      cfg.sweep_p_max = parse_double(kv, key);
    } else if (key == "sweep.p_count") {
      cfg.sweep_p_count = int(parse_int(kv, key));
      if (cfg.sweep_p_count < 1) err("sweep.p_count must be >= 1");
    } else if (key == "sweep.simulate") {
      cfg.sweep_simulate = parse_bool(kv, key);
    } else if (key == "masks.u_floor") {
      cfg.u_floor = parse_double(kv, key);
    } else if (key == "masks.g_floor") {
      cfg.g_floor = parse_double(kv, key);
    } else {
      err("unknown key '" + key + "'");
    }
  }

  if (!(cfg.scan_w_min <= cfg.scan_w_max))
    throw ConfigError("scan.w_min must be <= scan.w_max");
  return cfg;
}

// Cross-field validation once the scenario is fixed.
inline void validate_config(const ExperimentConfig& cfg) {
  const double n = cfg.n();
  auto require_region_n = [&]() {
    if (!(std::abs(n) < 1))
      throw ConfigError("scenario '" + std::string(to_string(cfg.scenario)) +
                        "' requires |m - 1| < 1");
  };
  switch (cfg.scenario) {
    case Scenario::Region:
    case Scenario::Matrices:
      require_region_n();
      break;
    case Scenario::Contract:
      if (!cfg.has_initial2)
        throw ConfigError("scenario 'contract' needs a second initial datum (initial2.*)");
      [[fallthrough]];
    case Scenario::Gradient:
    case Scenario::Directional: {
      require_region_n();
      if (n != 0.0 && cfg.alpha < std::abs(n))
        throw ConfigError("inconsistent exponents: alpha < |n| lies outside the admissible set");
      if (n == 0.0 && cfg.alpha * cfg.p < 1.0)
        throw ConfigError("inconsistent exponents: alpha*p < 1 lies outside the admissible set");
      break;
    }
    case Scenario::Gradflow: {
      require_region_n();
      const double want = 1.0 + n / 2.0;
      if (std::abs(cfg.alpha - want) > 1e-12)
        throw ConfigError("gradflow requires exponents.alpha = 1 + n/2");
      if (cfg.p != 2.0) throw ConfigError("gradflow requires exponents.p = 2");
      if (n < -2.0 / 3.0 - 1e-12 || n > 1e-12)
        throw ConfigError("gradflow requires n in [-2/3, 0]");
      break;
    }
    case Scenario::Sweep:
      if (cfg.sweep_n.empty())
        throw ConfigError("sweep needs sweep.n");
      for (double sn : cfg.sweep_n)
        if (!(std::abs(sn) < 1)) throw ConfigError("sweep.n entries must satisfy |n| < 1");
      if (!(cfg.sweep_alpha_min <= cfg.sweep_alpha_max) ||
          !(cfg.sweep_p_min <= cfg.sweep_p_max))
        throw ConfigError("sweep ranges must be ordered");
      break;
    case Scenario::Simulate:
    case Scenario::Validate:
      break;
  }
}

// Canonical echo; parse_config(serialize_config(c)) reproduces c.
inline std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << "scenario = " << to_string(cfg.scenario) << '\n';
  out << "seed = " << cfg.seed << '\n';
  out << "out = " << cfg.out_dir << '\n';
  out << "workers = " << cfg.workers << '\n';
  out << "diffusion.m = " << num(cfg.m) << '\n';
  out << "grid.dim = " << cfg.dim << '\n';
  out << "grid.cells = " << cfg.cells << '\n';
  out << "grid.period = " << num(cfg.period) << '\n';
  out << "exponents.alpha = " << num(cfg.alpha) << '\n';
  out << "exponents.p = " << num(cfg.p) << '\n';
  out << "solver.cfl = " << num(cfg.cfl) << '\n';
  out << "solver.t_end = " << num(cfg.t_end) << '\n';
  out << "solver.sample_every = " << num(cfg.sample_every) << '\n';
  out << "solver.epsilon = " << num(cfg.epsilon) << '\n';
  out << "solver.variable = " << (cfg.store_u ? "u" : "U") << '\n';
  auto emit_initial = [&](const char* prefix, const InitialSpec<double>& s) {
    const char* kind = s.kind == InitialKind::ConstantPlusCosine ? "cosine"
                       : s.kind == InitialKind::Gaussian          ? "gaussian"
                       : s.kind == InitialKind::Bump              ? "bump"
                                                                  : "barenblatt";
    out << prefix << ".kind = " << kind << '\n';
    out << prefix << ".base = " << num(s.base) << '\n';
    out << prefix << ".amplitude = " << num(s.amplitude) << '\n';
    out << prefix << ".phase = " << num(s.phase) << '\n';
    out << prefix << ".mode = " << s.mode << '\n';
    out << prefix << ".center = " << num(s.center) << '\n';
    out << prefix << ".width = " << num(s.width) << '\n';
    out << prefix << ".radius = " << num(s.radius) << '\n';
    out << prefix << ".t0 = " << num(s.t0) << '\n';
    out << prefix << ".c = " << num(s.C) << '\n';
  };
  emit_initial("initial", cfg.initial);
  if (cfg.has_initial2) emit_initial("initial2", cfg.initial2);
  out << "region.alpha_steps = " << cfg.region_alpha_steps << '\n';
  out << "region.p_max = " << num(cfg.region_p_max) << '\n';
  out << "region.p_steps = " << cfg.region_p_steps << '\n';
  out << "region.tol = " << num(cfg.tol) << '\n';
  out << "scan.w_min = " << num(cfg.scan_w_min) << '\n';
  out << "scan.w_max = " << num(cfg.scan_w_max) << '\n';
  out << "scan.steps = " << cfg.scan_steps << '\n';
  out << "scan.samples = " << cfg.scan_samples << '\n';
  out << "directional.xi_t = " << num(cfg.xi_t) << '\n';
  out << "directional.xi_x = " << cfg.xi_x << '\n';
  out << "directional.xi_y = " << cfg.xi_y << '\n';
  out << "directional.eta_levels = " << cfg.eta_levels << '\n';
  if (!cfg.sweep_n.empty()) {
    out << "sweep.n = ";
    for (std::size_t i = 0; i < cfg.sweep_n.size(); ++i)
      out << (i ? "," : "") << num(cfg.sweep_n[i]);
    out << '\n';
  }
  out << "sweep.alpha_min = " << num(cfg.sweep_alpha_min) << '\n';
  out << "sweep.alpha_max = " << num(cfg.sweep_alpha_max) << '\n';
  out << "sweep.alpha_count = " << cfg.sweep_alpha_count << '\n';
  out << "sweep.p_min = " << num(cfg.sweep_p_min) << '\n';
  out << "sweep.p_max = " << num(cfg.sweep_p_max) << '\n';
  out << "sweep.p_count = " << cfg.sweep_p_count << '\n';
  out << "sweep.simulate = " << (cfg.sweep_simulate ? "true" : "false") << '\n';
  out << "masks.u_floor = " << num(cfg.u_floor) << '\n';
  out << "masks.g_floor = " << num(cfg.g_floor) << '\n';
  return out.str();
}

} // namespace pmlab
