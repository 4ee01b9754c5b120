#pragma once

// Explicit adaptive time integration of m U_t = Lap(U^m) on the torus,
// with the epsilon-lift for strictly positive runs, initial-data
// constructors, and the closed-form self-similar source solution used as
// a validation oracle.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pmlab/exponents.hpp"
#include "pmlab/grid.hpp"

namespace pmlab {

struct InstabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class SolveVariable { U, UAlpha };

template <typename Scalar = double>
struct SolverConfig {
  DiffusionParams<Scalar> params;
  Scalar cfl_fraction{Scalar(0.4)}; // in (0, 1)
  Scalar t_end{Scalar(1)};
  Scalar sample_every{Scalar(0.05)}; // diagnostic cadence
  Scalar epsilon_floor{Scalar(0)};   // lift added to U0
  SolveVariable variable{SolveVariable::U};
  Scalar alpha{Scalar(1)}; // snapshot exponent when variable == UAlpha

  void validate() const {
    if (!(cfl_fraction > Scalar(0)) || !(cfl_fraction < Scalar(1)))
      throw std::invalid_argument("SolverConfig: cfl_fraction must lie in (0,1)");
    if (!(t_end >= Scalar(0))) throw std::invalid_argument("SolverConfig: t_end must be >= 0");
    if (!(sample_every > Scalar(0)))
      throw std::invalid_argument("SolverConfig: sample_every must be > 0");
    if (!(epsilon_floor >= Scalar(0)))
      throw std::invalid_argument("SolverConfig: epsilon_floor must be >= 0");
    if (variable == SolveVariable::UAlpha && !(alpha > Scalar(0) && alpha <= Scalar(1)))
      throw std::invalid_argument("SolverConfig: snapshot alpha must lie in (0,1]");
  }
};

template <typename Scalar = double>
struct Trajectory {
  std::vector<Scalar> times; // strictly increasing
  std::vector<ScalarField<Scalar>> fields;
  SolverConfig<Scalar> config;

  const TorusGrid<Scalar>& grid() const { return fields.front().grid; }

  // Re-expresses the stored snapshots as u = U^alpha.
  Trajectory transformed_to_alpha(Scalar alpha) const {
    Trajectory out;
    out.times = times;
    out.config = config;
    out.config.variable = SolveVariable::UAlpha;
    out.config.alpha = alpha;
    const Scalar stored = config.variable == SolveVariable::UAlpha ? config.alpha : Scalar(1);
    out.fields.reserve(fields.size());
    for (const auto& f : fields) out.fields.push_back(pow_field(f, alpha / stored));
    return out;
  }
};

// dt = cfl * h^2 / (2 d max U^{m-1}); for m < 1 the max sits at min U.
template <typename Scalar>
Scalar stable_dt(const ScalarField<Scalar>& U, const DiffusionParams<Scalar>& params,
                 Scalar cfl_fraction) {
  const Scalar h = U.grid.spacing();
  const Scalar base = cfl_fraction * h * h / (Scalar(2) * U.grid.dim);
  const Scalar m = params.m;
  if (m == Scalar(1)) return base;
  Scalar max_diffusivity;
  if (m > Scalar(1)) {
    const Scalar umax = U.values.maxCoeff();
    if (!(umax > Scalar(0))) return base; // identically zero field stays zero
    max_diffusivity = std::pow(umax, m - Scalar(1));
  } else {
    const Scalar umin = U.values.minCoeff();
    if (!(umin > Scalar(0)))
      throw std::invalid_argument("stable_dt: m < 1 requires a strictly positive field");
    max_diffusivity = std::pow(umin, m - Scalar(1));
  }
  return base / max_diffusivity;
}

namespace detail {
template <typename Scalar>
FieldArray<Scalar> pow_m(const FieldArray<Scalar>& v, Scalar m) {
  if (m == Scalar(1)) return v;
  if (m == Scalar(2)) return v.square();
  return v.pow(m);
}
} // namespace detail

// One explicit Euler step U + (dt/m) Lap(U^m). Mass is conserved by the
// telescoping stencil; negativity beyond -1e-13 or non-finite values abort.
template <typename Scalar>
ScalarField<Scalar> step(const ScalarField<Scalar>& U, Scalar dt,
                         const DiffusionParams<Scalar>& params) {
  ScalarField<Scalar> W{U.grid, detail::pow_m(U.values, params.m), U.nonnegative};
  ScalarField<Scalar> out = laplacian(W);
  out.values = U.values + (dt / params.m) * out.values;
  out.nonnegative = U.nonnegative;
  if (!out.values.allFinite()) throw InstabilityError("step: non-finite value");
  if (out.values.minCoeff() < Scalar(-1e-13))
    throw InstabilityError("step: negativity detected (unstable time step?)");
  return out;
}

// Adaptive explicit stepping to t_end with snapshots at the exact sample
// cadence (shortened final steps, no interpolation).
template <typename Scalar>
Trajectory<Scalar> evolve(const ScalarField<Scalar>& U0, const SolverConfig<Scalar>& config) {
  config.validate();
  if (U0.values.minCoeff() < Scalar(0))
    throw std::invalid_argument("evolve: initial data must be nonnegative");
  if (config.epsilon_floor > Scalar(0) && !(config.epsilon_floor < U0.values.maxCoeff()))
    throw std::invalid_argument("evolve: epsilon_floor must be below the initial max");

  ScalarField<Scalar> U = U0;
  U.values += config.epsilon_floor;
  U.nonnegative = true;

  Trajectory<Scalar> traj;
  traj.config = config;
  auto snapshot = [&](Scalar t) {
    traj.times.push_back(t);
    traj.fields.push_back(config.variable == SolveVariable::UAlpha ? pow_field(U, config.alpha)
                                                                   : U);
  };
  snapshot(Scalar(0));
  if (config.t_end == Scalar(0)) return traj;

  Scalar t = 0;
  long k = 1;
  Scalar next = std::min(config.sample_every, config.t_end);
  while (t < config.t_end) {
    const Scalar dt = std::min(stable_dt(U, config.params, config.cfl_fraction), next - t);
    U = step(U, dt, config.params);
    t += dt;
    if (t >= next - Scalar(1e-12) * std::max(Scalar(1), next)) {
      t = next;
      snapshot(t);
      if (next >= config.t_end) break;
      ++k;
      next = std::min(Scalar(k) * config.sample_every, config.t_end);
    }
  }
  return traj;
}

// Self-similar source solution of u_t = Lap(u^m) (m > 1) in d dimensions:
//   B(tau, r) = tau^{-d beta} (C - kappa r^2 tau^{-2 beta})_+^{1/(m-1)},
//   beta = 1/(d(m-1)+2), kappa = (m-1) beta / (2m).
// Our normalization m U_t = Lap(U^m) is the same flow with tau = t0 + t/m.
template <typename Scalar>
Scalar barenblatt_value(Scalar m, int d, Scalar C, Scalar tau, Scalar r) {
  if (!(m > Scalar(1))) throw std::invalid_argument("barenblatt_value: requires m > 1");
  if (!(tau > Scalar(0))) throw std::invalid_argument("barenblatt_value: requires tau > 0");
  const Scalar beta = Scalar(1) / (Scalar(d) * (m - Scalar(1)) + Scalar(2));
  const Scalar kappa = (m - Scalar(1)) * beta / (Scalar(2) * m);
  const Scalar core = C - kappa * r * r * std::pow(tau, Scalar(-2) * beta);
  if (core <= Scalar(0)) return Scalar(0);
  return std::pow(tau, -Scalar(d) * beta) * std::pow(core, Scalar(1) / (m - Scalar(1)));
}

enum class InitialKind { ConstantPlusCosine, Gaussian, Bump, Barenblatt };

template <typename Scalar = double>
struct InitialSpec {
  InitialKind kind{InitialKind::ConstantPlusCosine};
  Scalar base{Scalar(1)};      // cosine offset / additive floor for the others
  Scalar amplitude{Scalar(0)}; // cosine, gaussian and bump height
  Scalar phase{Scalar(0)};
  int mode{1};
  Scalar center{Scalar(-1)}; // < 0 means the torus midpoint
  Scalar width{Scalar(1)};   // gaussian std deviation
  Scalar radius{Scalar(1)};  // bump support radius
  Scalar t0{Scalar(1)};      // barenblatt profile age (standard time)
  Scalar C{Scalar(1)};       // barenblatt height constant
};

namespace detail {
// minimum-image distance to the center on the torus
template <typename Scalar>
Scalar torus_r2(const TorusGrid<Scalar>& g, Scalar cx, Scalar cy, Scalar x, Scalar y) {
  auto d1 = [&](Scalar a, Scalar c) {
    Scalar d = std::fmod(a - c, g.period);
    if (d < -g.period / 2) d += g.period;
    if (d >= g.period / 2) d -= g.period;
    return d;
  };
  const Scalar dx = d1(x, cx);
  if (g.dim == 1) return dx * dx;
  const Scalar dy = d1(y, cy);
  return dx * dx + dy * dy;
}
} // namespace detail

template <typename Scalar>
ScalarField<Scalar> make_initial_impl(const InitialSpec<Scalar>& spec, const TorusGrid<Scalar>& grid,
                                      const DiffusionParams<Scalar>& params) {
  const Scalar L = grid.period;
  const Scalar c = spec.center < Scalar(0) ? L / Scalar(2) : spec.center;
  const Scalar k = Scalar(2) * Scalar(EIGEN_PI) * spec.mode / L;
  switch (spec.kind) {
    case InitialKind::ConstantPlusCosine: {
      if (!(std::abs(spec.amplitude) < spec.base))
        throw std::invalid_argument("make_initial: |amplitude| must be < base for positivity");
      if (grid.dim == 1)
        return sample(grid, [&](Scalar x) { return spec.base + spec.amplitude * std::cos(k * x + spec.phase); });
      return sample(grid, [&](Scalar x, Scalar y) {
        return spec.base + spec.amplitude * std::cos(k * x + spec.phase) * std::cos(k * y);
      });
    }
    case InitialKind::Gaussian: {
      if (!(spec.width > Scalar(0))) throw std::invalid_argument("make_initial: width must be > 0");
      if (spec.amplitude < Scalar(0) || spec.base < Scalar(0))
        throw std::invalid_argument("make_initial: gaussian needs amplitude, base >= 0");
      auto val = [&](Scalar r2) {
        return spec.base + spec.amplitude * std::exp(-r2 / (Scalar(2) * spec.width * spec.width));
      };
      if (grid.dim == 1)
        return sample(grid, [&](Scalar x) { return val(detail::torus_r2(grid, c, c, x, Scalar(0))); });
      return sample(grid, [&](Scalar x, Scalar y) { return val(detail::torus_r2(grid, c, c, x, y)); });
    }
    case InitialKind::Bump: {
      if (!(spec.radius > Scalar(0)) || !(spec.radius < L / Scalar(2)))
        throw std::invalid_argument("make_initial: bump radius must lie in (0, L/2)");
      if (spec.amplitude < Scalar(0) || spec.base < Scalar(0))
        throw std::invalid_argument("make_initial: bump needs amplitude, base >= 0");
      auto val = [&](Scalar r2) {
        const Scalar s = r2 / (spec.radius * spec.radius);
        if (s >= Scalar(1)) return spec.base;
        return spec.base + spec.amplitude * std::exp(Scalar(1) - Scalar(1) / (Scalar(1) - s));
      };
      if (grid.dim == 1)
        return sample(grid, [&](Scalar x) { return val(detail::torus_r2(grid, c, c, x, Scalar(0))); });
      return sample(grid, [&](Scalar x, Scalar y) { return val(detail::torus_r2(grid, c, c, x, y)); });
    }
    case InitialKind::Barenblatt: {
      if (!(spec.t0 > Scalar(0)) || !(spec.C > Scalar(0)))
        throw std::invalid_argument("make_initial: barenblatt needs t0 > 0 and C > 0");
      const Scalar m = params.m;
      if (grid.dim == 1)
        return sample(grid, [&](Scalar x) {
          return barenblatt_value(m, 1, spec.C, spec.t0,
                                  std::sqrt(detail::torus_r2(grid, c, c, x, Scalar(0))));
        });
      return sample(grid, [&](Scalar x, Scalar y) {
        return barenblatt_value(m, 2, spec.C, spec.t0,
                                std::sqrt(detail::torus_r2(grid, c, c, x, y)));
      });
    }
  }
  throw std::invalid_argument("make_initial: unknown kind");
}

template <typename Scalar>
ScalarField<Scalar> make_initial(const InitialSpec<Scalar>& spec, const TorusGrid<Scalar>& grid,
                                 const DiffusionParams<Scalar>& params) {
  auto f = make_initial_impl(spec, grid, params);
  f.nonnegative = true;
  return f;
}

} // namespace pmlab
