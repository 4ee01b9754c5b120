#pragma once

// Lyapunov functionals over trajectories and their dissipation/balance
// diagnostics: the positive-part contraction integral, the gradient
// functional, directional difference quotients, the regularized power
// Psi_{delta,p}, and the energy E(u) with its L^2 variational derivative.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "pmlab/grid.hpp"
#include "pmlab/quadform.hpp"
#include "pmlab/solver.hpp"

namespace pmlab {

// Psi_{delta,p}(w) = { w^p/p - delta^{p-1} w - delta^p (1/p - 1) } 1_{w > delta},
// the C^1 regularization of w_+^p / p.
template <typename Scalar>
Scalar psi_delta(Scalar delta, Scalar p, Scalar w) {
  if (!(delta >= Scalar(0))) throw std::invalid_argument("psi_delta: delta must be >= 0");
  if (!(p > Scalar(1))) throw std::invalid_argument("psi_delta: p must be > 1");
  if (!(w > delta)) return Scalar(0);
  return std::pow(w, p) / p - std::pow(delta, p - 1) * w -
         std::pow(delta, p) * (Scalar(1) / p - Scalar(1));
}

template <typename Scalar>
struct DiagnosticsRow {
  Scalar t;
  Scalar lyapunov;
  Scalar dissipation;
  Scalar cumulative_dissipation; // trapezoidal in t
  Scalar balance_residual;       // lyapunov(t) + p*cumulative(t) - lyapunov(0)
};

namespace detail {
template <typename Scalar>
void require_same_grid(const ScalarField<Scalar>& a, const ScalarField<Scalar>& b,
                       const char* who) {
  if (!(a.grid == b.grid)) throw std::invalid_argument(std::string(who) + ": grid mismatch");
}

template <typename Scalar>
void require_synchronized(const Trajectory<Scalar>& a, const Trajectory<Scalar>& b) {
  if (a.times.size() != b.times.size())
    throw std::invalid_argument("balance: trajectories have different sample counts");
  for (std::size_t k = 0; k < a.times.size(); ++k)
    if (std::abs(a.times[k] - b.times[k]) > Scalar(1e-12) * std::max(Scalar(1), a.times[k]))
      throw std::invalid_argument("balance: trajectories are not synchronized");
  require_same_grid(a.fields.front(), b.fields.front(), "balance");
}
} // namespace detail

// int (v - u)_+^p dx
template <typename Scalar>
Scalar contraction_functional(const ScalarField<Scalar>& v, const ScalarField<Scalar>& u,
                              Scalar p) {
  detail::require_same_grid(v, u, "contraction_functional");
  const Scalar h = v.grid.spacing();
  const Scalar hd = v.grid.dim == 1 ? h : h * h;
  return hd * (v.values - u.values).max(Scalar(0)).pow(p).sum();
}

// int_{v-u>0, u>u_floor} e[v,u] dx with centered-difference gradients.
// For p < 2 the singular weight |v-u|^{p-2} is additionally fenced by
// v - u > 1e-12 * max v.
template <typename Scalar>
Scalar dissipation_integral(const ScalarField<Scalar>& v, const ScalarField<Scalar>& u, Scalar n,
                            Scalar alpha, Scalar p, Scalar u_floor) {
  detail::require_same_grid(v, u, "dissipation_integral");
  const auto gv = gradient(v);
  const auto gu = gradient(u);
  const Scalar h = v.grid.spacing();
  const Scalar hd = v.grid.dim == 1 ? h : h * h;
  const Scalar dmask =
      p < Scalar(2) ? Scalar(1e-12) * v.values.maxCoeff() : Scalar(0);
  const bool two_d = v.grid.dim == 2;
  Scalar acc = 0;
  for (Eigen::Index i = 0; i < v.values.size(); ++i) {
    const Scalar vi = v.values[i], ui = u.values[i];
    const Scalar d = vi - ui;
    if (!(d > dmask) || !(ui > u_floor) || !(ui > Scalar(0))) continue;
    const auto q = q_matrix(n, alpha, p, vi, ui);
    const Scalar gvx = gv.comp[0][i], gux = gu.comp[0][i];
    Scalar xx = gvx * gvx, xy = gvx * gux, yy = gux * gux;
    if (two_d) {
      const Scalar gvy = gv.comp[1][i], guy = gu.comp[1][i];
      xx += gvy * gvy;
      xy += gvy * guy;
      yy += guy * guy;
    }
    acc += std::pow(d, p - Scalar(2)) * q.quad_dots(xx, xy, yy);
  }
  return hd * acc;
}

// Per-sample rows for int (v-u)_+^p plus the time-integrated dissipation.
template <typename Scalar>
std::vector<DiagnosticsRow<Scalar>> contraction_balance(const Trajectory<Scalar>& traj_u,
                                                        const Trajectory<Scalar>& traj_v,
                                                        Scalar n, Scalar alpha, Scalar p,
                                                        Scalar u_floor) {
  detail::require_synchronized(traj_u, traj_v);
  std::vector<DiagnosticsRow<Scalar>> rows;
  rows.reserve(traj_u.times.size());
  Scalar cum = 0, lyap0 = 0, prev_d = 0, prev_t = 0;
  for (std::size_t k = 0; k < traj_u.times.size(); ++k) {
    const Scalar t = traj_u.times[k];
    const Scalar lyap = contraction_functional(traj_v.fields[k], traj_u.fields[k], p);
    const Scalar diss =
        dissipation_integral(traj_v.fields[k], traj_u.fields[k], n, alpha, p, u_floor);
    if (k == 0)
      lyap0 = lyap;
    else
      cum += (t - prev_t) * (diss + prev_d) / Scalar(2);
    rows.push_back({t, lyap, diss, cum, lyap + p * cum - lyap0});
    prev_d = diss;
    prev_t = t;
  }
  return rows;
}

// int |grad u|^p dx
template <typename Scalar>
Scalar gradient_functional(const ScalarField<Scalar>& u, Scalar p) {
  const auto gu = gradient(u);
  const Scalar h = u.grid.spacing();
  const Scalar hd = u.grid.dim == 1 ? h : h * h;
  return hd * gu.squared_norm().pow(p / Scalar(2)).sum();
}

template <typename Scalar = double>
struct FloorSpec {
  Scalar u_floor{Scalar(0)};
  Scalar g_floor{Scalar(-1)}; // < 0: use 1e-8 * max |grad u(0)|
};

// e_bar integral over {|grad u| > g_floor, u > u_floor} for one snapshot.
template <typename Scalar>
Scalar gradient_dissipation_integral(const ScalarField<Scalar>& u, Scalar n, Scalar alpha,
                                     Scalar p, Scalar u_floor, Scalar g_floor) {
  const auto gu = gradient(u);
  const auto H = hessian(u);
  const auto m = m_matrix(n, alpha, p);
  const Scalar gamma = n / alpha;
  const Scalar h = u.grid.spacing();
  const Scalar hd = u.grid.dim == 1 ? h : h * h;
  const bool two_d = u.grid.dim == 2;
  Scalar acc = 0;
  for (Eigen::Index i = 0; i < u.values.size(); ++i) {
    const Scalar ui = u.values[i];
    if (!(ui > u_floor) || !(ui > Scalar(0))) continue;
    const Scalar wx = gu.comp[0][i];
    const Scalar wy = two_d ? gu.comp[1][i] : Scalar(0);
    const Scalar wn2 = wx * wx + wy * wy;
    const Scalar wn = std::sqrt(wn2);
    if (!(wn > g_floor) || wn == Scalar(0)) continue;
    Scalar A0, a1sq, a2sq;
    if (!two_d) {
      A0 = H.xx[i];
      a1sq = a2sq = Scalar(0);
    } else {
      const Scalar bx = wx / wn, by = wy / wn;
      const Scalar axx = H.xx[i], axy = H.xy[i], ayy = H.yy[i];
      const Scalar abx = axx * bx + axy * by;
      const Scalar aby = axy * bx + ayy * by;
      A0 = bx * abx + by * aby;
      a1sq = std::max(Scalar(0), abx * abx + aby * aby - A0 * A0);
      const Scalar frob2 = axx * axx + Scalar(2) * axy * axy + ayy * ayy;
      a2sq = std::max(Scalar(0), frob2 - A0 * A0 - Scalar(2) * a1sq);
    }
    const Scalar weight = std::pow(wn, p - Scalar(2));
    acc += weight * std::pow(ui, gamma - Scalar(2)) * m.quad(ui * A0, wn2) +
           weight * std::pow(ui, gamma) * (a2sq + p * a1sq);
  }
  return hd * acc;
}

template <typename Scalar>
std::vector<DiagnosticsRow<Scalar>> gradient_balance(const Trajectory<Scalar>& traj_u, Scalar n,
                                                     Scalar alpha, Scalar p,
                                                     FloorSpec<Scalar> floors = {}) {
  if (traj_u.fields.empty()) throw std::invalid_argument("gradient_balance: empty trajectory");
  Scalar g_floor = floors.g_floor;
  if (g_floor < Scalar(0)) {
    const auto g0 = gradient(traj_u.fields.front());
    g_floor = Scalar(1e-8) * std::sqrt(g0.squared_norm().maxCoeff());
  }
  std::vector<DiagnosticsRow<Scalar>> rows;
  rows.reserve(traj_u.times.size());
  Scalar cum = 0, lyap0 = 0, prev_d = 0, prev_t = 0;
  for (std::size_t k = 0; k < traj_u.times.size(); ++k) {
    const Scalar t = traj_u.times[k];
    const Scalar lyap = gradient_functional(traj_u.fields[k], p);
    const Scalar diss = gradient_dissipation_integral(traj_u.fields[k], n, alpha, p,
                                                      floors.u_floor, g_floor);
    if (k == 0)
      lyap0 = lyap;
    else
      cum += (t - prev_t) * (diss + prev_d) / Scalar(2);
    rows.push_back({t, lyap, diss, cum, lyap + p * cum - lyap0});
    prev_d = diss;
    prev_t = t;
  }
  return rows;
}

// Direction for the translation difference quotient: xi_t in time units
// (must be an integer multiple of the sample cadence), xi_x in lattice cells.
template <typename Scalar = double>
struct DirectionVector {
  Scalar xi_t{Scalar(0)};
  std::array<Eigen::Index, 2> xi_x{0, 0};
};

template <typename Scalar = double>
struct DirectionalReport {
  std::vector<Scalar> etas;             // physical displacement per level, decreasing
  std::vector<Scalar> times;            // sample times with all levels available
  std::vector<std::vector<Scalar>> quotients; // quotients[time][level]
  Scalar c_xi;                          // extrapolated eta -> 0 value at t = 0
};

// Quotients int |u((t,x) + k Xi) - u(t,x)|^p / (k |Xi|)^p over the dyadic
// multipliers k = 2^{levels-1}, ..., 2, 1, with Xi = (xi_t, h xi_x) physical.
// c_xi is the first-order Richardson extrapolation from the two smallest
// levels at t = 0.
template <typename Scalar>
DirectionalReport<Scalar> directional_quotient(const Trajectory<Scalar>& traj,
                                               const DirectionVector<Scalar>& xi, int eta_steps,
                                               Scalar p) {
  if (traj.fields.empty()) throw std::invalid_argument("directional_quotient: empty trajectory");
  if (eta_steps < 1) throw std::invalid_argument("directional_quotient: eta_steps must be >= 1");
  const auto& g = traj.grid();
  if (xi.xi_t == Scalar(0) && xi.xi_x[0] == 0 && xi.xi_x[1] == 0)
    throw std::invalid_argument("directional_quotient: direction must be nonzero");
  if (g.dim == 1 && xi.xi_x[1] != 0)
    throw std::invalid_argument("directional_quotient: xi_x[1] must be 0 in d = 1");

  // time part must be a whole number of sample steps
  long time_stride = 0;
  if (xi.xi_t != Scalar(0)) {
    const Scalar cadence = traj.config.sample_every;
    const Scalar q = xi.xi_t / cadence;
    const Scalar r = std::round(q);
    if (std::abs(q - r) > Scalar(1e-9) * std::max(Scalar(1), std::abs(q)))
      throw std::invalid_argument(
          "directional_quotient: xi_t must be an integer multiple of the sample cadence");
    time_stride = static_cast<long>(r);
  }

  const Scalar h = g.spacing();
  const Scalar sx2 = Scalar(xi.xi_x[0] * xi.xi_x[0] + xi.xi_x[1] * xi.xi_x[1]) * h * h;
  const Scalar xi_norm = std::sqrt(xi.xi_t * xi.xi_t + sx2);

  DirectionalReport<Scalar> rep;
  for (int j = 0; j < eta_steps; ++j) {
    const long k = 1L << (eta_steps - 1 - j);
    rep.etas.push_back(Scalar(k) * xi_norm);
  }

  const long kmax = 1L << (eta_steps - 1);
  const long nt = static_cast<long>(traj.times.size());
  for (long it = 0; it < nt; ++it) {
    if (it + kmax * time_stride >= nt) break;
    // exclude the irregular final sample from time-shifted evaluation
    bool regular = true;
    if (time_stride != 0) {
      for (int j = 0; j < eta_steps && regular; ++j) {
        const long k = 1L << (eta_steps - 1 - j);
        const Scalar want = traj.times[it] + Scalar(k) * xi.xi_t;
        const Scalar got = traj.times[it + k * time_stride];
        if (std::abs(got - want) > Scalar(1e-9) * std::max(Scalar(1), want)) regular = false;
      }
    }
    if (!regular) continue;
    std::vector<Scalar> row;
    row.reserve(eta_steps);
    for (int j = 0; j < eta_steps; ++j) {
      const long k = 1L << (eta_steps - 1 - j);
      const auto shifted = shift(traj.fields[it + k * time_stride],
                                 std::array<Eigen::Index, 2>{k * xi.xi_x[0], k * xi.xi_x[1]});
      ScalarField<Scalar> diff{g, shifted.values - traj.fields[it].values};
      row.push_back(integrate_lp(diff, p) / std::pow(Scalar(k) * xi_norm, p));
    }
    rep.times.push_back(traj.times[it]);
    rep.quotients.push_back(std::move(row));
  }
  if (rep.quotients.empty())
    throw std::invalid_argument("directional_quotient: no evaluable sample times");

  const auto& q0 = rep.quotients.front();
  rep.c_xi = eta_steps >= 2 ? Scalar(2) * q0[eta_steps - 1] - q0[eta_steps - 2]
                            : q0[0];
  return rep;
}

// Largest excess of any t > 0 quotient over the extrapolated estimate.
template <typename Scalar>
Scalar directional_max_excess(const DirectionalReport<Scalar>& rep) {
  Scalar excess = -std::numeric_limits<Scalar>::infinity();
  for (std::size_t it = 1; it < rep.quotients.size(); ++it)
    for (Scalar q : rep.quotients[it]) excess = std::max(excess, q - rep.c_xi);
  return excess;
}

// E(u) = int u^gamma |grad u|^2 / 2
template <typename Scalar>
Scalar energy_E(const ScalarField<Scalar>& u, Scalar gamma) {
  const auto gu = gradient(u);
  const Scalar h = u.grid.spacing();
  const Scalar hd = u.grid.dim == 1 ? h : h * h;
  if (gamma == Scalar(0)) return hd * gu.squared_norm().sum() / Scalar(2);
  return hd * (u.values.pow(gamma) * gu.squared_norm()).sum() / Scalar(2);
}

// delta E / delta u = -u^gamma Lap u - (gamma/2) u^{gamma-1} |grad u|^2
template <typename Scalar>
ScalarField<Scalar> energy_variation(const ScalarField<Scalar>& u, Scalar gamma) {
  const auto lap = laplacian(u);
  ScalarField<Scalar> out{u.grid, {}};
  if (gamma == Scalar(0)) {
    out.values = -lap.values;
    return out;
  }
  const auto gu = gradient(u);
  out.values = -u.values.pow(gamma) * lap.values -
               (gamma / Scalar(2)) * u.values.pow(gamma - Scalar(1)) * gu.squared_norm();
  return out;
}

// max over interior sample times of ||u_t + dE/du||_2 / ||u_t||_2, with u_t by
// centered time differences. Requires alpha = 1 + n/2 (the gradient-flow case).
template <typename Scalar>
Scalar gradient_flow_residual(const Trajectory<Scalar>& traj_u, Scalar n) {
  const Scalar alpha = Scalar(1) + n / Scalar(2);
  if (traj_u.config.variable != SolveVariable::UAlpha ||
      std::abs(traj_u.config.alpha - alpha) > Scalar(1e-12))
    throw std::invalid_argument("gradient_flow_residual: trajectory must be in u = U^{1+n/2}");
  if (traj_u.times.size() < 3)
    throw std::invalid_argument("gradient_flow_residual: need at least 3 samples");
  const Scalar gamma = n / alpha;
  Scalar worst = 0;
  for (std::size_t k = 1; k + 1 < traj_u.times.size(); ++k) {
    const Scalar dt2 = traj_u.times[k + 1] - traj_u.times[k - 1];
    FieldArray<Scalar> ut = (traj_u.fields[k + 1].values - traj_u.fields[k - 1].values) / dt2;
    const auto dE = energy_variation(traj_u.fields[k], gamma);
    const Scalar num = std::sqrt((ut + dE.values).square().sum());
    const Scalar den = std::sqrt(ut.square().sum());
    if (den > Scalar(0)) worst = std::max(worst, num / den);
  }
  return worst;
}

} // namespace pmlab
