#pragma once

// The 2x2 symmetric matrices behind the contraction family: Q(v,u) for the
// function-difference functional, M for the gradient/directional functionals,
// the scalar functions f_gamma, g_gamma, F_gamma controlling det Q, pointwise
// dissipation integrands e, e_bar, e_barbar, and the quadratic forms
// J_eta -> J_0.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "pmlab/exponents.hpp"

namespace pmlab {

template <typename Scalar = double>
struct SymMatrix2 {
  Scalar a11{0}, a12{0}, a22{0};

  Scalar trace() const { return a11 + a22; }
  Scalar det() const { return a11 * a22 - a12 * a12; }

  Eigen::Matrix<Scalar, 2, 2> matrix() const {
    Eigen::Matrix<Scalar, 2, 2> m;
    m << a11, a12, a12, a22;
    return m;
  }

  // Closed-form eigenvalues {min, max}. The smaller one is recovered from
  // det/lambda_max to avoid the cancellation in (tr - s)/2 when det ~ 0.
  std::array<Scalar, 2> eigenvalues() const {
    const Scalar tr = trace();
    const Scalar s = std::hypot(a11 - a22, Scalar(2) * a12);
    Scalar lo, hi;
    if (tr >= Scalar(0)) {
      hi = (tr + s) / Scalar(2);
      lo = hi != Scalar(0) ? det() / hi : (tr - s) / Scalar(2);
    } else {
      lo = (tr - s) / Scalar(2);
      hi = lo != Scalar(0) ? det() / lo : (tr + s) / Scalar(2);
    }
    return {lo, hi};
  }

  Scalar eig_min() const { return eigenvalues()[0]; }
  Scalar eig_max() const { return eigenvalues()[1]; }

  // x^T A x for scalars x = (x1, x2)
  Scalar quad(Scalar x1, Scalar x2) const {
    return a11 * x1 * x1 + Scalar(2) * a12 * x1 * x2 + a22 * x2 * x2;
  }

  // (X, Y)^T (A (x) I_d) (X, Y) for stacked d-vectors, given the dots
  // xx = |X|^2, xy = X.Y, yy = |Y|^2.
  Scalar quad_dots(Scalar xx, Scalar xy, Scalar yy) const {
    return a11 * xx + Scalar(2) * a12 * xy + a22 * yy;
  }
};

namespace detail {

template <typename Scalar>
void require_qm_pair(Scalar alpha, Scalar p) {
  const bool special = alpha == Scalar(1) && p == Scalar(1);
  if (special) return;
  if (!(p > Scalar(1)) || !(alpha > Scalar(0)) || !(alpha <= Scalar(1)))
    throw std::invalid_argument("quadform: need p > 1 and alpha in (0,1], or the pair (1,1)");
}

template <typename Scalar>
struct GammaPair {
  Scalar gamma;
  Scalar Gamma;
};

template <typename Scalar>
GammaPair<Scalar> gammas(Scalar n, Scalar alpha, Scalar p) {
  return {n / alpha, (Scalar(1) - alpha) / (alpha * (p - Scalar(1)))};
}

} // namespace detail

// Q(v,u) = (p-1) [ v^g (1 + G(u/v - 1)),  -(v^g + u^g)/2
//                  -(v^g + u^g)/2,        u^g (1 + G(v/u - 1)) ]
// with g = gamma, G = Gamma; Q = 0 at (alpha, p) = (1, 1).
template <typename Scalar>
SymMatrix2<Scalar> q_matrix(Scalar n, Scalar alpha, Scalar p, Scalar v, Scalar u) {
  detail::require_qm_pair(alpha, p);
  if (!(u > Scalar(0)) || !(v > Scalar(0)))
    throw std::invalid_argument("q_matrix: u and v must be > 0");
  if (alpha == Scalar(1) && p == Scalar(1)) return {};
  const auto [gamma, Gamma] = detail::gammas(n, alpha, p);
  const Scalar vg = std::pow(v, gamma);
  const Scalar ug = std::pow(u, gamma);
  SymMatrix2<Scalar> q;
  q.a11 = (p - 1) * vg * (Scalar(1) + Gamma * (u / v - Scalar(1)));
  q.a22 = (p - 1) * ug * (Scalar(1) + Gamma * (v / u - Scalar(1)));
  q.a12 = -(p - 1) * (vg + ug) / Scalar(2);
  return q;
}

// M = (p-1) [ 1,            -G + g/2
//             -G + g/2,     G (1 - g) ];  M = 0 at (1, 1).
template <typename Scalar>
SymMatrix2<Scalar> m_matrix(Scalar n, Scalar alpha, Scalar p) {
  detail::require_qm_pair(alpha, p);
  if (alpha == Scalar(1) && p == Scalar(1)) return {};
  const auto [gamma, Gamma] = detail::gammas(n, alpha, p);
  SymMatrix2<Scalar> m;
  m.a11 = p - 1;
  m.a12 = (p - 1) * (-Gamma + gamma / Scalar(2));
  m.a22 = (p - 1) * Gamma * (Scalar(1) - gamma);
  return m;
}

// f_gamma(w) = w^gamma - 2 + w^{-gamma}
template <typename Scalar>
Scalar f_gamma(Scalar gamma, Scalar w) {
  if (!(w > Scalar(0))) throw std::invalid_argument("f_gamma: w must be > 0");
  const Scalar wg = std::pow(w, gamma);
  return wg - Scalar(2) + Scalar(1) / wg;
}

// g_gamma(w) = Gamma (1 - Gamma) f_1(w) - f_gamma(w)/4.
// det Q(v,u) = (p-1)^2 v^{2 gamma} w^gamma g_gamma(w) at w = u/v, so
// det Q > 0 iff g_gamma(u/v) > 0.
template <typename Scalar>
Scalar g_gamma(Scalar Gamma, Scalar gamma, Scalar w) {
  return Gamma * (Scalar(1) - Gamma) * f_gamma(Scalar(1), w) - f_gamma(gamma, w) / Scalar(4);
}

// F_gamma(w) = gamma((gamma-1) w^{gamma+1} + (gamma+1) w^{1-gamma})/4 - 2 Gamma(1-Gamma);
// g_gamma''(w) = -w^{-3} F_gamma(w).
template <typename Scalar>
Scalar F_gamma(Scalar Gamma, Scalar gamma, Scalar w) {
  if (!(w > Scalar(0))) throw std::invalid_argument("F_gamma: w must be > 0");
  return gamma *
             ((gamma - 1) * std::pow(w, gamma + 1) + (gamma + 1) * std::pow(w, Scalar(1) - gamma)) /
             Scalar(4) -
         Scalar(2) * Gamma * (Scalar(1) - Gamma);
}

template <typename Scalar = double>
struct PositivityReport {
  Scalar min_scaled_eig; // inf over scanned w of min-eig(Q(1,w)) / 1^gamma
  Scalar nu;             // candidate for the cone constant: equals min_scaled_eig on [w_min, w_max]
  Scalar nu0;            // inf over scanned w <= 1 of Q(1,w)_11
  Scalar nu1;            // min eigenvalue of M
  std::vector<std::pair<Scalar, Scalar>> witnesses; // (w, eigenvalue) at the scan minimum
  Scalar w_min, w_max;
  int steps;
};

// Brute-force positivity scan of Q(1, w) over a logarithmic w-grid.
// By the scaling Q(l v, l u) = l^gamma Q(v, u), fixing v = 1 loses nothing.
template <typename Scalar>
PositivityReport<Scalar> q_positivity_scan(Scalar n, Scalar alpha, Scalar p, Scalar w_min,
                                           Scalar w_max, int steps) {
  if (!(w_min > Scalar(0)) || !(w_min <= w_max))
    throw std::invalid_argument("q_positivity_scan: need 0 < w_min <= w_max");
  if (steps < 1) throw std::invalid_argument("q_positivity_scan: steps must be >= 1");

  PositivityReport<Scalar> rep;
  rep.w_min = w_min;
  rep.w_max = w_max;
  rep.steps = steps;
  rep.nu1 = m_matrix(n, alpha, p).eig_min();

  const Scalar lmin = std::log(w_min);
  const Scalar lmax = std::log(w_max);
  Scalar best_eig = std::numeric_limits<Scalar>::infinity();
  Scalar best_w = w_min;
  Scalar best_q11 = std::numeric_limits<Scalar>::infinity();
  for (int j = 0; j < steps; ++j) {
    Scalar w = steps == 1 ? w_min
                          : std::exp(lmin + (lmax - lmin) * Scalar(j) / Scalar(steps - 1));
    if (j == steps - 1) w = w_max; // keep the endpoint exact
    const auto q = q_matrix(n, alpha, p, Scalar(1), w);
    const Scalar e = q.eig_min();
    if (!std::isfinite(e)) continue;
    if (e < best_eig) {
      best_eig = e;
      best_w = w;
    }
    if (w <= Scalar(1) && q.a11 < best_q11) best_q11 = q.a11;
  }
  rep.min_scaled_eig = best_eig;
  rep.nu = best_eig;
  rep.nu0 = best_q11;
  rep.witnesses.push_back({best_w, best_eig});
  return rep;
}

// e[v,u] = |v-u|^{p-2} (grad v, grad u)^T Q(v,u) (grad v, grad u), for v > u > 0.
template <typename Scalar, typename DerivedA, typename DerivedB>
Scalar dissipation_e(Scalar n, Scalar alpha, Scalar p, Scalar v, Scalar u,
                     const Eigen::MatrixBase<DerivedA>& grad_v,
                     const Eigen::MatrixBase<DerivedB>& grad_u) {
  if (!(v > u) || !(u > Scalar(0)))
    throw std::invalid_argument("dissipation_e: requires v > u > 0");
  const auto q = q_matrix(n, alpha, p, v, u);
  const Scalar qf = q.quad_dots(grad_v.squaredNorm(), grad_v.dot(grad_u), grad_u.squaredNorm());
  return std::pow(v - u, p - Scalar(2)) * qf;
}

// e_bar[u, w, A] with w = grad u and A = D^2 u, decomposed along b = w/|w|:
//   |w|^{p-2} u^{gamma-2} (u A0, |w|^2)^T M (u A0, |w|^2)
// + |w|^{p-2} u^gamma (|A2|^2 + p |A1|^2),
// A0 = b^T A b, A1 the mixed block, A2 the b-orthogonal block (Frobenius norms).
template <typename Scalar, typename DerivedW, typename DerivedA>
Scalar dissipation_ebar(Scalar n, Scalar alpha, Scalar p, Scalar u,
                        const Eigen::MatrixBase<DerivedW>& w,
                        const Eigen::MatrixBase<DerivedA>& A) {
  if (!(u > Scalar(0))) throw std::invalid_argument("dissipation_ebar: u must be > 0");
  const Scalar wn2 = w.squaredNorm();
  if (!(wn2 > Scalar(0))) throw std::invalid_argument("dissipation_ebar: grad u must be nonzero");
  const Scalar wn = std::sqrt(wn2);

  // Basis-free block norms: A b = A0 b + r with r in b-perp, |r|^2 = |A1|^2,
  // and |A|_F^2 = A0^2 + 2 |A1|^2 + |A2|^2.
  const auto b = (w / wn).eval();
  const auto Ab = (A * b).eval();
  const Scalar A0 = b.dot(Ab);
  const Scalar a1sq = std::max(Scalar(0), Ab.squaredNorm() - A0 * A0);
  const Scalar a2sq = std::max(Scalar(0), A.squaredNorm() - A0 * A0 - Scalar(2) * a1sq);

  const auto [gamma, Gamma] = detail::gammas(n, alpha, p);
  (void)Gamma;
  const auto m = m_matrix(n, alpha, p);
  const Scalar weight = std::pow(wn, p - Scalar(2));
  return weight * std::pow(u, gamma - Scalar(2)) * m.quad(u * A0, wn2) +
         weight * std::pow(u, gamma) * (a2sq + p * a1sq);
}

// e_barbar[u, w, grad u] = |w|^{p-2} u^{gamma-2} (u grad w, w grad u)^T M (...)
template <typename Scalar, typename DerivedA, typename DerivedB>
Scalar dissipation_ebarbar(Scalar n, Scalar alpha, Scalar p, Scalar u, Scalar w,
                           const Eigen::MatrixBase<DerivedA>& grad_w,
                           const Eigen::MatrixBase<DerivedB>& grad_u) {
  if (!(u > Scalar(0))) throw std::invalid_argument("dissipation_ebarbar: u must be > 0");
  if (w == Scalar(0)) throw std::invalid_argument("dissipation_ebarbar: w must be nonzero");
  const auto [gamma, Gamma] = detail::gammas(n, alpha, p);
  (void)Gamma;
  const auto m = m_matrix(n, alpha, p);
  const auto x = (u * grad_w).eval();
  const auto y = (w * grad_u).eval();
  return std::pow(std::abs(w), p - Scalar(2)) * std::pow(u, gamma - Scalar(2)) *
         m.quad_dots(x.squaredNorm(), x.dot(y), y.squaredNorm());
}

// J_eta(v_eta, u) = eta^{-2} (grad v_eta, grad u)^T Q(v_eta, u) (grad v_eta, grad u)
template <typename Scalar, typename DerivedA, typename DerivedB>
Scalar j_eta(Scalar n, Scalar alpha, Scalar p, Scalar eta, Scalar v_eta, Scalar u,
             const Eigen::MatrixBase<DerivedA>& grad_v_eta,
             const Eigen::MatrixBase<DerivedB>& grad_u) {
  if (!(u > Scalar(0))) throw std::invalid_argument("j_eta: u must be > 0");
  if (!(eta > Scalar(0))) throw std::invalid_argument("j_eta: eta must be > 0");
  const auto q = q_matrix(n, alpha, p, v_eta, u);
  return q.quad_dots(grad_v_eta.squaredNorm(), grad_v_eta.dot(grad_u), grad_u.squaredNorm()) /
         (eta * eta);
}

// J_0 = u^{gamma-2} (u grad w, w grad u)^T M (u grad w, w grad u), the eta -> 0
// limit of J_eta along v_eta = u + eta w + O(eta^2).
template <typename Scalar, typename DerivedA, typename DerivedB>
Scalar j_zero(Scalar n, Scalar alpha, Scalar p, Scalar u, Scalar w,
              const Eigen::MatrixBase<DerivedA>& grad_w,
              const Eigen::MatrixBase<DerivedB>& grad_u) {
  if (!(u > Scalar(0))) throw std::invalid_argument("j_zero: u must be > 0");
  const auto [gamma, Gamma] = detail::gammas(n, alpha, p);
  (void)Gamma;
  const auto m = m_matrix(n, alpha, p);
  const auto x = (u * grad_w).eval();
  const auto y = (w * grad_u).eval();
  return std::pow(u, gamma - Scalar(2)) *
         m.quad_dots(x.squaredNorm(), x.dot(y), y.squaredNorm());
}

} // namespace pmlab
