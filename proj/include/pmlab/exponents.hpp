#pragma once

// Admissible exponent geometry for the two-parameter contraction family
// of m*U_t = Lap(U^m): the set K_{|n|} bounded by the curves P_-, P_+,
// its n=0 limit K_0 = {alpha*p >= 1}, and the derived exponents
// gamma, gamma_bar, Gamma and the roots Gamma_-, Gamma_+.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace pmlab {

template <typename Scalar = double>
struct DiffusionParams {
  Scalar m;   // diffusion exponent, m > 0
  Scalar n;   // m - 1
  int dim;    // spatial dimension d >= 1
  Scalar m_c; // critical exponent max(0, (d-2)/d)

  static DiffusionParams from_m(Scalar m, int dim) {
    if (!(m > Scalar(0))) throw std::invalid_argument("DiffusionParams: m must be > 0");
    if (dim < 1) throw std::invalid_argument("DiffusionParams: dimension must be >= 1");
    DiffusionParams p;
    p.m = m;
    p.n = m - Scalar(1);
    p.dim = dim;
    p.m_c = std::max(Scalar(0), Scalar(dim - 2) / Scalar(dim));
    return p;
  }
};

template <typename Scalar = double>
struct ExponentPair {
  Scalar alpha; // in (0, 1]
  Scalar p;     // >= 1

  void validate() const {
    if (!(alpha > Scalar(0)) || !(alpha <= Scalar(1)))
      throw std::invalid_argument("ExponentPair: alpha must lie in (0, 1]");
    if (!(p >= Scalar(1)))
      throw std::invalid_argument("ExponentPair: p must be >= 1");
  }
};

// gamma = n/alpha, gamma_bar = gamma - 1 + 1/alpha,
// Gamma = (1-alpha)/(alpha*(p-1)) (undefined at p = 1),
// Gamma_-+ = (1 -+ sqrt(1-gamma^2))/2.
template <typename Scalar = double>
struct DerivedExponents {
  Scalar gamma;
  Scalar gamma_bar;
  Scalar Gamma;        // valid only if gamma_defined
  bool gamma_defined;  // false at p = 1
  Scalar Gamma_minus;
  Scalar Gamma_plus;
};

enum class RegionClass { Interior, Boundary, Outside };

inline const char* to_string(RegionClass c) {
  switch (c) {
    case RegionClass::Interior: return "interior";
    case RegionClass::Boundary: return "boundary";
    default: return "outside";
  }
}

template <typename Scalar>
struct PBounds {
  Scalar p_minus;
  Scalar p_plus;
};

namespace detail {
template <typename Scalar>
void require_region_n(Scalar n) {
  if (!(std::abs(n) < Scalar(1)))
    throw std::invalid_argument("region operations require |n| < 1, got n = " + std::to_string(double(n)));
}
} // namespace detail

// P_-+(alpha) = 1 + (2/n^2)(1-alpha)(alpha -+ sqrt(alpha^2 - n^2)) for alpha in [|n|, 1].
template <typename Scalar>
PBounds<Scalar> p_bounds(Scalar n, Scalar alpha) {
  detail::require_region_n(n);
  if (n == Scalar(0))
    throw std::invalid_argument("p_bounds: n = 0 has no P_+- curves, use K_0 membership (alpha*p >= 1)");
  const Scalar an = std::abs(n);
  if (!(alpha >= an))
    throw std::invalid_argument("p_bounds: alpha must be >= |n|");
  if (!(alpha <= Scalar(1)))
    throw std::invalid_argument("p_bounds: alpha must be <= 1");
  const Scalar root = std::sqrt(std::max(Scalar(0), (alpha - n) * (alpha + n)));
  // P_- via alpha - root = n^2 / (alpha + root), which stays accurate as n -> 0
  const Scalar p_minus = Scalar(1) + Scalar(2) * (Scalar(1) - alpha) / (alpha + root);
  const Scalar p_plus = Scalar(1) + Scalar(2) / (n * n) * (Scalar(1) - alpha) * (alpha + root);
  return {p_minus, p_plus};
}

// Total classification of (alpha, p) against K_{|n|} (or K_0 when n = 0)
// with an absolute tolerance on p-distance to P_+- and on alpha - |n|.
template <typename Scalar>
RegionClass classify(Scalar n, ExponentPair<Scalar> pair, Scalar tol = Scalar(1e-9)) {
  detail::require_region_n(n);
  if (!(tol > Scalar(0))) throw std::invalid_argument("classify: tol must be > 0");
  const Scalar a = pair.alpha;
  const Scalar p = pair.p;

  if (n == Scalar(0)) {
    if (!(a > Scalar(0)) || a > Scalar(1) + tol) return RegionClass::Outside;
    const Scalar s = a * p - Scalar(1);
    if (s > tol) return RegionClass::Interior;
    if (s >= -tol) return RegionClass::Boundary;
    return RegionClass::Outside;
  }

  const Scalar an = std::abs(n);
  if (a < an - tol || a > Scalar(1) + tol) return RegionClass::Outside;

  // At alpha = |n| and alpha = 1 the fiber collapses to a single p.
  const Scalar ac = std::min(std::max(a, an), Scalar(1));
  const auto [pm, pp] = p_bounds(n, ac);

  if (a > an && a <= Scalar(1) && p > pm + tol && p < pp - tol) return RegionClass::Interior;
  if (std::abs(p - pm) <= tol || std::abs(p - pp) <= tol) return RegionClass::Boundary;
  if (a <= an + tol && p >= pm - tol && p <= pp + tol) return RegionClass::Boundary;
  return RegionClass::Outside;
}

template <typename Scalar>
DerivedExponents<Scalar> derived_exponents(Scalar n, ExponentPair<Scalar> pair) {
  if (!(pair.alpha > Scalar(0)))
    throw std::invalid_argument("derived_exponents: alpha must be > 0");
  DerivedExponents<Scalar> d;
  d.gamma = n / pair.alpha;
  d.gamma_bar = d.gamma - Scalar(1) + Scalar(1) / pair.alpha;
  d.gamma_defined = pair.p > Scalar(1);
  d.Gamma = d.gamma_defined
                ? (Scalar(1) - pair.alpha) / (pair.alpha * (pair.p - Scalar(1)))
                : std::numeric_limits<Scalar>::quiet_NaN();
  const Scalar disc = std::sqrt(std::max(Scalar(0), Scalar(1) - d.gamma * d.gamma));
  d.Gamma_minus = (Scalar(1) - disc) / Scalar(2);
  d.Gamma_plus = (Scalar(1) + disc) / Scalar(2);
  return d;
}

// Residuals of the identity Gamma(alpha, P_+-(alpha)) = Gamma_-+(gamma):
// first component at p = P_-, second at p = P_+.
template <typename Scalar>
struct BoundaryGammaResiduals {
  Scalar residual_minus; // Gamma(alpha, P_-) - Gamma_+
  Scalar residual_plus;  // Gamma(alpha, P_+) - Gamma_-
};

template <typename Scalar>
BoundaryGammaResiduals<Scalar> boundary_gamma_identity(Scalar n, Scalar alpha) {
  const auto pb = p_bounds(n, alpha);
  const auto de = derived_exponents(n, ExponentPair<Scalar>{alpha, Scalar(2)});
  auto gamma_at = [&](Scalar p) {
    return (Scalar(1) - alpha) / (alpha * (p - Scalar(1)));
  };
  BoundaryGammaResiduals<Scalar> r;
  if (pb.p_minus > Scalar(1))
    r.residual_minus = gamma_at(pb.p_minus) - de.Gamma_plus;
  else // alpha = 1 collapses both bounds to p = 1 where Gamma is undefined
    r.residual_minus = Scalar(0);
  if (pb.p_plus > Scalar(1))
    r.residual_plus = gamma_at(pb.p_plus) - de.Gamma_minus;
  else
    r.residual_plus = Scalar(0);
  return r;
}

// Rectangular classification grid over (alpha, p) in (0,1] x [1, p_max],
// row-major with alpha as the outer (ascending) index.
template <typename Scalar>
struct RegionGrid {
  std::vector<Scalar> alphas;
  std::vector<Scalar> ps;
  std::vector<RegionClass> cells; // cells[i*ps.size() + j] for (alphas[i], ps[j])

  RegionClass at(std::size_t i, std::size_t j) const { return cells[i * ps.size() + j]; }
};

template <typename Scalar>
RegionGrid<Scalar> sample_region(Scalar n, int alpha_steps, Scalar p_max, int p_steps,
                                 Scalar tol = Scalar(1e-9)) {
  detail::require_region_n(n);
  if (alpha_steps < 2 || p_steps < 2)
    throw std::invalid_argument("sample_region: steps must be >= 2");
  if (!(p_max >= Scalar(1))) throw std::invalid_argument("sample_region: p_max must be >= 1");
  RegionGrid<Scalar> g;
  g.alphas.reserve(alpha_steps);
  for (int i = 1; i <= alpha_steps; ++i)
    g.alphas.push_back(Scalar(i) / Scalar(alpha_steps));
  g.ps.reserve(p_steps);
  for (int j = 0; j < p_steps; ++j)
    g.ps.push_back(Scalar(1) + (p_max - Scalar(1)) * Scalar(j) / Scalar(p_steps - 1));
  g.cells.reserve(g.alphas.size() * g.ps.size());
  for (Scalar a : g.alphas)
    for (Scalar p : g.ps)
      g.cells.push_back(classify(n, ExponentPair<Scalar>{a, p}, tol));
  return g;
}

} // namespace pmlab
