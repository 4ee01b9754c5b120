#pragma once

// Periodic torus discretization in d = 1, 2: sampled scalar fields with
// second-order centered stencils for grad, Lap, D^2, midpoint L^p integrals,
// and exact lattice shifts.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <stdexcept>
#include <type_traits>

namespace pmlab {

template <typename Scalar = double>
struct TorusGrid {
  int dim{1};            // 1 or 2
  Eigen::Index cells{8}; // N, per dimension
  Scalar period{1};      // L

  Scalar spacing() const { return period / Scalar(cells); }
  Eigen::Index size() const { return dim == 1 ? cells : cells * cells; }

  static TorusGrid make(int dim, Eigen::Index cells, Scalar period) {
    if (dim != 1 && dim != 2) throw std::invalid_argument("TorusGrid: dim must be 1 or 2");
    if (cells < 8) throw std::invalid_argument("TorusGrid: need at least 8 cells per dimension");
    if (!(period > Scalar(0))) throw std::invalid_argument("TorusGrid: period must be > 0");
    return TorusGrid{dim, cells, period};
  }

  bool operator==(const TorusGrid& o) const {
    return dim == o.dim && cells == o.cells && period == o.period;
  }
};

template <typename Scalar = double>
using FieldArray = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

using MaskArray = Eigen::Array<bool, Eigen::Dynamic, 1>;

template <typename Scalar = double>
struct ScalarField {
  TorusGrid<Scalar> grid;
  FieldArray<Scalar> values;   // row-major: index = i*N + j in d = 2
  bool nonnegative{false};     // set when the field represents U or u = U^alpha

  static ScalarField constant(const TorusGrid<Scalar>& g, Scalar c) {
    return {g, FieldArray<Scalar>::Constant(g.size(), c), c >= Scalar(0)};
  }
  static ScalarField zeros(const TorusGrid<Scalar>& g) { return constant(g, Scalar(0)); }

  Scalar& at(Eigen::Index i) { return values[i]; }
  Scalar at(Eigen::Index i) const { return values[i]; }
  Scalar& at(Eigen::Index i, Eigen::Index j) { return values[i * grid.cells + j]; }
  Scalar at(Eigen::Index i, Eigen::Index j) const { return values[i * grid.cells + j]; }
};

template <typename Scalar = double>
struct VectorField {
  TorusGrid<Scalar> grid;
  std::array<FieldArray<Scalar>, 2> comp; // comp[1] empty in d = 1

  FieldArray<Scalar> squared_norm() const {
    if (grid.dim == 1) return comp[0].square();
    return comp[0].square() + comp[1].square();
  }
};

template <typename Scalar = double>
struct HessianField {
  TorusGrid<Scalar> grid;
  FieldArray<Scalar> xx, xy, yy; // xy, yy empty in d = 1
};

// Sample f(x) (d=1) or f(x,y) (d=2) at the cell nodes x_i = i*h.
template <typename Scalar, typename F>
ScalarField<Scalar> sample(const TorusGrid<Scalar>& g, F&& f) {
  ScalarField<Scalar> out{g, FieldArray<Scalar>::Zero(g.size()), false};
  const Scalar h = g.spacing();
  if constexpr (std::is_invocable_v<F&, Scalar, Scalar>) {
    if (g.dim != 2) throw std::invalid_argument("sample: two-argument function needs a 2-d grid");
    for (Eigen::Index i = 0; i < g.cells; ++i)
      for (Eigen::Index j = 0; j < g.cells; ++j)
        out.at(i, j) = f(Scalar(i) * h, Scalar(j) * h);
  } else {
    if (g.dim != 1) throw std::invalid_argument("sample: one-argument function needs a 1-d grid");
    for (Eigen::Index i = 0; i < g.cells; ++i) out.values[i] = f(Scalar(i) * h);
  }
  return out;
}

namespace detail {
inline Eigen::Index wrap(Eigen::Index i, Eigen::Index n) {
  i %= n;
  return i < 0 ? i + n : i;
}
} // namespace detail

// Centered first derivative along one axis: (f_{i+1} - f_{i-1}) / (2h).
template <typename Scalar>
ScalarField<Scalar> derivative(const ScalarField<Scalar>& f, int axis) {
  const auto& g = f.grid;
  if (axis < 0 || axis >= g.dim) throw std::invalid_argument("derivative: axis out of range");
  ScalarField<Scalar> out{g, FieldArray<Scalar>::Zero(g.size()), false};
  const Eigen::Index n = g.cells;
  const Scalar inv2h = Scalar(1) / (Scalar(2) * g.spacing());
  if (g.dim == 1) {
    for (Eigen::Index i = 0; i < n; ++i)
      out.values[i] = (f.values[detail::wrap(i + 1, n)] - f.values[detail::wrap(i - 1, n)]) * inv2h;
    return out;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index ip = detail::wrap(i + 1, n), im = detail::wrap(i - 1, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const Eigen::Index jp = detail::wrap(j + 1, n), jm = detail::wrap(j - 1, n);
      out.at(i, j) = axis == 0 ? (f.at(ip, j) - f.at(im, j)) * inv2h
                               : (f.at(i, jp) - f.at(i, jm)) * inv2h;
    }
  }
  return out;
}

// Second derivative along one axis: (f_{i+1} - 2 f_i + f_{i-1}) / h^2.
template <typename Scalar>
ScalarField<Scalar> second_derivative(const ScalarField<Scalar>& f, int axis) {
  const auto& g = f.grid;
  if (axis < 0 || axis >= g.dim) throw std::invalid_argument("second_derivative: axis out of range");
  ScalarField<Scalar> out{g, FieldArray<Scalar>::Zero(g.size()), false};
  const Eigen::Index n = g.cells;
  const Scalar h = g.spacing();
  const Scalar invh2 = Scalar(1) / (h * h);
  if (g.dim == 1) {
    for (Eigen::Index i = 0; i < n; ++i)
      out.values[i] = (f.values[detail::wrap(i + 1, n)] - Scalar(2) * f.values[i] +
                       f.values[detail::wrap(i - 1, n)]) *
                      invh2;
    return out;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index ip = detail::wrap(i + 1, n), im = detail::wrap(i - 1, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const Eigen::Index jp = detail::wrap(j + 1, n), jm = detail::wrap(j - 1, n);
      out.at(i, j) = axis == 0
                         ? (f.at(ip, j) - Scalar(2) * f.at(i, j) + f.at(im, j)) * invh2
                         : (f.at(i, jp) - Scalar(2) * f.at(i, j) + f.at(i, jm)) * invh2;
    }
  }
  return out;
}

template <typename Scalar>
VectorField<Scalar> gradient(const ScalarField<Scalar>& f) {
  VectorField<Scalar> out{f.grid, {}};
  out.comp[0] = derivative(f, 0).values;
  if (f.grid.dim == 2) out.comp[1] = derivative(f, 1).values;
  return out;
}

template <typename Scalar>
ScalarField<Scalar> laplacian(const ScalarField<Scalar>& f) {
  ScalarField<Scalar> out = second_derivative(f, 0);
  if (f.grid.dim == 2) out.values += second_derivative(f, 1).values;
  return out;
}

// Mixed entry by the 4-point cross stencil; diagonal entries share the
// second_derivative stencil so that trace(hessian) == laplacian exactly.
template <typename Scalar>
HessianField<Scalar> hessian(const ScalarField<Scalar>& f) {
  const auto& g = f.grid;
  HessianField<Scalar> out{g, {}, {}, {}};
  out.xx = second_derivative(f, 0).values;
  if (g.dim == 1) return out;
  out.yy = second_derivative(f, 1).values;
  const Eigen::Index n = g.cells;
  const Scalar h = g.spacing();
  const Scalar inv4h2 = Scalar(1) / (Scalar(4) * h * h);
  out.xy.resize(g.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index ip = detail::wrap(i + 1, n), im = detail::wrap(i - 1, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const Eigen::Index jp = detail::wrap(j + 1, n), jm = detail::wrap(j - 1, n);
      out.xy[i * n + j] =
          (f.at(ip, jp) - f.at(ip, jm) - f.at(im, jp) + f.at(im, jm)) * inv4h2;
    }
  }
  return out;
}

// Midpoint-rule integral h^d * sum |f_i|^p over masked cells.
template <typename Scalar>
Scalar integrate_lp(const ScalarField<Scalar>& f, Scalar p) {
  const Scalar h = f.grid.spacing();
  const Scalar hd = f.grid.dim == 1 ? h : h * h;
  return hd * f.values.abs().pow(p).sum();
}

template <typename Scalar>
Scalar integrate_lp(const ScalarField<Scalar>& f, Scalar p, const MaskArray& mask) {
  if (mask.size() != f.values.size())
    throw std::invalid_argument("integrate_lp: mask size mismatch");
  const Scalar h = f.grid.spacing();
  const Scalar hd = f.grid.dim == 1 ? h : h * h;
  Scalar acc = 0;
  for (Eigen::Index i = 0; i < f.values.size(); ++i)
    if (mask[i]) acc += std::pow(std::abs(f.values[i]), p);
  return hd * acc;
}

// Periodic lattice shift: out(x) = f(x + offset*h), exact (no interpolation).
template <typename Scalar>
ScalarField<Scalar> shift(const ScalarField<Scalar>& f, std::array<Eigen::Index, 2> offset) {
  const auto& g = f.grid;
  ScalarField<Scalar> out{g, FieldArray<Scalar>::Zero(g.size()), f.nonnegative};
  const Eigen::Index n = g.cells;
  if (g.dim == 1) {
    for (Eigen::Index i = 0; i < n; ++i) out.values[i] = f.values[detail::wrap(i + offset[0], n)];
    return out;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index is = detail::wrap(i + offset[0], n);
    for (Eigen::Index j = 0; j < n; ++j) out.at(i, j) = f.at(is, detail::wrap(j + offset[1], n));
  }
  return out;
}

// Physical-displacement overload; rejects offsets that are not lattice multiples.
template <typename Scalar>
ScalarField<Scalar> shift(const ScalarField<Scalar>& f, std::array<Scalar, 2> displacement) {
  const Scalar h = f.grid.spacing();
  std::array<Eigen::Index, 2> cells{0, 0};
  for (int a = 0; a < f.grid.dim; ++a) {
    const Scalar q = displacement[a] / h;
    const Scalar r = std::round(q);
    if (std::abs(q - r) > Scalar(1e-9) * std::max(Scalar(1), std::abs(q)))
      throw std::invalid_argument("shift: displacement is not an integer multiple of the spacing");
    cells[a] = static_cast<Eigen::Index>(r);
  }
  return shift(f, cells);
}

template <typename Scalar>
Scalar mass(const ScalarField<Scalar>& f) {
  const Scalar h = f.grid.spacing();
  const Scalar hd = f.grid.dim == 1 ? h : h * h;
  return hd * f.values.sum();
}

template <typename Scalar>
ScalarField<Scalar> pow_field(const ScalarField<Scalar>& f, Scalar e) {
  return {f.grid, f.values.pow(e), f.nonnegative};
}

} // namespace pmlab
