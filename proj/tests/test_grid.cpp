#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pmlab/grid.hpp"
#include "test_util.hpp"

using namespace pmlab;

namespace {
constexpr double kTwoPi = 6.283185307179586;

TorusGrid<double> grid1(Eigen::Index n, double L = kTwoPi) { return TorusGrid<double>::make(1, n, L); }
TorusGrid<double> grid2(Eigen::Index n, double L = kTwoPi) { return TorusGrid<double>::make(2, n, L); }
} // namespace

TEST_CASE("grid construction guards") {
  CHECK_THROWS_AS(TorusGrid<double>::make(3, 16, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(TorusGrid<double>::make(1, 4, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(TorusGrid<double>::make(1, 16, 0.0), std::invalid_argument);
  auto g = grid1(64);
  CHECK(g.spacing() * double(g.cells) == doctest::Approx(g.period).epsilon(1e-15));
}

TEST_CASE("stencils annihilate constants") {
  for (auto g : {grid1(32), grid2(16)}) {
    auto f = ScalarField<double>::constant(g, 3.7);
    CHECK(gradient(f).comp[0].abs().maxCoeff() == 0.0);
    CHECK(laplacian(f).values.abs().maxCoeff() == 0.0);
    auto H = hessian(f);
    CHECK(H.xx.abs().maxCoeff() == 0.0);
    if (g.dim == 2) {
      CHECK(gradient(f).comp[1].abs().maxCoeff() == 0.0);
      CHECK(H.xy.abs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("gradient second-order accuracy on sin") {
  const double k = kTwoPi / kTwoPi; // mode 1 on period 2*pi
  auto err_at = [&](Eigen::Index n) {
    auto g = grid1(n);
    auto f = sample(g, [&](double x) { return std::sin(k * x); });
    auto d = gradient(f);
    double worst = 0;
    for (Eigen::Index i = 0; i < g.cells; ++i)
      worst = std::max(worst, std::abs(d.comp[0][i] - k * std::cos(k * i * g.spacing())));
    return worst;
  };
  const double e256 = err_at(256); // theory: k^3 h^2 / 6 ~ 1.0e-4
  CHECK(e256 < 2e-4);
  const double order = std::log2(err_at(128) / e256);
  CHECK(order == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("laplacian eigenfunction and discrete divergence theorem") {
  auto g = grid1(256);
  const double k = 1.0;
  auto f = sample(g, [&](double x) { return std::sin(k * x); });
  auto lap = laplacian(f);
  double worst = 0;
  for (Eigen::Index i = 0; i < g.cells; ++i)
    worst = std::max(worst, std::abs(lap.values[i] + k * k * f.values[i]));
  CHECK(worst < 1e-4);

  // telescoping: the lattice sum of any laplacian vanishes
  auto rnd = sample(g, [&](double x) { return std::sin(3 * x) + 0.2 * std::cos(7 * x + 1.0); });
  CHECK(std::abs(laplacian(rnd).values.sum()) < 1e-10);
}

TEST_CASE("hessian: diagonal accuracy, exact trace, mixed entry") {
  auto g = grid1(256);
  auto f = sample(g, [&](double x) { return std::cos(x); });
  auto H = hessian(f);
  double worst = 0;
  for (Eigen::Index i = 0; i < g.cells; ++i)
    worst = std::max(worst, std::abs(H.xx[i] + f.values[i]));
  CHECK(worst < 1e-4);

  auto g2 = grid2(48);
  auto f2 = sample(g2, [&](double x, double y) { return std::sin(x) * std::sin(y) + std::cos(2 * x); });
  auto H2 = hessian(f2);
  auto lap2 = laplacian(f2);
  for (Eigen::Index i = 0; i < g2.size(); ++i)
    CHECK(H2.xx[i] + H2.yy[i] == lap2.values[i]); // identical stencil arithmetic

  double worst_xy = 0;
  for (Eigen::Index i = 0; i < g2.cells; ++i)
    for (Eigen::Index j = 0; j < g2.cells; ++j) {
      const double x = i * g2.spacing(), y = j * g2.spacing();
      worst_xy = std::max(worst_xy,
                          std::abs(H2.xy[i * g2.cells + j] - std::cos(x) * std::cos(y)));
    }
  CHECK(worst_xy < 1e-2); // 48^2 grid, O(h^2)
}

TEST_CASE("integrate_lp") {
  auto g = grid1(64, 3.0);
  auto c = ScalarField<double>::constant(g, 1.7);
  CHECK(integrate_lp(c, 2.5) == doctest::Approx(std::pow(1.7, 2.5) * 3.0).epsilon(1e-13));

  auto g2 = grid2(16, 3.0);
  auto c2 = ScalarField<double>::constant(g2, 1.7);
  CHECK(integrate_lp(c2, 1.0) == doctest::Approx(1.7 * 9.0).epsilon(1e-13));

  // int_0^{2pi} sin^2 = pi, spectrally accurate for periodic sampling
  auto s = sample(grid1(256), [](double x) { return std::sin(x); });
  CHECK(std::abs(integrate_lp(s, 2.0) - 3.141592653589793) < 1e-6);

  MaskArray none = MaskArray::Constant(s.values.size(), false);
  CHECK(integrate_lp(s, 2.0, none) == 0.0);

  MaskArray some = MaskArray::Constant(s.values.size(), false);
  for (Eigen::Index i = 0; i < 100; ++i) some[i] = true;
  MaskArray more = some;
  for (Eigen::Index i = 100; i < 140; ++i) more[i] = true;
  CHECK(integrate_lp(s, 2.0, some) <= integrate_lp(s, 2.0, more));
  CHECK_THROWS_AS(integrate_lp(s, 2.0, MaskArray::Constant(3, true)), std::invalid_argument);
}

TEST_CASE("shift: exactness and invariances") {
  auto g = grid1(64);
  auto f = sample(g, [](double x) { return std::exp(std::sin(x)); });

  auto same = shift(f, std::array<Eigen::Index, 2>{0, 0});
  CHECK((same.values == f.values).all());
  auto full = shift(f, std::array<Eigen::Index, 2>{64, 0});
  CHECK((full.values == f.values).all());

  auto s3 = shift(f, std::array<Eigen::Index, 2>{3, 0});
  CHECK(integrate_lp(s3, 1.0) == doctest::Approx(integrate_lp(f, 1.0)).epsilon(1e-14));

  // physical displacement must be a lattice multiple
  CHECK_THROWS_AS(shift(f, std::array<double, 2>{0.5 * g.spacing(), 0.0}), std::invalid_argument);
  auto sphys = shift(f, std::array<double, 2>{2.0 * g.spacing(), 0.0});
  auto scell = shift(f, std::array<Eigen::Index, 2>{2, 0});
  CHECK((sphys.values == scell.values).all());
}

TEST_CASE("stencils commute with shifts") {
  auto g = grid2(24);
  auto f = sample(g, [](double x, double y) { return std::sin(x + 0.3) * std::cos(2 * y); });
  const std::array<Eigen::Index, 2> off{5, 9};
  auto a = laplacian(shift(f, off));
  auto b = shift(laplacian(f), off);
  CHECK((a.values == b.values).all());
  auto ga = gradient(shift(f, off));
  auto gb = gradient(f);
  auto gbs0 = shift(ScalarField<double>{g, gb.comp[0]}, off);
  CHECK((ga.comp[0] == gbs0.values).all());
}

TEST_CASE("operators converge at order 2 under refinement") {
  auto maxerr = [&](Eigen::Index n) {
    auto g = grid2(n);
    auto f = sample(g, [](double x, double y) { return std::sin(x) * std::cos(y); });
    auto H = hessian(f);
    auto d = gradient(f);
    double w = 0;
    for (Eigen::Index i = 0; i < g.cells; ++i)
      for (Eigen::Index j = 0; j < g.cells; ++j) {
        const double x = i * g.spacing(), y = j * g.spacing();
        const Eigen::Index id = i * g.cells + j;
        w = std::max(w, std::abs(d.comp[0][id] - std::cos(x) * std::cos(y)));
        w = std::max(w, std::abs(H.xy[id] + std::cos(x) * std::sin(y)));
        w = std::max(w, std::abs(H.xx[id] + std::sin(x) * std::cos(y)));
      }
    return w;
  };
  const double order = std::log2(maxerr(32) / maxerr(64));
  CHECK(order == doctest::Approx(2.0).epsilon(0.05));
}
