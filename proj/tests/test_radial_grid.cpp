#include "qlnd/radial_grid.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

using namespace qlnd;

TEST_CASE("make_grid spacing and nodes") {
  const RadialGrid g = make_grid(2, 10.0, 1001);
  CHECK(g.h() == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(g.r(0) == 0.0);
  CHECK(g.r(g.nodes() - 1) == doctest::Approx(10.0).epsilon(1e-15));

  const RadialGrid u = make_grid(1, 1.0, 17);
  for (std::size_t j = 0; j < u.nodes(); ++j)
    CHECK(u.r(j) == static_cast<double>(j) / 16.0);
}

TEST_CASE("make_grid rejects bad input") {
  CHECK_THROWS_AS(make_grid(3, 0.0, 100), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(3, -1.0, 100), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(1, 1.0, 16), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(0, 1.0, 100), std::invalid_argument);
}

TEST_CASE("GridFunction validates length and finiteness") {
  const RadialGrid g = make_grid(1, 1.0, 17);
  CHECK_THROWS_AS(GridFunction(g, std::vector<double>(16, 0.0)), std::invalid_argument);
  std::vector<double> v(17, 1.0);
  v[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(GridFunction(g, v), std::invalid_argument);
}

TEST_CASE("quad_weighted analytic cases") {
  CHECK(quad_weighted(GridFunction::sample(make_grid(1, 1.0, 17), [](double) { return 1.0; })) ==
        doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(quad_weighted(GridFunction::sample(make_grid(2, 1.0, 1001), [](double r) { return r; })) -
                 1.0 / 3.0) < 1e-6);
  // Trapezoid error here is h²/6, so h = 1e-4.
  CHECK(std::abs(quad_weighted(GridFunction::sample(make_grid(1, 30.0, 300001),
                                                    [](double r) { return std::exp(-2.0 * r); })) -
                 0.5) < 1e-8);
}

TEST_CASE("quad_weighted is linear and monotone") {
  const RadialGrid g = make_grid(3, 5.0, 201);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    GridFunction f(g), h(g), sum(g);
    const double a = d(rng) * 4 - 2, b = d(rng) * 4 - 2;
    for (std::size_t j = 0; j < g.nodes(); ++j) {
      f[j] = d(rng);
      h[j] = d(rng) - 0.5;
      sum[j] = a * f[j] + b * h[j];
    }
    CHECK(quad_weighted(sum) == doctest::Approx(a * quad_weighted(f) + b * quad_weighted(h)).epsilon(1e-12));
    CHECK(quad_weighted(f) >= 0.0);
  }
}

TEST_CASE("quadrature is second order on a smooth decaying function") {
  auto f = [](double r) { return std::exp(-r * r) * (1.0 + r); };
  // ∫_0^∞ e^{-r²}(1+r) r dr = 1/2 + √π/4, truncation at R = 8 is below 1e-27.
  const double exact = 0.5 + std::sqrt(M_PI) / 4.0;
  const double e1 = std::abs(quad_weighted(GridFunction::sample(make_grid(2, 8.0, 41), f)) - exact);
  const double e2 = std::abs(quad_weighted(GridFunction::sample(make_grid(2, 8.0, 81), f)) - exact);
  const double e3 = std::abs(quad_weighted(GridFunction::sample(make_grid(2, 8.0, 161), f)) - exact);
  CHECK(e1 / e2 >= 3.5);
  CHECK(e2 / e3 >= 3.5);
}

TEST_CASE("extrapolated quadrature is far more accurate") {
  auto f = [](double r) { return std::exp(-r * r) * (1.0 + r); };
  const double exact = 0.5 + std::sqrt(M_PI) / 4.0;
  const GridFunction s = GridFunction::sample(make_grid(2, 8.0, 161), f);
  CHECK(std::abs(quad_weighted_extrapolated(s) - exact) < 1e-2 * std::abs(quad_weighted(s) - exact));
  CHECK_THROWS_AS(quad_weighted_extrapolated(GridFunction::sample(make_grid(2, 8.0, 160), f)),
                  std::invalid_argument);
}

TEST_CASE("fd_derivative exactness and accuracy") {
  const RadialGrid g = make_grid(2, 3.0, 31);
  const GridFunction d = fd_derivative(GridFunction::sample(g, [](double r) { return r * r; }));
  for (std::size_t j = 0; j < g.nodes(); ++j)
    CHECK(d[j] == doctest::Approx(2.0 * g.r(j)).epsilon(1e-12));

  const GridFunction c = fd_derivative(GridFunction::sample(g, [](double) { return 4.2; }));
  for (double v : c.values)
    CHECK(std::abs(v) < 1e-12);

  const RadialGrid fine = make_grid(1, 6.0, 601);
  const GridFunction s = fd_derivative(GridFunction::sample(fine, [](double r) { return std::sin(r); }));
  double err = 0.0;
  for (std::size_t j = 0; j < fine.nodes(); ++j)
    err = std::max(err, std::abs(s[j] - std::cos(fine.r(j))));
  CHECK(err < 1e-4);
}

TEST_CASE("cell masses integrate r^{N-1} exactly") {
  for (int n : {1, 2, 3, 5}) {
    const RadialGrid g = make_grid(n, 2.0, 65);
    double total = 0.0;
    for (std::size_t j = 0; j < g.nodes(); ++j) {
      CHECK(g.cell_mass(j) > 0.0);
      total += g.cell_mass(j);
    }
    CHECK(total == doctest::Approx(std::pow(2.0, n) / n).epsilon(1e-13));
  }
}

TEST_CASE("coarsen and refine") {
  const RadialGrid g = make_grid(2, 4.0, 101);
  CHECK(g.refined().nodes() == 201);
  CHECK(g.refined().h() == doctest::Approx(g.h() / 2));
  CHECK(g.coarsened().nodes() == 51);
  CHECK(g.refined().coarsened() == g);
  CHECK_THROWS_AS(make_grid(2, 4.0, 100).coarsened(), std::invalid_argument);

  const GridFunction f = GridFunction::sample(g, [](double r) { return r; });
  const GridFunction c = f.coarsened();
  CHECK(c.size() == 51);
  CHECK(c[10] == f[20]);
}
