#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "plrecon/grid.hpp"

using namespace plr;

TEST_SUITE("grid") {

TEST_CASE("make rejects degenerate axes and checks x0 coverage") {
  CHECK_THROWS_AS(Grid::make(-1, 1, 1, 2, 5), std::invalid_argument);
  CHECK_THROWS_AS(Grid::make(-1, 1, 1, 5, 2), std::invalid_argument);
  CHECK_THROWS_AS(Grid::make(0.5, 1, 1, 5, 5), std::invalid_argument);
  CHECK_THROWS_AS(Grid::make(-1, 1, 0, 5, 5), std::invalid_argument);
  Grid g = th::box(9, 5);
  CHECK(g.h1 == doctest::Approx(0.25));
  CHECK(g.h2 == doctest::Approx(0.25));
  CHECK(g.x1_min + (g.n1 - 1) * g.h1 == doctest::Approx(g.x1_max));
}

TEST_CASE("gradient of constants and affine fields is exact") {
  Grid g = th::box(17, 9);
  VectorField z = gradient(th::constant(g, Cplx(5.0, -2.0)));
  for (int k = 0; k < g.nodes(); ++k) {
    CHECK(std::abs(z.c1[k]) < 1e-14);
    CHECK(std::abs(z.c2[k]) < 1e-14);
  }
  VectorField a = gradient(th::fn(g, [](double x1, double) { return Cplx(x1, 0); }));
  for (int k = 0; k < g.nodes(); ++k) {
    CHECK(std::abs(a.c1[k] - 1.0) < 1e-13);
    CHECK(std::abs(a.c2[k]) < 1e-13);
  }
  CHECK_THROWS_AS(gradient(ScalarField(Grid())), std::invalid_argument);
}

TEST_CASE("gradient converges at second order on sin(x1)") {
  std::vector<double> err;
  for (int n : {17, 33, 65, 129, 257}) {
    Grid g = th::box(n, 5);
    VectorField dv = gradient(th::fn(g, [](double x1, double) {
      return Cplx(std::sin(x1), 0);
    }));
    double e = 0;
    for (int j = 0; j < g.n2; ++j)
      for (int i = 0; i < g.n1; ++i)
        e = std::max(e, std::abs(dv.c1[g.idx(i, j)] - std::cos(g.x1(i))));
    err.push_back(e);
  }
  for (double s : th::slopes(err)) CHECK(s == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("domain integral: area, linear moment, boundary layer") {
  Grid g = th::box(65, 33);
  CHECK(integrate_domain(th::constant(g, 1.0)).real() == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(integrate_domain(th::fn(g, [](double, double x2) { return Cplx(x2, 0); })).real() ==
        doctest::Approx(1.0).epsilon(1e-13));

  // exp(-2N x2): closed form (1 - e^{-2N})/N; N * value tends to 1
  for (double N : {2.0, 4.0, 8.0}) {
    Grid fine = th::box(65, 1025);
    ScalarField u = ScalarField::from_fn(fine, [N](double, double x2) {
      return Cplx(std::exp(-2.0 * N * x2), 0);
    });
    double val = integrate_domain(u).real();
    double exact = (1.0 - std::exp(-2.0 * N)) / N;
    CHECK(val == doctest::Approx(exact).epsilon(1e-3));
    if (N == 8.0) CHECK(N * val == doctest::Approx(1.0).epsilon(2e-3));
  }
}

TEST_CASE("boundary integral on the bottom face") {
  Grid g = th::box(65, 33);
  BoundaryTrace one = BoundaryTrace::from_fn(g, Face::Bottom,
                                             [](double, double) { return Cplx(1, 0); });
  CHECK(integrate_boundary(one).real() == doctest::Approx(2.0).epsilon(1e-13));
  BoundaryTrace lin = BoundaryTrace::from_fn(g, Face::Bottom,
                                             [](double x1, double) { return Cplx(x1, 0); });
  CHECK(std::abs(integrate_boundary(lin)) < 1e-13);

  ScalarField u = th::fn(g, [](double x1, double x2) { return Cplx(x1 + x2, 0); });
  BoundaryTrace t = BoundaryTrace::of_field(u, Face::Bottom);
  for (int i = 0; i < g.n1; ++i) CHECK(t.v[i] == u.at(i, 0));
}

TEST_CASE("discrete product rule is exact for affine factors") {
  Grid g = th::box(33, 17);
  VectorField du = gradient(th::fn(g, [](double x1, double x2) { return Cplx(2 * x1 + x2, 0); }));
  VectorField dw = gradient(th::fn(g, [](double x1, double x2) { return Cplx(x1 - 3 * x2, 0); }));
  ScalarField dot(g);
  for (int k = 0; k < g.nodes(); ++k)
    dot.v[k] = du.c1[k] * std::conj(dw.c1[k]) + du.c2[k] * std::conj(dw.c2[k]);
  CHECK(integrate_domain(dot).real() == doctest::Approx(-2.0).epsilon(1e-13));
}

TEST_CASE("quadrature error decays at second order") {
  std::vector<double> err;
  double exact = (std::exp(1.0) - std::exp(-1.0));
  for (int n : {9, 17, 33, 65}) {
    Grid g = th::box(n, 9);
    double v = integrate_domain(th::fn(g, [](double x1, double) {
      return Cplx(std::exp(x1), 0);
    })).real();
    err.push_back(std::abs(v - exact));
  }
  for (double s : th::slopes(err)) CHECK(s == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("simpson quadratures are exact on low-degree polynomials") {
  Grid g = th::box(5, 5);
  ScalarField q = th::fn(g, [](double, double x2) { return Cplx(x2 * x2, 0); });
  CHECK(integrate_domain_simpson(q).real() == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(integrate_1d([](double x) { return x * x * x; }, 0, 1, 3) ==
        doctest::Approx(0.25).epsilon(1e-14));
  // 3/8-rule tail engages on even node counts
  double v = integrate_1d([](double x) { return x * x; }, 0, 1, 4);
  CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
}

TEST_CASE("field helpers keep values finite and consistent") {
  Grid g = th::box(5, 5);
  ScalarField a = th::fn(g, [](double x1, double x2) { return Cplx(x1, x2); });
  ScalarField b = th::constant(g, Cplx(1, 1));
  ScalarField s = add(a, b);
  CHECK(s.at(0, 0) == a.at(0, 0) + Cplx(1, 1));
  ScalarField d = sub(s, b);
  CHECK(th::max_abs_diff(d, a) < 1e-15);
  ScalarField sc = scale(a, Cplx(0, 2));
  CHECK(sc.at(4, 4) == Cplx(0, 2) * a.at(4, 4));
  ScalarField ax = axpy(Cplx(2, 0), a, b);
  CHECK(ax.at(2, 3) == 2.0 * a.at(2, 3) + b.at(2, 3));
  CHECK(a.conjugated().at(1, 2) == std::conj(a.at(1, 2)));
  CHECK(!a.is_real(1e-12));
  CHECK(a.real_part().is_real(0.0));
}

}  // TEST_SUITE
