#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "plrecon/forward.hpp"

using namespace plr;

namespace {

double linf_vs(const ScalarField& u, Cplx (*exact)(double, double)) {
  double e = 0;
  const Grid& g = u.grid;
  for (int j = 0; j < g.n2; ++j)
    for (int i = 0; i < g.n1; ++i)
      e = std::max(e, std::abs(u.at(i, j) - exact(g.x1(i), g.x2(j))));
  return e;
}

double h1_seminorm(const ScalarField& u) {
  VectorField d = gradient(u);
  ScalarField q(u.grid);
  for (int k = 0; k < u.grid.nodes(); ++k)
    q.v[k] = std::norm(d.c1[k]) + std::norm(d.c2[k]);
  return std::sqrt(integrate_domain(q).real());
}

}  // namespace

TEST_SUITE("forward") {

TEST_CASE("conductivity solve reproduces exact discrete solutions") {
  Grid g = th::box(33, 17);

  // constant sigma: affine fields are in the stencil kernel
  ScalarField sig = th::constant(g, 1.3);
  DirichletData f = DirichletData::from_fn(g, [](double x1, double x2) {
    return Cplx(2 * x1 + x2 - 0.3, 0);
  });
  ScalarField u = solve_conductivity(g, sig, f);
  CHECK(linf_vs(u, [](double x1, double x2) { return Cplx(2 * x1 + x2 - 0.3, 0); }) < 1e-10);

  // sigma varying orthogonally to the gradient: u = x1 stays exact
  ScalarField sige = th::fn(g, [](double, double x2) { return Cplx(std::exp(x2), 0); });
  ScalarField u2 = solve_conductivity(
      g, sige, DirichletData::from_fn(g, [](double x1, double) { return Cplx(x1, 0); }));
  CHECK(linf_vs(u2, [](double x1, double) { return Cplx(x1, 0); }) < 1e-10);

  // harmonic quadratic: second differences are exact, so still in the kernel
  ScalarField u3 = solve_conductivity(
      g, th::constant(g, 1.0), DirichletData::from_fn(g, [](double x1, double x2) {
        return Cplx(x1 * x1 - x2 * x2, 0);
      }));
  CHECK(linf_vs(u3, [](double x1, double x2) { return Cplx(x1 * x1 - x2 * x2, 0); }) < 1e-9);
}

TEST_CASE("conductivity solve converges at second order") {
  // sigma = e^{x2} with u = e^{-x2}: averaged edge coefficients give the
  // constant discrete flux (1+e^h)(e^{-h}-1)/2, so nodal values are exact
  {
    Grid g = th::box(33, 17);
    ScalarField sig = th::fn(g, [](double, double x2) { return Cplx(std::exp(x2), 0); });
    ScalarField u = solve_conductivity(
        g, sig, DirichletData::from_fn(g, [](double, double x2) {
          return Cplx(std::exp(-x2), 0);
        }));
    CHECK(linf_vs(u, [](double, double x2) { return Cplx(std::exp(-x2), 0); }) < 1e-11);
  }

  // sigma = 1 + x2/2 with constant-flux solution 2 ln(1 + x2/2) is not a
  // discrete kernel element, so it measures the actual truncation order
  std::vector<double> err;
  for (int n : {33, 65, 129}) {
    Grid g = th::box(n, (n + 1) / 2);
    ScalarField sig = th::fn(g, [](double, double x2) { return Cplx(1 + 0.5 * x2, 0); });
    ScalarField u = solve_conductivity(
        g, sig, DirichletData::from_fn(g, [](double, double x2) {
          return Cplx(2 * std::log1p(0.5 * x2), 0);
        }));
    err.push_back(
        linf_vs(u, [](double, double x2) { return Cplx(2 * std::log1p(0.5 * x2), 0); }));
  }
  for (double s : th::slopes(err)) CHECK(s == doctest::Approx(2.0).epsilon(0.15));

  // harmonic quartic Re (x1 + i x2)^4
  std::vector<double> err4;
  for (int n : {33, 65, 129}) {
    Grid g = th::box(n, (n + 1) / 2);
    ScalarField u = solve_conductivity(
        g, th::constant(g, 1.0), DirichletData::from_fn(g, [](double x, double y) {
          return Cplx(x * x * x * x - 6 * x * x * y * y + y * y * y * y, 0);
        }));
    err4.push_back(linf_vs(u, [](double x, double y) {
      return Cplx(x * x * x * x - 6 * x * x * y * y + y * y * y * y, 0);
    }));
  }
  for (double s : th::slopes(err4)) CHECK(s == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("corrector vanishes on exact sources and keeps symmetry") {
  Grid g = th::box(33, 17);
  ScalarField sig = th::fn(g, [](double, double x2) { return Cplx(std::exp(x2), 0); });

  // w = x1 already solves div(sigma grad w) = 0 for sigma = sigma(x2)
  ScalarField w1 = solve_corrector(
      g, sig, th::fn(g, [](double x1, double) { return Cplx(x1, 0); }));
  double m = 0;
  for (auto z : w1.v) m = std::max(m, std::abs(z));
  CHECK(m < 1e-10);

  // even source on a symmetric grid gives an even corrector
  ScalarField w2 = solve_corrector(
      g, sig, th::fn(g, [](double x1, double) { return Cplx(x1 * x1, 0); }));
  double mx = 0, asym = 0;
  for (int j = 0; j < g.n2; ++j)
    for (int i = 0; i < g.n1; ++i) {
      mx = std::max(mx, std::abs(w2.at(i, j)));
      asym = std::max(asym, std::abs(w2.at(i, j) - w2.at(g.n1 - 1 - i, j)));
    }
  CHECK(mx > 1e-4);  // corrector is genuinely nonzero here
  CHECK(asym < 1e-11 * (1.0 + mx));
  for (int i = 0; i < g.n1; ++i) CHECK(std::abs(w2.at(i, 0)) == 0.0);
}

TEST_CASE("perturbed solve is exact on compatible affine data") {
  Grid g = th::box(33, 17);
  ProblemCoefficients c;
  c.sigma = CoeffExpr::parse("1");
  c.gamma = CoeffExpr::parse("1 + 0.25*x2");
  c.p = 3.0;
  auto [u, rep] = solve_perturbed_plaplace(
      g, c, DirichletData::from_fn(g, [](double x1, double) { return Cplx(0.7 * x1, 0); }),
      SolverOptions{});
  CHECK(rep.converged);
  CHECK(linf_vs(u, [](double x1, double) { return Cplx(0.7 * x1, 0); }) < 1e-9);

  auto [z, zrep] = solve_perturbed_plaplace(g, c, DirichletData::zero(g), SolverOptions{});
  CHECK(zrep.converged);
  double m = 0;
  for (auto v : z.v) m = std::max(m, std::abs(v));
  CHECK(m < 1e-13);
}

TEST_CASE("p = 2 reduces to a conductivity solve with sigma + gamma") {
  Grid g = th::box(33, 17);
  ProblemCoefficients c;
  c.sigma = CoeffExpr::parse("1 + 0.25*x2");
  c.gamma = CoeffExpr::parse("1 + 0.25*x1");
  c.p = 2.0;
  DirichletData f = DirichletData::from_fn(g, [](double x1, double x2) {
    return Cplx(x1 + x2 * x2, 0);
  });
  auto [u, rep] = solve_perturbed_plaplace(g, c, f, SolverOptions{});
  CHECK(rep.converged);
  ScalarField total = th::fn(g, [](double x1, double x2) {
    return Cplx(2 + 0.25 * x1 + 0.25 * x2, 0);
  });
  ScalarField v = solve_conductivity(g, total, f);
  CHECK(th::max_abs_diff(u, v) < 1e-9);
}

TEST_CASE("solve tracks the 1-d constant-flux profile at second order") {
  // sigma = e^{x2}, gamma = 1, p = 3: g'(t) solves e^t s + s^2 = 2, so the
  // layered profile g(x2) = int_0^{x2} (sqrt(e^{2t} + 8) - e^t)/2 dt is an
  // exact solution independent of x1
  auto slope = [](double t) { return 0.5 * (std::sqrt(std::exp(2 * t) + 8.0) - std::exp(t)); };
  auto profile = [&](double x2) { return integrate_1d(slope, 0.0, x2, 401); };

  ProblemCoefficients c;
  c.sigma = CoeffExpr::parse("exp(x2)");
  c.gamma = CoeffExpr::parse("1");
  c.p = 3.0;
  std::vector<double> err;
  for (int n : {33, 65}) {
    Grid g = th::box(n, (n + 1) / 2);
    DirichletData f = DirichletData::from_fn(
        g, [&](double, double x2) { return Cplx(profile(x2), 0); });
    auto [u, rep] = solve_perturbed_plaplace(g, c, f, SolverOptions{});
    REQUIRE(rep.converged);
    double e = 0;
    for (int j = 0; j < g.n2; ++j)
      for (int i = 0; i < g.n1; ++i)
        e = std::max(e, std::abs(u.at(i, j) - profile(g.x2(j))));
    err.push_back(e);
  }
  CHECK(th::slopes(err)[0] >= 1.5);
}

TEST_CASE("picard fixed point matches an independent energy minimization") {
  Grid g = th::box(13, 7);
  ScalarField sig = th::constant(g, 1.0);
  ScalarField gam = th::constant(g, 1.0);
  const double p = 3.0;
  DirichletData f = DirichletData::from_fn(g, [](double x1, double) {
    return Cplx(x1 * x1, 0);
  });
  PlaplaceSolution sol = solve_plaplace_fields(g, sig, gam, p, f, SolverOptions{});
  REQUIRE(sol.report.converged);
  std::vector<double> sn = real_nodal(sig, "sigma");
  std::vector<double> gn = real_nodal(gam, "gamma");
  const double delta = sol.delta;
  double e_pic = plaplace_energy(g, sn, gn, p, delta, sol.u);

  // projected gradient descent with Armijo backtracking from the linear solve;
  // the energy gradient at interior nodes is exactly bform_rows of the
  // current-iterate edge weights
  ScalarField u = solve_conductivity(g, sig, f);
  double e_cur = plaplace_energy(g, sn, gn, p, delta, u);
  std::vector<Cplx> r;
  for (int it = 0; it < 5000; ++it) {
    EdgeCoeffs e = edge_coeffs_plaplace(g, sn, gn, p, delta, u);
    bform_rows(g, e, u, r);
    double g2 = 0;
    for (int j = 1; j < g.n2 - 1; ++j)
      for (int i = 1; i < g.n1 - 1; ++i) g2 += std::norm(r[g.idx(i, j)]);
    if (g2 < 1e-26) break;
    double step = 1.0;
    for (;;) {
      ScalarField t = u;
      for (int j = 1; j < g.n2 - 1; ++j)
        for (int i = 1; i < g.n1 - 1; ++i) t.v[g.idx(i, j)] -= step * r[g.idx(i, j)];
      double e_t = plaplace_energy(g, sn, gn, p, delta, t);
      if (e_t <= e_cur - 1e-4 * step * g2 || step < 1e-14) {
        u = t;
        e_cur = e_t;
        break;
      }
      step *= 0.5;
    }
  }
  CHECK(std::abs(e_cur - e_pic) <= 1e-6 * std::abs(e_pic));
  CHECK(e_cur >= e_pic - 1e-9 * std::abs(e_pic));
}

TEST_CASE("small-data response scales quadratically for p = 3") {
  Grid g = th::box(33, 17);
  ProblemCoefficients c;
  c.sigma = CoeffExpr::parse("1");
  c.gamma = CoeffExpr::parse("1");
  c.p = 3.0;
  DirichletData base = DirichletData::from_fn(g, [](double x1, double x2) {
    return Cplx(x1 * x1 - x2 * x2 + 0.5 * x1, 0);
  });
  ScalarField u0 = solve_conductivity(g, th::constant(g, 1.0), base);
  std::vector<double> ratio;
  for (double eps : {0.05, 0.1, 0.2}) {
    auto [ue, rep] = solve_perturbed_plaplace(g, c, base.scaled(eps), SolverOptions{});
    REQUIRE(rep.converged);
    ScalarField d = sub(ue, scale(u0, eps));
    ratio.push_back(h1_seminorm(d) / (eps * eps));
  }
  double lo = *std::min_element(ratio.begin(), ratio.end());
  double hi = *std::max_element(ratio.begin(), ratio.end());
  CHECK(lo > 0.0);
  CHECK(hi / lo < 2.0);
}

TEST_CASE("regularization parameter handling") {
  Grid g = th::box(17, 9);
  ProblemCoefficients c;
  c.sigma = CoeffExpr::parse("1");
  c.gamma = CoeffExpr::parse("1");
  c.p = 1.5;
  DirichletData f = DirichletData::from_fn(g, [](double x1, double) {
    return Cplx(x1 + 0.3 * x1 * x1, 0);
  });

  SolverOptions bad;
  bad.delta = 0.0;
  CHECK_THROWS_AS(solve_perturbed_plaplace(g, c, f, bad), std::invalid_argument);

  auto [u, rep] = solve_perturbed_plaplace(g, c, f, SolverOptions{});
  CHECK(rep.converged);

  // away from degenerate gradients the delta choice barely matters
  SolverOptions a, b;
  a.delta = 1e-4;
  b.delta = 5e-5;
  auto [ua, ra] = solve_perturbed_plaplace(g, c, f, a);
  auto [ub, rb] = solve_perturbed_plaplace(g, c, f, b);
  REQUIRE(ra.converged);
  REQUIRE(rb.converged);
  CHECK(th::max_abs_diff(ua, ub) < 1e-6);
}

}  // TEST_SUITE
