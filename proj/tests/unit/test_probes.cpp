#include <algorithm>
#include <cmath>
#include <functional>

#include "doctest.h"
#include "helpers.hpp"
#include "plrecon/probes.hpp"

using namespace plr;

namespace {

double energy(const Grid& g, const EdgeCoeffs& e, const ScalarField& u) {
  return bform(g, e, u, u).real();
}

EdgeCoeffs unit_edges(const Grid& g) {
  return edge_coeffs_nodal(g, std::vector<double>(g.nodes(), 1.0));
}

}  // namespace

TEST_SUITE("probes") {

TEST_CASE("frame constants satisfy their defining integrals") {
  ProbeFrame f = ProbeFrame::make(CutoffShape::FlatTop);

  CHECK(f.eta.value(0.0) == 1.0);
  CHECK(f.eta.value(0.3) == 1.0);  // flat inside r_flat
  CHECK(f.eta.value(1.0) == 0.0);
  CHECK(f.eta.value(1.2) == 0.0);
  CHECK(f.eta.deriv(0.25) == 0.0);
  double fd = (f.eta.value(0.7 + 1e-6) - f.eta.value(0.7 - 1e-6)) / 2e-6;
  CHECK(f.eta.deriv(0.7) == doctest::Approx(fd).epsilon(1e-5));

  auto eta_sq = [&](double y) { double v = f.eta.value(y); return v * v; };
  double c_eta = 2.0 * integrate_1d(eta_sq, 0.0, 1.0, 4001);
  CHECK(f.c_eta == doctest::Approx(c_eta).epsilon(1e-8));
  CHECK(f.c_eta == doctest::Approx(1.4936741255833248).epsilon(1e-12));
  CHECK(f.eta4_amp * f.eta4_amp * f.c_eta == doctest::Approx(1.0).epsilon(1e-12));

  auto deta_sq = [&](double y) {
    double d = f.eta4_deriv(y);
    return d * d;
  };
  double ig = 2.0 * integrate_1d(deta_sq, 0.0, 1.0, 8001);
  CHECK(f.int_grad_eta4 == doctest::Approx(ig).epsilon(1e-7));
  CHECK(f.int_grad_eta4 == doctest::Approx(6.675419314576342).epsilon(1e-12));

  double fd4 = (f.eta4(0.7 + 1e-6) - f.eta4(0.7 - 1e-6)) / 2e-6;
  CHECK(f.eta4_deriv(0.7) == doctest::Approx(fd4).epsilon(1e-5));
  CHECK(f.eta4_deriv(-0.7) == doctest::Approx(-f.eta4_deriv(0.7)).epsilon(1e-12));

  CHECK(f.xi.value(0.0) == 1.0);
  CHECK(f.xi.value(1.0) == 0.0);
  double fdx = (f.xi.value(0.7 + 1e-6) - f.xi.value(0.7 - 1e-6)) / 2e-6;
  CHECK(f.xi.deriv(0.7) == doctest::Approx(fdx).epsilon(1e-5));

  ProbeFrame w = ProbeFrame::make(CutoffShape::WideTop);
  CHECK(w.eta4_amp * w.eta4_amp * w.c_eta == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(w.int_grad_eta4 == doctest::Approx(5.7162461189131679).epsilon(1e-12));
  // the wide shape ramps from 0.35 instead of 0.5: less mass, gentler slope
  CHECK(w.c_eta < f.c_eta);
  CHECK(w.int_grad_eta4 < f.int_grad_eta4);
}

TEST_CASE("exponential integral constants") {
  auto q = [](const std::function<double(double)>& f) {
    return integrate_1d(f, 0.0, 40.0, 16001);
  };
  CHECK(q([](double y) { return 2 * std::exp(-y) - std::exp(-2 * y); }) ==
        doctest::Approx(1.5).epsilon(1e-8));
  CHECK(std::abs(q([](double y) { return y * (std::exp(-y) - 2 * std::exp(-2 * y)); }) - 0.5) <
        1e-8);
  CHECK(std::abs(q([](double y) { return std::exp(-y) - 2 * std::exp(-2 * y); })) < 1e-8);
}

TEST_CASE("concentration probe: value, decay, energy scaling") {
  Grid g = th::box(257, 129);
  ProbeFrame f = ProbeFrame::make();

  ScalarField w0 = make_w0(f, g, 4.0, 8.0);
  int i0 = (g.n1 - 1) / 2;
  CHECK(std::abs(w0.at(i0, 0) - Cplx(1, 0)) < 1e-14);
  for (int j = 0; j < g.n2; ++j)
    for (int i = 0; i < g.n1; ++i)
      CHECK(std::abs(w0.at(i, j)) <= std::exp(-8.0 * g.x2(j)) + 1e-14);

  // dirichlet energy grows like N/M along the schedule
  EdgeCoeffs e1 = unit_edges(g);
  std::vector<MNSchedule::Point> pts = MNSchedule::geometric().generate(g);
  REQUIRE(pts.size() == 5);
  std::vector<double> band;
  for (auto pt : pts)
    band.push_back(pt.M / pt.N * energy(g, e1, make_w0(f, g, pt.M, pt.N)));
  double lo = *std::min_element(band.begin(), band.end());
  double hi = *std::max_element(band.begin(), band.end());
  CHECK(lo > 0.0);
  CHECK(hi / lo < 2.0);
}

TEST_CASE("corrected concentration probe is a discrete solution") {
  Grid g = th::box(257, 129);
  ProbeFrame f = ProbeFrame::make();
  ScalarField sig = ScalarField::from_fn(
      g, [](double, double x2) { return Cplx(std::exp(x2), 0); });
  ConductivityContext ctx(g, sig);
  UMParts parts = make_uM_parts(f, ctx, 4.0, 8.0);

  CHECK(parts.C == doctest::Approx(std::sqrt(4.0 / (8.0 * f.c_eta))).epsilon(1e-14));

  // trace of uM is C * w0 (corrector has zero trace)
  double tr = 0;
  for (int i = 0; i < g.n1; ++i) {
    tr = std::max(tr, std::abs(parts.uM.at(i, 0) - parts.C * parts.w0.at(i, 0)));
    tr = std::max(tr, std::abs(parts.uM.at(i, g.n2 - 1) - parts.C * parts.w0.at(i, g.n2 - 1)));
  }
  for (int j = 0; j < g.n2; ++j) {
    tr = std::max(tr, std::abs(parts.uM.at(0, j) - parts.C * parts.w0.at(0, j)));
    tr = std::max(tr, std::abs(parts.uM.at(g.n1 - 1, j) - parts.C * parts.w0.at(g.n1 - 1, j)));
  }
  CHECK(tr < 1e-12 * parts.C);

  // the corrector drops the interior residual by many orders
  std::vector<Cplx> r_um, r_w0;
  bform_rows(g, ctx.sigma_edges(), parts.uM, r_um);
  ScalarField cw0 = scale(parts.w0, parts.C);
  bform_rows(g, ctx.sigma_edges(), cw0, r_w0);
  double m_um = 0, m_w0 = 0;
  for (int j = 1; j < g.n2 - 1; ++j)
    for (int i = 1; i < g.n1 - 1; ++i) {
      m_um = std::max(m_um, std::abs(r_um[g.idx(i, j)]));
      m_w0 = std::max(m_w0, std::abs(r_w0[g.idx(i, j)]));
    }
  CHECK(m_um < 1e-6 * m_w0);

  // corrector energy fades relative to the probe as M grows
  std::vector<double> ratio;
  for (auto pt : MNSchedule::geometric().generate(g)) {
    UMParts q = make_uM_parts(f, ctx, pt.M, pt.N);
    ratio.push_back(energy(g, ctx.sigma_edges(), q.w1) /
                    energy(g, ctx.sigma_edges(), q.w0));
  }
  for (size_t k = 0; k + 1 < ratio.size(); ++k) CHECK(ratio[k + 1] < ratio[k]);
}

TEST_CASE("oscillating probes: normalization, support, concentration") {
  Grid g = th::box(257, 129);
  ProbeFrame f = ProbeFrame::make();
  double N = 16.0;
  OscParts op = make_osc_probes(f, g, N);

  int i0 = (g.n1 - 1) / 2;
  CHECK(std::abs(op.v3.at(i0, 0) - Cplx(f.eta4_amp, 0)) < 1e-14);

  // bottom trace carries exactly N^{-1/2} of squared mass
  BoundaryTrace t = BoundaryTrace::of_field(op.v3, Face::Bottom);
  for (auto& z : t.v) z = std::norm(z);
  CHECK(integrate_boundary(t).real() ==
        doctest::Approx(1.0 / std::sqrt(N)).epsilon(2e-3));

  // supports live in the N^{-1/2} corner box
  double rad = 1.0 / std::sqrt(N);
  for (int j = 0; j < g.n2; ++j)
    for (int i = 0; i < g.n1; ++i)
      if (std::abs(g.x1(i)) >= rad || g.x2(j) >= rad) {
        CHECK(std::abs(op.v3.at(i, j)) == 0.0);
        CHECK(std::abs(op.v2.at(i, j)) == 0.0);
      }

  // at larger N the gradient mass concentrates in the shallow half-box
  Grid gf = th::box(513, 257);
  OscParts hf = make_osc_probes(f, gf, 128.0);
  double split = 0.5 / std::sqrt(128.0);
  ScalarField all(gf), deep(gf);
  for (int j = 0; j < gf.n2; ++j)
    for (int i = 0; i < gf.n1; ++i) {
      int k = gf.idx(i, j);
      Cplx q = std::norm(hf.g3_probe.c1[k]) + std::norm(hf.g3_probe.c2[k]);
      all.v[k] = q;
      deep.v[k] = gf.x2(j) > split ? q : Cplx(0);
    }
  CHECK(integrate_domain(deep).real() < 1e-3 * integrate_domain(all).real());
}

TEST_CASE("oscillating correctors stay subordinate as N grows") {
  Grid g = th::box(513, 257);
  ProbeFrame f = ProbeFrame::make();
  ScalarField sig = ScalarField::from_fn(g, [](double, double) { return Cplx(1, 0); });
  ConductivityContext ctx(g, sig);

  std::vector<double> t2, comb;
  for (double N : {16.0, 32.0, 64.0, 128.0}) {
    OscParts op = make_osc_parts(f, ctx, N);
    double es = energy(g, ctx.sigma_edges(), op.s);
    double er = energy(g, ctx.sigma_edges(), op.r);
    t2.push_back(std::sqrt(N) * es);
    comb.push_back(std::sqrt(N) * std::abs(2.0 * es - er));
  }
  for (size_t k = 0; k + 1 < t2.size(); ++k) CHECK(t2[k + 1] < t2[k]);
  for (size_t k = 0; k + 1 < comb.size(); ++k) CHECK(comb[k + 1] < comb[k]);
}

TEST_CASE("resolvability refusals") {
  Grid g = th::box(257, 129);  // hmax = 1/128
  ProbeFrame f = ProbeFrame::make();

  CHECK_NOTHROW(check_resolvable(g, 0.5, 64.0));  // N hmax = 0.5 exactly
  CHECK_THROWS_AS(check_resolvable(g, 0.5, 64.1), ResolvabilityError);
  CHECK_THROWS_AS(check_resolvable(g, 1.2, 4.0), ResolvabilityError);
  CHECK_THROWS_AS(make_w0(f, g, 0.5, 4.0), ResolvabilityError);  // support 2 > room 1
}

TEST_CASE("schedules filter against the grid and explain skips") {
  MNSchedule def = MNSchedule::geometric();
  REQUIRE(def.m_values.size() == 5);

  Grid fine = th::box(257, 129);
  std::string warn;
  auto pts = def.generate(fine, &warn);
  CHECK(pts.size() == 5);
  CHECK(warn.empty());
  for (auto pt : pts)
    CHECK(pt.N == doctest::Approx(std::pow(pt.M, 1.5)).epsilon(1e-12));

  Grid coarse = th::box(65, 33);  // hmax = 1/32, N must stay <= 16
  warn.clear();
  auto few = def.generate(coarse, &warn);
  CHECK(few.size() == 3);
  CHECK(!warn.empty());

  std::string fwarn;
  std::vector<double> kept = filter_frequencies(coarse, {4, 8, 16, 32, 64}, 0.5, &fwarn);
  CHECK(kept == std::vector<double>{4, 8, 16});
  CHECK(!fwarn.empty());
}

}  // TEST_SUITE
