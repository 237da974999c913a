#include <cmath>
#include <optional>

#include "doctest.h"
#include "helpers.hpp"
#include "plrecon/reconstruct.hpp"

using namespace plr;

namespace {

LimitSeries geometric_series(double a, double b, double q) {
  LimitSeries raw;
  for (int k = 0; k < 6; ++k) {
    double t = 0.1 * std::pow(0.5, k);
    raw.push(t, Cplx(a + b * std::pow(t, q), 0));
  }
  return raw;
}

PipelineSetup make_setup(const Grid& g, const ProblemCoefficients& pc) {
  PipelineSetup s;
  s.grid = g;
  s.truth = &pc;
  s.sigma = sample(pc.sigma, g);
  return s;
}

}  // namespace

TEST_SUITE("reconstruct") {

TEST_CASE("extrapolation nails an exact geometric series") {
  LimitSeries raw = geometric_series(3.0, 2.0, 1.0);

  LimitSeries hinted = extrapolate(raw, 1.0);
  CHECK(hinted.fitted);
  CHECK(hinted.confident);
  CHECK(!hinted.richardson_used);
  CHECK(hinted.limit().real() == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(hinted.b.real() == doctest::Approx(2.0).epsilon(1e-9));

  LimitSeries freeq = extrapolate(raw, std::nullopt);
  CHECK(freeq.confident);
  CHECK(freeq.q == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(freeq.limit().real() == doctest::Approx(3.0).epsilon(1e-8));
}

TEST_CASE("extrapolation tolerates small perturbations") {
  LimitSeries raw;
  for (int k = 0; k < 6; ++k) {
    double t = 0.1 * std::pow(0.5, k);
    raw.push(t, Cplx(3.0 + 2.0 * t + (k % 2 ? 1e-6 : -1e-6), 0));
  }
  LimitSeries fit = extrapolate(raw, 1.0);
  CHECK(fit.confident);
  CHECK(std::abs(fit.limit().real() - 3.0) < 1e-5);
}

TEST_CASE("extrapolation flags and refuses non-convergent input") {
  // oscillating series: no usable decay rate
  LimitSeries osc;
  for (int k = 0; k < 6; ++k)
    osc.push(0.1 * std::pow(0.5, k), Cplx(3.0 + (k % 2 ? 1.0 : -1.0), 0));
  CHECK_THROWS_AS(extrapolate(osc, std::nullopt), ExtrapolationError);
  LimitSeries forced = extrapolate(osc, 1.0);
  CHECK(!forced.confident);

  LimitSeries few;
  few.push(0.1, Cplx(1, 0));
  few.push(0.05, Cplx(1.1, 0));
  few.push(0.025, Cplx(1.15, 0));
  CHECK_THROWS_AS(extrapolate(few, 1.0), ExtrapolationError);

  LimitSeries dup = geometric_series(3.0, 2.0, 1.0);
  dup.push(dup.param[2], dup.value[2]);
  CHECK_THROWS_AS(extrapolate(dup, 1.0), ExtrapolationError);

  LimitSeries nan = geometric_series(3.0, 2.0, 1.0);
  nan.value[1] = Cplx(std::nan(""), 0);
  CHECK_THROWS_AS(extrapolate(nan, 1.0), ExtrapolationError);

  LimitSeries neg = geometric_series(3.0, 2.0, 1.0);
  neg.param[1] = -neg.param[1];
  CHECK_THROWS_AS(extrapolate(neg, 1.0), ExtrapolationError);
}

TEST_CASE("flat series extrapolate to their common value") {
  LimitSeries flat;
  for (int k = 0; k < 5; ++k) flat.push(0.1 * std::pow(0.5, k), Cplx(7, 0));
  LimitSeries fit = extrapolate(flat, 0.5);
  CHECK(fit.confident);
  CHECK(fit.limit().real() == doctest::Approx(7.0).epsilon(1e-14));
}

TEST_CASE("a misfitting rate hint triggers the richardson cross-check") {
  // sqrt decay fitted with q = 2 cannot follow the series
  LimitSeries raw = geometric_series(3.0, 1.0, 0.5);
  LimitSeries fit = extrapolate(raw, 2.0);
  CHECK(fit.fitted);
  CHECK(!fit.confident);
  CHECK(fit.richardson_used);
  CHECK(std::isfinite(fit.richardson.real()));
}

TEST_CASE("x0 must be an interior bottom node") {
  Grid g = th::box(257, 129);
  int i0 = x0_node(g);
  CHECK(g.x1(i0) == doctest::Approx(0.0));
  CHECK(i0 == 128);

  Grid off = Grid::make(-1, 1, 1, 4, 5);  // nodes at -1, -1/3, 1/3, 1
  CHECK_THROWS_AS(x0_node(off), std::invalid_argument);
}

TEST_CASE("sigma recovery from concentration series (oracle)") {
  Grid g = th::box(257, 129);
  MNSchedule sched = MNSchedule::geometric();

  ProblemCoefficients flat;
  flat.sigma = CoeffExpr::parse("1");
  flat.gamma = CoeffExpr::parse("1");
  flat.p = 3.0;
  PipelineSetup s = make_setup(g, flat);
  ReconstructionReport r = reconstruct_sigma_at(s, sched, Mode::Oracle);
  CHECK(r.pipeline == "sigma");
  CHECK(r.has_truth);
  CHECK(r.truth_value == doctest::Approx(1.0));
  CHECK(std::abs(r.recovered - 1.0) < 0.05);

  // raw energies carry the probe's O(1/M) flank defect; the per-M error has
  // to shrink along the schedule and mostly cancel in the fit
  double prev = 1e9;
  for (const Cplx& v : r.series.value) {
    double e = std::abs(v.real() - 1.0);
    CHECK(e < prev);
    prev = e;
  }
  CHECK(std::abs(r.recovered - 1.0) < 0.5 * std::abs(r.series.value.back().real() - 1.0));

  // on the finer grid the defect fit is clean enough for 2% even though the
  // finest raw energy is still ~7% high
  Grid gf = th::box(513, 257);
  PipelineSetup sf = make_setup(gf, flat);
  ReconstructionReport rf = reconstruct_sigma_at(sf, sched, Mode::Oracle);
  CHECK(std::abs(rf.recovered - 1.0) < 0.02);

  ProblemCoefficients tilt;
  tilt.sigma = CoeffExpr::parse("1 + 0.5*x1 + 0.25*x2");
  tilt.gamma = CoeffExpr::parse("1");
  tilt.p = 3.0;
  PipelineSetup s2 = make_setup(g, tilt);
  ReconstructionReport r2 = reconstruct_sigma_at(s2, sched, Mode::Oracle);
  CHECK(std::abs(r2.recovered - 1.0) < 0.05);

  ProblemCoefficients layer;
  layer.sigma = CoeffExpr::parse("exp(x2)");
  layer.gamma = CoeffExpr::parse("1");
  layer.p = 3.0;
  PipelineSetup s3 = make_setup(g, layer);
  ReconstructionReport r3 = reconstruct_sigma_at(s3, sched, Mode::Oracle);
  CHECK(std::abs(r3.recovered - 1.0) < 0.05);
}

TEST_CASE("gamma recovery at x0 (oracle)") {
  Grid g = th::box(257, 129);
  ProblemCoefficients pc;
  pc.sigma = CoeffExpr::parse("1");
  pc.gamma = CoeffExpr::parse("2");
  pc.p = 3.0;
  PipelineSetup s = make_setup(g, pc);
  DirichletData u1 = DirichletData::from_fn(g, [](double x1, double) {
    return Cplx(x1, 0);
  });

  ReconstructionReport r = reconstruct_gamma_at(s, u1, MNSchedule::geometric(), Mode::Oracle);
  CHECK(r.pipeline == "gamma");
  CHECK(std::abs(r.recovered - 2.0) < 0.05 * 2.0);
  CHECK(r.grad_u1_x0 == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(r.weight_x0 == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(r.recovered == doctest::Approx(r.beta_x0 / r.weight_x0).epsilon(1e-12));
  CHECK(r.has_truth);
  CHECK(r.rel_error < 0.05);
  // the schedule walks toward the point value
  double first = std::abs(r.series.value.front().real() - 2.0);
  double last = std::abs(r.series.value.back().real() - 2.0);
  CHECK(last < first);

  CHECK_THROWS_AS(
      reconstruct_gamma_at(s, DirichletData::zero(g), MNSchedule::geometric(), Mode::Oracle),
      std::invalid_argument);
}

}  // TEST_SUITE
