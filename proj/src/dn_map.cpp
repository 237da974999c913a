#include "plrecon/dn_map.hpp"

#include <cmath>
#include <random>

namespace plr {

std::vector<double> EpsSchedule::values() const {
  std::vector<double> v(count);
  double e = eps0;
  for (int k = 0; k < count; ++k, e *= ratio) v[k] = e;
  return v;
}

DnOracle::DnOracle(const Grid& g, const ProblemCoefficients& c,
                   const SolverOptions& opts)
    : grid_(g), p_(c.p), opts_(opts) {
  BoundsReport br = validate_bounds(c, g);
  if (!br.ok) throw std::invalid_argument("coefficient bounds: " + br.message);
  sigma_field_ = sample(c.sigma, g);
  sigma_ = real_nodal(sigma_field_, "sigma");
  gamma_ = real_nodal(sample(c.gamma, g), "gamma");
  lift_ = std::make_unique<ConductivityContext>(g, sigma_field_);
}

const DnOracle::Entry& DnOracle::solution_for(const DirichletData& f) const {
  uint64_t k = f.key();
  auto it = cache_.find(k);
  if (it != cache_.end()) return it->second;

  // conjugate data solves to the conjugate solution (real coefficients)
  uint64_t kc = f.conjugated().key();
  auto itc = cache_.find(kc);
  Entry e;
  if (itc != cache_.end() && kc != k) {
    e.u = itc->second.u.conjugated();
    e.edges = itc->second.edges;  // weights depend on |grad u| only
  } else {
    ScalarField guess = lift_->solve(f);
    ScalarField sf(grid_), gf(grid_);
    for (int n = 0; n < grid_.nodes(); ++n) {
      sf.v[n] = sigma_[n];
      gf.v[n] = gamma_[n];
    }
    PlaplaceSolution sol =
        solve_plaplace_fields(grid_, sf, gf, p_, f, opts_, &guess);
    ++solves_;
    if (!sol.report.converged)
      throw SolveError("forward solve did not converge (residual " +
                       std::to_string(sol.report.residual) + " after " +
                       std::to_string(sol.report.iterations) + " iterations)");
    e.u = std::move(sol.u);
    e.edges = std::move(sol.final_edges);
  }
  while (order_.size() >= 48) {
    cache_.erase(order_.front());
    order_.pop_front();
  }
  order_.push_back(k);
  return cache_.emplace(k, std::move(e)).first->second;
}

Cplx DnOracle::pair_nonlinear(const DirichletData& f,
                              const ScalarField& w) const {
  if (f.is_zero()) return Cplx(0.0);
  const Entry& e = solution_for(f);
  return bform(grid_, e.edges, e.u, w);
}

Cplx pair_nonlinear(const DnOracle& o, const DirichletData& f,
                    const ScalarField& w) {
  return o.pair_nonlinear(f, w);
}

Cplx pair_linear(const ScalarField& u0, const ScalarField& sigma,
                 const ScalarField& w) {
  EdgeCoeffs e = edge_coeffs_nodal(u0.grid, real_nodal(sigma, "sigma"));
  return bform(u0.grid, e, u0, w);
}

LimitSeries extract_linear_dn(const DnOracle& o, const DirichletData& f,
                              const ScalarField& w, const EpsSchedule& s) {
  double p = o.p();
  if (p == 2.0) throw std::invalid_argument("extract_linear_dn requires p != 2");
  LimitSeries raw;
  for (double eps : s.values()) {
    Cplx v;
    if (p > 2.0)
      v = o.pair_nonlinear(f.scaled(eps), w) / eps;
    else
      v = o.pair_nonlinear(f.scaled(1.0 / eps), w) * eps;
    raw.push(eps, v);
  }
  return extrapolate(raw, std::abs(p - 2.0));
}

LimitSeries extract_I(const DnOracle& o, const DirichletData& f,
                      const ScalarField& w, const ConductivityContext& sigma_ctx,
                      const EpsSchedule& s) {
  double p = o.p();
  if (p == 2.0) throw std::invalid_argument("extract_I requires p != 2");
  ScalarField u0 = sigma_ctx.solve(f);
  Cplx lin = bform(o.grid(), sigma_ctx.sigma_edges(), u0, w);
  LimitSeries raw;
  for (double eps : s.values()) {
    Cplx v;
    if (p > 2.0) {
      Cplx kstar = o.pair_nonlinear(f.scaled(eps), w) - eps * lin;
      v = kstar * std::pow(eps, 1.0 - p);
    } else {
      Cplx lstar = o.pair_nonlinear(f.scaled(1.0 / eps), w) - lin / eps;
      v = lstar * std::pow(eps, p - 1.0);
    }
    raw.push(eps, v);
  }
  return extrapolate(raw, std::abs(p - 2.0));
}

LimitSeries extract_I(const DnOracle& o, const DirichletData& f,
                      const ScalarField& w, const ScalarField& sigma,
                      const EpsSchedule& s) {
  ConductivityContext ctx(o.grid(), sigma);
  return extract_I(o, f, w, ctx, s);
}

double esti01_max_ratio(double p, int samples, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  auto draw = [&]() {
    return std::array<Cplx, 2>{Cplx(uni(rng), uni(rng)),
                               Cplx(uni(rng), uni(rng))};
  };
  double worst = 0.0;
  int accepted = 0;
  while (accepted < samples) {
    auto x = draw();
    auto y = draw();
    double nx = std::sqrt(std::norm(x[0]) + std::norm(x[1]));
    double ny = std::sqrt(std::norm(y[0]) + std::norm(y[1]));
    double nd = std::sqrt(std::norm(x[0] - y[0]) + std::norm(x[1] - y[1]));
    if (nd < 1e-12) continue;  // ratio undefined for coincident pairs
    ++accepted;
    double ax = std::pow(nx, p - 2.0), ay = std::pow(ny, p - 2.0);
    Cplx d0 = ax * x[0] - ay * y[0], d1 = ax * x[1] - ay * y[1];
    double num = std::sqrt(std::norm(d0) + std::norm(d1));
    double den = std::pow(nx + ny, p - 2.0) * nd;
    if (den > 0.0) worst = std::max(worst, num / den);
  }
  return worst;
}

}  // namespace plr
