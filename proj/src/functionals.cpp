#include "plrecon/functionals.hpp"

#include <cmath>
#include <stdexcept>

namespace plr {

namespace {

// hermitian squared magnitude of a gradient pair
inline double herm_sq(Cplx a, Cplx b) { return std::norm(a) + std::norm(b); }

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!a.same_as(b)) throw std::invalid_argument(std::string(what) + ": fields live on different grids");
}

}  // namespace

IEvaluator IEvaluator::oracle(const ScalarField& gamma, double p) {
  IEvaluator e;
  e.oracle_mode_ = true;
  e.p_ = p;
  e.gamma_ = gamma;
  gamma.check_finite("gamma");
  if (!gamma.is_real(0.0)) throw std::invalid_argument("gamma must be real-valued");
  return e;
}

IEvaluator IEvaluator::inverse(const DnOracle* o, const ScalarField& sigma,
                               const EpsSchedule& eps) {
  if (!o) throw std::invalid_argument("inverse IEvaluator needs a measurement map");
  IEvaluator e;
  e.oracle_mode_ = false;
  e.p_ = o->p();
  e.dn_ = o;
  e.sigma_ctx_ = std::make_shared<ConductivityContext>(o->grid(), sigma);
  e.eps_ = eps;
  return e;
}

const ScalarField& IEvaluator::gamma_field() const {
  if (!oracle_mode_) throw std::logic_error("gamma is not available in inverse mode");
  return gamma_;
}

Cplx IEvaluator::eval_I(const ScalarField& u0, const ScalarField& w) const {
  if (oracle_mode_) {
    const Grid& g = u0.grid;
    require_same_grid(g, w.grid, "eval_I");
    require_same_grid(g, gamma_.grid, "eval_I");
    VectorField g0 = gradient(u0), gw = gradient(w);
    ScalarField f(g);
    double ex = (p_ - 2.0) / 2.0;
    for (std::size_t k = 0; k < f.v.size(); ++k) {
      double m2 = herm_sq(g0.c1[k], g0.c2[k]);
      Cplx dot = g0.c1[k] * std::conj(gw.c1[k]) + g0.c2[k] * std::conj(gw.c2[k]);
      f.v[k] = gamma_.v[k].real() * std::pow(m2, ex) * dot;
    }
    return integrate_domain_simpson(f);
  }
  return eval_I_data(DirichletData::from_field(u0), w);
}

Cplx IEvaluator::eval_I_data(const DirichletData& f, const ScalarField& w) const {
  if (oracle_mode_)
    throw std::logic_error("eval_I_data: oracle mode evaluates from fields, not traces");
  LimitSeries s = extract_I(*dn_, f, w, *sigma_ctx_, eps_);
  ladders_confident_ = ladders_confident_ && s.confident;
  return s.limit();
}

namespace {

// direct quadratures of the expanded Wirtinger derivatives (oracle only)
Cplx direct_J(const IEvaluator& e, const SolutionTriple& t, bool second) {
  const Grid& g = t.u1.grid;
  const ScalarField& gamma = e.gamma_field();
  double p = e.p();
  VectorField g1 = gradient(t.u1), g2 = gradient(t.u2), g3 = gradient(t.u3);
  ScalarField f(g);
  double mn = 1e300, mx = 0.0;
  for (std::size_t k = 0; k < f.v.size(); ++k) {
    double m2 = herm_sq(g1.c1[k], g1.c2[k]);
    mn = std::min(mn, m2);
    mx = std::max(mx, m2);
  }
  if (p < 4.0 && mn <= 0.0)
    throw std::runtime_error("singular weight: |grad u1| vanishes at a node and p < 4");
  if (p < 4.0 && mn < 1e-16 * (1.0 + mx))
    throw std::runtime_error("near-singular weight: |grad u1|^{p-4} is not integrable on this triple");
  for (std::size_t k = 0; k < f.v.size(); ++k) {
    double m2 = herm_sq(g1.c1[k], g1.c2[k]);
    Cplx d12 = g1.c1[k] * g2.c1[k] + g1.c2[k] * g2.c2[k];
    Cplx d13 = g1.c1[k] * g3.c1[k] + g1.c2[k] * g3.c2[k];
    Cplx d23 = g2.c1[k] * g3.c1[k] + g2.c2[k] * g3.c2[k];
    Cplx val = d12 * d13;
    if (second) val += (2.0 / (p - 2.0)) * m2 * d23;
    f.v[k] = gamma.v[k].real() * std::pow(m2, (p - 4.0) / 2.0) * val;
  }
  return integrate_domain_simpson(f);
}

// I(u1 + z*a, conj(u3)) as a function of z, realized either by quadrature or
// through boundary measurements
Cplx family_I(const IEvaluator& e, const SolutionTriple& t, const ScalarField& a,
              const ScalarField& w_eff, Cplx z,
              const DirichletData* f1, const DirichletData* fa) {
  if (e.is_oracle()) return e.eval_I(axpy(z, a, t.u1), w_eff);
  return e.eval_I_data(f1->plus(*fa, z), w_eff);
}

JResult fd_J(const IEvaluator& e, const SolutionTriple& t, double d, bool second) {
  if (!(d > 0.0)) throw std::invalid_argument("fd_step must be positive");
  double p = e.p();
  require_same_grid(t.u1.grid, t.u2.grid, "eval_J");
  require_same_grid(t.u1.grid, t.u3.grid, "eval_J");
  if (!t.u1.is_real(1e-12)) throw std::invalid_argument("u1 must be real-valued");

  ScalarField w_eff = t.u3.conjugated();
  // J1 family perturbs along conj(u2) and reads d/dzbar; J2 along u2, d/dz
  ScalarField a = second ? t.u2 : t.u2.conjugated();

  DirichletData f1, fa;
  if (!e.is_oracle()) {
    f1 = DirichletData::from_field(t.u1);
    fa = DirichletData::from_field(a);
  }
  const DirichletData* pf1 = e.is_oracle() ? nullptr : &f1;
  const DirichletData* pfa = e.is_oracle() ? nullptr : &fa;

  Cplx Fp = family_I(e, t, a, w_eff, Cplx(d, 0), pf1, pfa);
  Cplx Fm = family_I(e, t, a, w_eff, Cplx(-d, 0), pf1, pfa);
  Cplx Fip = family_I(e, t, a, w_eff, Cplx(0, d), pf1, pfa);
  Cplx Fim = family_I(e, t, a, w_eff, Cplx(0, -d), pf1, pfa);

  Cplx along = (Fp - Fm) / (2.0 * d);         // dz + dzbar direction
  Cplx across = (Fip - Fim) / (2.0 * d);      // i(dz - dzbar)
  Cplx deriv = second ? 0.5 * (along - Cplx(0, 1) * across)   // d/dz
                      : 0.5 * (along + Cplx(0, 1) * across);  // d/dzbar

  JResult r;
  r.fd = (2.0 / (p - 2.0)) * deriv;
  if (e.is_oracle()) {
    r.direct = direct_J(e, t, second);
    r.has_direct = true;
    r.primary = r.direct;
  } else {
    r.primary = r.fd;
  }
  return r;
}

}  // namespace

JResult eval_J1_full(const IEvaluator& e, const SolutionTriple& t, double fd_step) {
  return fd_J(e, t, fd_step, false);
}

JResult eval_J2_full(const IEvaluator& e, const SolutionTriple& t, double fd_step) {
  return fd_J(e, t, fd_step, true);
}

Cplx eval_J1(const IEvaluator& e, const SolutionTriple& t, double fd_step) {
  return eval_J1_full(e, t, fd_step).primary;
}

Cplx eval_J2(const IEvaluator& e, const SolutionTriple& t, double fd_step) {
  return eval_J2_full(e, t, fd_step).primary;
}

Cplx eval_K(const IEvaluator& e, const SolutionTriple& t, double fd_step) {
  Cplx j1 = eval_J1(e, t, fd_step);
  Cplx j2 = eval_J2(e, t, fd_step);
  return 0.5 * (e.p() - 2.0) * (j2 - j1);
}

Cplx eval_K_via_beta(const ScalarField& gamma, double p, const SolutionTriple& t) {
  ScalarField beta = eval_beta(gamma, p, t.u1);
  VectorField g2 = gradient(t.u2), g3 = gradient(t.u3);
  ScalarField f(t.u1.grid);
  for (std::size_t k = 0; k < f.v.size(); ++k) {
    Cplx d23 = g2.c1[k] * g3.c1[k] + g2.c2[k] * g3.c2[k];
    f.v[k] = beta.v[k].real() * d23;
  }
  return integrate_domain_simpson(f);
}

ScalarField eval_beta(const ScalarField& gamma, double p, const ScalarField& u1) {
  require_same_grid(gamma.grid, u1.grid, "eval_beta");
  if (!u1.is_real(1e-12)) throw std::invalid_argument("beta weight needs real u1");
  VectorField g1 = gradient(u1);
  ScalarField beta(u1.grid);
  for (std::size_t k = 0; k < beta.v.size(); ++k) {
    double m2 = herm_sq(g1.c1[k], g1.c2[k]);
    beta.v[k] = gamma.v[k].real() * std::pow(m2, (p - 2.0) / 2.0);
  }
  return beta;
}

}  // namespace plr
