#pragma once

#include <list>
#include <unordered_map>

#include "plrecon/extrapolate.hpp"
#include "plrecon/forward.hpp"

namespace plr {

struct EpsSchedule {
  double eps0 = 0.1;
  double ratio = 0.5;
  int count = 6;
  std::vector<double> values() const;
};

// Black-box access to weak DN pairings for hidden coefficients. Inverse-mode
// pipelines see only pair_nonlinear (plus grid and p); the coefficients stay
// private by construction.
class DnOracle {
 public:
  DnOracle(const Grid& g, const ProblemCoefficients& c,
           const SolverOptions& opts);

  const Grid& grid() const { return grid_; }
  double p() const { return p_; }

  // <Lambda_{sigma,gamma}(f), w> = int (sigma + gamma|grad u_f|^{p-2})
  //                                grad u_f . conj(grad w) dx,
  // evaluated with the solver's own discrete form; throws SolveError when the
  // forward solve does not converge
  Cplx pair_nonlinear(const DirichletData& f, const ScalarField& w) const;

  int solves_performed() const { return solves_; }

 private:
  struct Entry {
    ScalarField u;
    EdgeCoeffs edges;
  };
  const Entry& solution_for(const DirichletData& f) const;

  Grid grid_;
  std::vector<double> sigma_, gamma_;
  ScalarField sigma_field_;
  double p_;
  SolverOptions opts_;
  std::unique_ptr<ConductivityContext> lift_;  // initial-guess solves
  mutable std::unordered_map<uint64_t, Entry> cache_;
  mutable std::list<uint64_t> order_;  // FIFO eviction
  mutable int solves_ = 0;
};

Cplx pair_nonlinear(const DnOracle& o, const DirichletData& f,
                    const ScalarField& w);

// int sigma grad u0 . conj(grad w) dx with the same discrete form
Cplx pair_linear(const ScalarField& u0, const ScalarField& sigma,
                 const ScalarField& w);

// Recovers <Lambda_sigma f, w> from nonlinear pairings:
//   p > 2:  eps^-1 <Lambda(eps f), w>,   p < 2:  eps <Lambda(eps^-1 f), w>;
// returns the fitted series (q_hint = |p-2|).
LimitSeries extract_linear_dn(const DnOracle& o, const DirichletData& f,
                              const ScalarField& w, const EpsSchedule& s);

// Recovers I(u0, w) = int gamma |grad u0|^{p-2} grad u0 . conj(grad w) dx.
// sigma must already be known/reconstructed: the linear part of the pairing
// is subtracted via B(sigma; u0, w). q_hint = |p-2|.
LimitSeries extract_I(const DnOracle& o, const DirichletData& f,
                      const ScalarField& w, const ConductivityContext& sigma_ctx,
                      const EpsSchedule& s);
LimitSeries extract_I(const DnOracle& o, const DirichletData& f,
                      const ScalarField& w, const ScalarField& sigma,
                      const EpsSchedule& s);

// max over seeded samples of
//   | |x|^{p-2} x - |y|^{p-2} y | / ( (|x|+|y|)^{p-2} |x-y| )
// for complex 2-vectors x, y
double esti01_max_ratio(double p, int samples, uint64_t seed);

}  // namespace plr
