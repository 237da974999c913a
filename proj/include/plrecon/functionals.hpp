#pragma once

#include "plrecon/dn_map.hpp"

namespace plr {

// three conductivity solutions; u1 real-valued with nodewise |grad u1| > 0
struct SolutionTriple {
  ScalarField u1, u2, u3;
};

// Evaluates I(u0, w) = int gamma |grad u0|^{p-2} grad u0 . conj(grad w) dx
// either from known (gamma, p) by quadrature (oracle) or through DN pairings
// (inverse; never reads gamma).
class IEvaluator {
 public:
  static IEvaluator oracle(const ScalarField& gamma, double p);
  static IEvaluator inverse(const DnOracle* o, const ScalarField& sigma,
                            const EpsSchedule& eps);

  bool is_oracle() const { return oracle_mode_; }
  double p() const { return p_; }
  const ScalarField& gamma_field() const;

  Cplx eval_I(const ScalarField& u0, const ScalarField& w) const;
  // inverse path: u0 enters through its boundary trace only
  Cplx eval_I_data(const DirichletData& f, const ScalarField& w) const;

  // convergence bookkeeping of the extraction ladders since the last reset
  // (oracle mode: trivially true)
  void reset_ladder_flag() const { ladders_confident_ = true; }
  bool ladders_confident() const { return ladders_confident_; }

 private:
  mutable bool ladders_confident_ = true;
  bool oracle_mode_ = true;
  double p_ = 3.0;
  ScalarField gamma_;
  const DnOracle* dn_ = nullptr;
  std::shared_ptr<ConductivityContext> sigma_ctx_;
  EpsSchedule eps_;
};

struct JResult {
  Cplx fd{};       // finite-difference Wirtinger realization
  Cplx direct{};   // expanded-integrand quadrature (oracle mode only)
  bool has_direct = false;
  Cplx primary{};  // direct in oracle mode, fd in inverse mode
};

// J1 = (2/(p-2)) d/dzbar I(u1 + z*conj(u2), .)|_0
//    = int gamma |grad u1|^{p-4} (grad u1 . grad u2)(grad u1 . grad u3) dx
JResult eval_J1_full(const IEvaluator& e, const SolutionTriple& t,
                     double fd_step);
// J2 = (2/(p-2)) d/dz I(u1 + z*u2, .)|_0
//    = int gamma |grad u1|^{p-4} [ (grad u1 . grad u2)(grad u1 . grad u3)
//      + (2/(p-2)) |grad u1|^2 (grad u2 . grad u3) ] dx
JResult eval_J2_full(const IEvaluator& e, const SolutionTriple& t,
                     double fd_step);
Cplx eval_J1(const IEvaluator& e, const SolutionTriple& t, double fd_step);
Cplx eval_J2(const IEvaluator& e, const SolutionTriple& t, double fd_step);

// K = (p-2)/2 (J2 - J1); with u3 = conj(u2) equals int beta |grad u2|^2 dx
Cplx eval_K(const IEvaluator& e, const SolutionTriple& t,
            double fd_step = 1e-3);
// the representation through beta, for the two-formula consistency check
Cplx eval_K_via_beta(const ScalarField& gamma, double p,
                     const SolutionTriple& t);

// beta_{u1} = gamma |grad u1|^{p-2}  (the h of the boundary-slope pipeline)
ScalarField eval_beta(const ScalarField& gamma, double p,
                      const ScalarField& u1);

}  // namespace plr
