#pragma once

#include "plrecon/functionals.hpp"
#include "plrecon/probes.hpp"

namespace plr {

enum class Mode { Oracle, Inverse };

// Shared inputs of the three recovery pipelines. In oracle mode `truth`
// supplies the coefficients and sigma/gamma enter the series evaluation
// directly; in inverse mode only `dn` (measurements) and `sigma` (already
// known/reconstructed) are consulted.
struct PipelineSetup {
  Grid grid;
  const DnOracle* dn = nullptr;
  const ProblemCoefficients* truth = nullptr;
  ScalarField sigma;  // conductivity for probes, correctors, extraction
  ProbeFrame frame = ProbeFrame::make();
  EpsSchedule eps;
  double fd_step = 1e-3;
  double n_margin = 0.5;  // N * hmax gate of the slope pipeline
  // fitted decay rates.  the u_M energy defect is dominated by the spectral
  // fold of the cutoff (trace energy exceeds N*c_eta/M while the fold point
  // sqrt(M) still sits inside the cutoff spectrum); over the admissible M
  // range it decays empirically like M^{-0.95}, so fit with exponent 1.
  // the D_N series loses its leading error like N^{-1/2}.
  double q_concentration = 1.0;
  double q_slope = 0.5;
};

struct ReconstructionReport {
  std::string pipeline;  // "sigma" | "gamma" | "dgamma"
  Mode mode = Mode::Oracle;
  double recovered = 0.0;
  LimitSeries series;  // schedule values with the fitted limit model
  std::string notes;   // schedule truncations, confidence remarks
  int solves_used = 0;  // nonlinear measurement solves (inverse mode)

  // gamma pipeline
  double beta_x0 = 0.0;
  double grad_u1_x0 = 0.0;  // |grad u1(x0)|
  double weight_x0 = 0.0;   // |grad u1(x0)|^{p-2}
  // slope pipeline
  double L = 0.0;           // extrapolated D_N limit
  double correction = 0.0;  // (3/2) h(x0) int |eta4'|^2
  double dn_h = 0.0;        // 2 (L - correction)
  double h_x0 = 0.0;
  double dn_weight = 0.0;   // d/dn |grad u1|^{p-2} at x0

  bool has_truth = false;
  double truth_value = 0.0;
  double rel_error = 0.0;
};

// bottom-face node index of x0 = (0,0); throws when x0 is not a node
int x0_node(const Grid& g);

// sigma(x0) from the concentration series <Lambda_sigma(trace u_M), u_M>
ReconstructionReport reconstruct_sigma_at(const PipelineSetup& s,
                                          const MNSchedule& sched, Mode mode);

// gamma(x0) = beta(x0) / |grad u1(x0)|^{p-2} from K(u1, u_M, conj u_M)
ReconstructionReport reconstruct_gamma_at(const PipelineSetup& s,
                                          const DirichletData& u1_data,
                                          const MNSchedule& sched, Mode mode);

// normal derivative of gamma at x0 from the oscillating-pair series
//   D_N = sqrt(N) (2 K(u1,u2,conj u2) - K(u1,u3,conj u3)) -> L,
//   dn_h = 2 (L - (3/2) h(x0) int|eta4'|^2),
//   dn_gamma = (dn_h - gamma(x0) dn_weight) / weight.
// gamma_x0 < 0 requests the oracle value (truth); inverse callers pass the
// value recovered by reconstruct_gamma_at.
ReconstructionReport reconstruct_dn_gamma_at(const PipelineSetup& s,
                                             const DirichletData& u1_data,
                                             const std::vector<double>& n_values,
                                             Mode mode, double gamma_x0 = -1.0);

}  // namespace plr
