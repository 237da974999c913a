#pragma once

#include "plrecon/forward.hpp"

namespace plr {

struct ResolvabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class CutoffShape { FlatTop, WideTop };

// C^4-smooth radial bump: identically 1 on [0, r_flat], smoothly decays to 0
// at r = 1, vanishes beyond.  deriv is the exact derivative.
struct Cutoff {
  double r_flat = 0.5;
  double value(double r) const;
  double deriv(double r) const;
};

// fixed probe geometry at x0 = 0 on the flat bottom boundary: tangent (1,0),
// inward normal (0,1), phase N(i*x1 - x2)
struct ProbeFrame {
  CutoffShape shape = CutoffShape::FlatTop;
  Cutoff eta;               // radial cutoff of the concentration probe
  Cutoff xi;                // vertical cutoff profile of the oscillating pair
  double c_eta = 0.0;       // int_R eta(|y|,0)^2 dy along the boundary slice
  double eta4_amp = 0.0;    // alpha with int (alpha*eta)^2 = 1
  double int_grad_eta4 = 0.0;  // int |(alpha*eta)'|^2 dy

  static ProbeFrame make(CutoffShape s = CutoffShape::FlatTop);

  double eta4(double y) const { return eta4_amp * eta.value(std::abs(y)); }
  double eta4_deriv(double y) const;
};

// throws ResolvabilityError when the grid cannot carry frequency N or the
// probe support (lateral radius `support`) leaves the domain
void check_resolvable(const Grid& g, double support, double N);

// w0 = eta(M|x|) exp(N(i x1 - x2)); refuses unresolvable (M, N)
ScalarField make_w0(const ProbeFrame& f, const Grid& g, double M, double N);
VectorField w0_gradient(const ProbeFrame& f, const Grid& g, double M, double N);

struct UMParts {
  double M = 0, N = 0, C = 0;  // C = sqrt(M / (N c_eta)), n = 2
  ScalarField w0;              // unscaled probe
  ScalarField w1;              // conductivity corrector of w0 (zero trace)
  ScalarField uM;              // C (w0 + w1), discrete sigma-solution
  VectorField g_probe;         // exact gradient of C w0
};
UMParts make_uM_parts(const ProbeFrame& f, const ConductivityContext& ctx,
                      double M, double N);
ScalarField make_uM(const ProbeFrame& f, const ScalarField& sigma, double M,
                    double N);

struct OscParts {
  double N = 0;
  ScalarField v2, v3;          // xi_N * Psi_N (half frequency), xi_N * Phi_N
  ScalarField s, r;            // correctors
  ScalarField u2, u3;          // v + corrector, discrete sigma-solutions
  VectorField g2_probe, g3_probe;  // exact gradients of v2, v3
};
// probe fields and their exact gradients only; u2/u3 alias the uncorrected
// probes.  enough for quadrature against the stated limit formula, no solves.
OscParts make_osc_probes(const ProbeFrame& f, const Grid& g, double N);
OscParts make_osc_parts(const ProbeFrame& f, const ConductivityContext& ctx,
                        double N);
std::pair<ScalarField, ScalarField> make_osc_pair(const ProbeFrame& f,
                                                  const ScalarField& sigma,
                                                  double N);

struct MNSchedule {
  std::vector<double> m_values;
  double n_exponent = 1.5;  // N = M^q, q > 1 so N/M grows
  double margin = 0.5;      // admit (M, N) only while N * hmax <= margin

  struct Point {
    double M, N;
  };
  // filters the requested M list against the grid; skipped points are
  // explained in *warnings (one line each)
  std::vector<Point> generate(const Grid& g, std::string* warnings = nullptr) const;

  static MNSchedule geometric(double m0 = std::sqrt(8.0), double ratio = std::sqrt(2.0),
                              int count = 5);
};

// same admissibility filter for the plain N ladder of the slope pipeline
std::vector<double> filter_frequencies(const Grid& g, const std::vector<double>& n_values,
                                       double margin, std::string* warnings = nullptr);

}  // namespace plr
