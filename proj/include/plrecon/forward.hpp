#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "plrecon/coefficients.hpp"
#include "plrecon/grid.hpp"

namespace plr {

struct SolveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverOptions {
  double delta = -1.0;  // <0: auto (1e-8 for p>2, 1e-4 for p<2)
  double theta = 1.0;   // Picard damping, halved on energy increase
  double tolerance = 1e-12;  // relative nonlinear residual target
  int max_iterations = 200;
};

struct SolveReport {
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  double energy = 0.0;
};

// Dirichlet data on the whole boundary; stored full-size, only boundary
// entries are read.
struct DirichletData {
  Grid grid;
  std::vector<Cplx> values;

  static DirichletData zero(const Grid& g);
  static DirichletData from_fn(const Grid& g,
                               const std::function<Cplx(double, double)>& f);
  static DirichletData from_field(const ScalarField& u);
  // trace on one face, zero on the others
  static DirichletData from_trace(const BoundaryTrace& t);

  DirichletData scaled(Cplx s) const;
  DirichletData conjugated() const;
  DirichletData plus(const DirichletData& o, Cplx weight) const;
  bool is_zero() const;
  bool is_real(double tol = 0.0) const;
  uint64_t key() const;  // content hash for solve caches
};

// Per-edge stiffness weights of the corner-quadrature scheme. The discrete
// bilinear form is B(u,w) = sum_edges k_e (u_a - u_b) conj(w_a - w_b); the
// five-point operator and the discrete energy both derive from it, so Picard
// fixed points are exact stationary points of the energy.
struct EdgeCoeffs {
  int n1 = 0, n2 = 0;
  std::vector<double> kx;  // (n1-1) * n2
  std::vector<double> ky;  // n1 * (n2-1)
};

EdgeCoeffs edge_coeffs_nodal(const Grid& g, const std::vector<double>& a);
EdgeCoeffs edge_coeffs_plaplace(const Grid& g, const std::vector<double>& sigma,
                                const std::vector<double>& gamma, double p,
                                double delta, const ScalarField& u);

Cplx bform(const Grid& g, const EdgeCoeffs& e, const ScalarField& u,
           const ScalarField& w);
// r[node] = B(u, phi_node) for every node (callers use interior entries)
void bform_rows(const Grid& g, const EdgeCoeffs& e, const ScalarField& u,
                std::vector<Cplx>& r);

double plaplace_energy(const Grid& g, const std::vector<double>& sigma,
                       const std::vector<double>& gamma, double p, double delta,
                       const ScalarField& u);

std::vector<double> real_nodal(const ScalarField& f, const char* what);

// Linear conductivity solver with a cached factorization; also provides the
// zero-Dirichlet corrector solve used by the probe constructions.
class ConductivityContext {
 public:
  ConductivityContext(const Grid& g, const ScalarField& sigma);
  ~ConductivityContext();
  ConductivityContext(ConductivityContext&&) noexcept;

  const Grid& grid() const { return grid_; }
  const std::vector<double>& sigma_nodes() const { return sigma_; }
  const EdgeCoeffs& sigma_edges() const { return edges_; }

  ScalarField solve(const DirichletData& f) const;
  // solves div(sigma grad w1) = -div(sigma grad w_source), w1 = 0 on the
  // boundary (weak/divergence form); w_source + w1 is then an exact discrete
  // conductivity solution
  ScalarField solve_corrector(const ScalarField& w_source) const;
  double last_linear_residual() const;

 private:
  struct Impl;
  Grid grid_;
  std::vector<double> sigma_;
  EdgeCoeffs edges_;
  std::unique_ptr<Impl> impl_;
};

ScalarField solve_conductivity(const Grid& g, const ScalarField& sigma,
                               const DirichletData& f);
ScalarField solve_conductivity(const Grid& g, const ScalarField& sigma,
                               const BoundaryTrace& f);
ScalarField solve_corrector(const Grid& g, const ScalarField& sigma,
                            const ScalarField& w_source);

struct PlaplaceSolution {
  ScalarField u;
  SolveReport report;
  EdgeCoeffs final_edges;  // sigma + gamma(|grad u|^2+delta^2)^{(p-2)/2} weights
  double delta = 0.0;
};

PlaplaceSolution solve_plaplace_fields(const Grid& g, const ScalarField& sigma,
                                       const ScalarField& gamma, double p,
                                       const DirichletData& f,
                                       const SolverOptions& opts,
                                       const ScalarField* warm_start = nullptr);

std::pair<ScalarField, SolveReport> solve_perturbed_plaplace(
    const Grid& g, const ProblemCoefficients& c, const DirichletData& f,
    const SolverOptions& opts);

}  // namespace plr
