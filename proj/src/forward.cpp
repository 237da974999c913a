#include "plrecon/forward.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <cstring>

namespace plr {

namespace {

uint64_t fnv1a(const void* data, size_t n, uint64_t h = 1469598103934665603ull) {
  const unsigned char* b = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= b[i];
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

DirichletData DirichletData::zero(const Grid& g) {
  DirichletData d;
  d.grid = g;
  d.values.assign(g.nodes(), Cplx(0.0));
  return d;
}

DirichletData DirichletData::from_fn(
    const Grid& g, const std::function<Cplx(double, double)>& f) {
  DirichletData d = zero(g);
  for (int j = 0; j < g.n2; ++j)
    for (int i = 0; i < g.n1; ++i)
      if (g.is_boundary(i, j)) d.values[g.idx(i, j)] = f(g.x1(i), g.x2(j));
  return d;
}

DirichletData DirichletData::from_field(const ScalarField& u) {
  const Grid& g = u.grid;
  DirichletData d = zero(g);
  for (int j = 0; j < g.n2; ++j)
    for (int i = 0; i < g.n1; ++i)
      if (g.is_boundary(i, j)) d.values[g.idx(i, j)] = u.v[g.idx(i, j)];
  return d;
}

DirichletData DirichletData::from_trace(const BoundaryTrace& t) {
  const Grid& g = t.grid;
  DirichletData d = zero(g);
  int n = (int)t.v.size();
  for (int k = 0; k < n; ++k) {
    switch (t.face) {
      case Face::Bottom: d.values[g.idx(k, 0)] = t.v[k]; break;
      case Face::Top:    d.values[g.idx(k, g.n2 - 1)] = t.v[k]; break;
      case Face::Left:   d.values[g.idx(0, k)] = t.v[k]; break;
      default:           d.values[g.idx(g.n1 - 1, k)] = t.v[k]; break;
    }
  }
  return d;
}

DirichletData DirichletData::scaled(Cplx s) const {
  DirichletData d = *this;
  for (Cplx& z : d.values) z *= s;
  return d;
}

DirichletData DirichletData::conjugated() const {
  DirichletData d = *this;
  for (Cplx& z : d.values) z = std::conj(z);
  return d;
}

DirichletData DirichletData::plus(const DirichletData& o, Cplx weight) const {
  DirichletData d = *this;
  for (size_t k = 0; k < d.values.size(); ++k) d.values[k] += weight * o.values[k];
  return d;
}

bool DirichletData::is_zero() const {
  for (const Cplx& z : values)
    if (z != Cplx(0.0)) return false;
  return true;
}

bool DirichletData::is_real(double tol) const {
  for (const Cplx& z : values)
    if (std::abs(z.imag()) > tol) return false;
  return true;
}

uint64_t DirichletData::key() const {
  uint64_t h = fnv1a(&grid.n1, sizeof(grid.n1));
  h = fnv1a(&grid.n2, sizeof(grid.n2), h);
  // hash boundary entries only (interior slots are always zero by contract)
  for (int i = 0; i < grid.n1; ++i) {
    h = fnv1a(&values[grid.idx(i, 0)], sizeof(Cplx), h);
    h = fnv1a(&values[grid.idx(i, grid.n2 - 1)], sizeof(Cplx), h);
  }
  for (int j = 1; j < grid.n2 - 1; ++j) {
    h = fnv1a(&values[grid.idx(0, j)], sizeof(Cplx), h);
    h = fnv1a(&values[grid.idx(grid.n1 - 1, j)], sizeof(Cplx), h);
  }
  return h;
}

std::vector<double> real_nodal(const ScalarField& f, const char* what) {
  std::vector<double> r(f.v.size());
  for (size_t k = 0; k < r.size(); ++k) {
    if (std::abs(f.v[k].imag()) > 1e-14 * (1.0 + std::abs(f.v[k].real())))
      throw std::invalid_argument(std::string(what) + " must be real-valued");
    r[k] = f.v[k].real();
  }
  return r;
}

EdgeCoeffs edge_coeffs_nodal(const Grid& g, const std::vector<double>& a) {
  EdgeCoeffs e;
  e.n1 = g.n1;
  e.n2 = g.n2;
  e.kx.assign((g.n1 - 1) * g.n2, 0.0);
  e.ky.assign(g.n1 * (g.n2 - 1), 0.0);
  const double wx = g.h1 * g.h2 / (4.0 * g.h1 * g.h1);
  const double wy = g.h1 * g.h2 / (4.0 * g.h2 * g.h2);
  for (int j = 0; j < g.n2; ++j) {
    double rows = (j == 0 || j == g.n2 - 1) ? 1.0 : 2.0;  // adjacent cells
    for (int i = 0; i < g.n1 - 1; ++i)
      e.kx[j * (g.n1 - 1) + i] =
          wx * rows * (a[g.idx(i, j)] + a[g.idx(i + 1, j)]);
  }
  for (int j = 0; j < g.n2 - 1; ++j) {
    for (int i = 0; i < g.n1; ++i) {
      double cols = (i == 0 || i == g.n1 - 1) ? 1.0 : 2.0;
      e.ky[j * g.n1 + i] = wy * cols * (a[g.idx(i, j)] + a[g.idx(i, j + 1)]);
    }
  }
  return e;
}

EdgeCoeffs edge_coeffs_plaplace(const Grid& g, const std::vector<double>& sigma,
                                const std::vector<double>& gamma, double p,
                                double delta, const ScalarField& u) {
  EdgeCoeffs e;
  e.n1 = g.n1;
  e.n2 = g.n2;
  e.kx.assign((g.n1 - 1) * g.n2, 0.0);
  e.ky.assign(g.n1 * (g.n2 - 1), 0.0);
  const double w = g.h1 * g.h2 / 4.0;
  const double wx = w / (g.h1 * g.h1), wy = w / (g.h2 * g.h2);
  const double ex = (p - 2.0) / 2.0;
  const double d2 = delta * delta;
  auto gsq = [&](int na, int nb, double invh) {
    Cplx d = (u.v[nb] - u.v[na]) * invh;
    return d.real() * d.real() + d.imag() * d.imag();
  };
  const double ih1 = 1.0 / g.h1, ih2 = 1.0 / g.h2;
  for (int j = 0; j < g.n2 - 1; ++j) {
    for (int i = 0; i < g.n1 - 1; ++i) {
      int n00 = g.idx(i, j), n10 = g.idx(i + 1, j);
      int n01 = g.idx(i, j + 1), n11 = g.idx(i + 1, j + 1);
      double gx0 = gsq(n00, n10, ih1);  // x-edge row j
      double gx1 = gsq(n01, n11, ih1);  // x-edge row j+1
      double gy0 = gsq(n00, n01, ih2);  // y-edge col i
      double gy1 = gsq(n10, n11, ih2);  // y-edge col i+1
      double a00 = sigma[n00] + gamma[n00] * std::pow(gx0 + gy0 + d2, ex);
      double a10 = sigma[n10] + gamma[n10] * std::pow(gx0 + gy1 + d2, ex);
      double a01 = sigma[n01] + gamma[n01] * std::pow(gx1 + gy0 + d2, ex);
      double a11 = sigma[n11] + gamma[n11] * std::pow(gx1 + gy1 + d2, ex);
      e.kx[j * (g.n1 - 1) + i] += wx * (a00 + a10);
      e.kx[(j + 1) * (g.n1 - 1) + i] += wx * (a01 + a11);
      e.ky[j * g.n1 + i] += wy * (a00 + a01);
      e.ky[j * g.n1 + i + 1] += wy * (a10 + a11);
    }
  }
  return e;
}

Cplx bform(const Grid& g, const EdgeCoeffs& e, const ScalarField& u,
           const ScalarField& w) {
  Cplx s(0.0);
  for (int j = 0; j < g.n2; ++j)
    for (int i = 0; i < g.n1 - 1; ++i) {
      int a = g.idx(i, j), b = g.idx(i + 1, j);
      s += e.kx[j * (g.n1 - 1) + i] * (u.v[b] - u.v[a]) *
           std::conj(w.v[b] - w.v[a]);
    }
  for (int j = 0; j < g.n2 - 1; ++j)
    for (int i = 0; i < g.n1; ++i) {
      int a = g.idx(i, j), b = g.idx(i, j + 1);
      s += e.ky[j * g.n1 + i] * (u.v[b] - u.v[a]) * std::conj(w.v[b] - w.v[a]);
    }
  return s;
}

void bform_rows(const Grid& g, const EdgeCoeffs& e, const ScalarField& u,
                std::vector<Cplx>& r) {
  r.assign(g.nodes(), Cplx(0.0));
  for (int j = 0; j < g.n2; ++j)
    for (int i = 0; i < g.n1 - 1; ++i) {
      int a = g.idx(i, j), b = g.idx(i + 1, j);
      Cplx t = e.kx[j * (g.n1 - 1) + i] * (u.v[a] - u.v[b]);
      r[a] += t;
      r[b] -= t;
    }
  for (int j = 0; j < g.n2 - 1; ++j)
    for (int i = 0; i < g.n1; ++i) {
      int a = g.idx(i, j), b = g.idx(i, j + 1);
      Cplx t = e.ky[j * g.n1 + i] * (u.v[a] - u.v[b]);
      r[a] += t;
      r[b] -= t;
    }
}

double plaplace_energy(const Grid& g, const std::vector<double>& sigma,
                       const std::vector<double>& gamma, double p, double delta,
                       const ScalarField& u) {
  const double w = g.h1 * g.h2 / 4.0;
  const double d2 = delta * delta;
  const double ih1 = 1.0 / g.h1, ih2 = 1.0 / g.h2;
  auto gsq = [&](int na, int nb, double invh) {
    Cplx d = (u.v[nb] - u.v[na]) * invh;
    return d.real() * d.real() + d.imag() * d.imag();
  };
  double E = 0.0;
  for (int j = 0; j < g.n2 - 1; ++j) {
    for (int i = 0; i < g.n1 - 1; ++i) {
      int n00 = g.idx(i, j), n10 = g.idx(i + 1, j);
      int n01 = g.idx(i, j + 1), n11 = g.idx(i + 1, j + 1);
      double gx0 = gsq(n00, n10, ih1), gx1 = gsq(n01, n11, ih1);
      double gy0 = gsq(n00, n01, ih2), gy1 = gsq(n10, n11, ih2);
      const int nodes[4] = {n00, n10, n01, n11};
      const double gg[4] = {gx0 + gy0, gx0 + gy1, gx1 + gy0, gx1 + gy1};
      for (int q = 0; q < 4; ++q)
        E += w * (0.5 * sigma[nodes[q]] * gg[q] +
                  gamma[nodes[q]] / p * std::pow(gg[q] + d2, p / 2.0));
    }
  }
  return E;
}

// ---------------------------------------------------------------------------
// linear solves

using SpMat = Eigen::SparseMatrix<double>;

struct LinearProblem {
  std::vector<int> imap;  // node -> interior index or -1
  std::vector<int> inode; // interior index -> node
  Eigen::SimplicialLDLT<SpMat> ldlt;
  bool analyzed = false;
  double last_residual = 0.0;
  SpMat A;

  void init(const Grid& g) {
    imap.assign(g.nodes(), -1);
    inode.clear();
    for (int j = 1; j < g.n2 - 1; ++j)
      for (int i = 1; i < g.n1 - 1; ++i) {
        imap[g.idx(i, j)] = (int)inode.size();
        inode.push_back(g.idx(i, j));
      }
  }

  void assemble_factorize(const Grid& g, const EdgeCoeffs& e) {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(inode.size() * 5);
    auto add_edge = [&](int a, int b, double k) {
      int ia = imap[a], ib = imap[b];
      if (ia >= 0) trips.emplace_back(ia, ia, k);
      if (ib >= 0) trips.emplace_back(ib, ib, k);
      if (ia >= 0 && ib >= 0) {
        trips.emplace_back(ia, ib, -k);
        trips.emplace_back(ib, ia, -k);
      }
    };
    for (int j = 0; j < g.n2; ++j)
      for (int i = 0; i < g.n1 - 1; ++i)
        add_edge(g.idx(i, j), g.idx(i + 1, j), e.kx[j * (g.n1 - 1) + i]);
    for (int j = 0; j < g.n2 - 1; ++j)
      for (int i = 0; i < g.n1; ++i)
        add_edge(g.idx(i, j), g.idx(i, j + 1), e.ky[j * g.n1 + i]);
    A.resize((int)inode.size(), (int)inode.size());
    A.setFromTriplets(trips.begin(), trips.end());
    if (!analyzed) {
      ldlt.analyzePattern(A);
      analyzed = true;
    }
    ldlt.factorize(A);
    if (ldlt.info() != Eigen::Success)
      throw SolveError("linear factorization failed (coefficient not positive?)");
  }

  // rhs_b[node] over boundary nodes enters through the edge couplings
  ScalarField solve_dirichlet(const Grid& g, const EdgeCoeffs& e,
                              const DirichletData& f) {
    ScalarField u(g);
    for (int j = 0; j < g.n2; ++j)
      for (int i = 0; i < g.n1; ++i)
        if (g.is_boundary(i, j)) u.v[g.idx(i, j)] = f.values[g.idx(i, j)];
    // rhs = -B(lift, phi_i) with lift = boundary values extended by zero
    std::vector<Cplx> r;
    bform_rows(g, e, u, r);
    return finish_solve(g, u, r);
  }

  // zero-boundary solve of B(w1, phi) = -B(w_source, phi)
  ScalarField solve_zero_dirichlet(const Grid& g, const EdgeCoeffs& e,
                                   const ScalarField& w_source) {
    std::vector<Cplx> r;
    bform_rows(g, e, w_source, r);
    ScalarField u(g);  // boundary entries stay zero
    return finish_solve(g, u, r);
  }

 private:
  ScalarField finish_solve(const Grid& g, ScalarField& u,
                           const std::vector<Cplx>& r) {
    int m = (int)inode.size();
    Eigen::MatrixXd b(m, 2);
    for (int k = 0; k < m; ++k) {
      b(k, 0) = -r[inode[k]].real();
      b(k, 1) = -r[inode[k]].imag();
    }
    Eigen::MatrixXd x = ldlt.solve(b);
    if (ldlt.info() != Eigen::Success) throw SolveError("linear solve failed");
    double bn = b.norm();
    last_residual = bn > 0.0 ? (A * x - b).norm() / bn : 0.0;
    if (last_residual > 1e-10)
      throw SolveError("linear solve residual " + std::to_string(last_residual) +
                       " above 1e-10");
    for (int k = 0; k < m; ++k)
      u.v[inode[k]] += Cplx(x(k, 0), x(k, 1));
    u.check_finite("linear solve");
    return u;
  }
};

struct ConductivityContext::Impl {
  LinearProblem lp;
};

ConductivityContext::ConductivityContext(const Grid& g, const ScalarField& sigma)
    : grid_(g),
      sigma_(real_nodal(sigma, "sigma")),
      impl_(std::make_unique<Impl>()) {
  for (double s : sigma_)
    if (!(s > 0.0)) throw std::invalid_argument("sigma must be positive");
  edges_ = edge_coeffs_nodal(g, sigma_);
  impl_->lp.init(g);
  impl_->lp.assemble_factorize(g, edges_);
}

ConductivityContext::~ConductivityContext() = default;
ConductivityContext::ConductivityContext(ConductivityContext&&) noexcept = default;

ScalarField ConductivityContext::solve(const DirichletData& f) const {
  return impl_->lp.solve_dirichlet(grid_, edges_, f);
}

ScalarField ConductivityContext::solve_corrector(const ScalarField& w_source) const {
  return impl_->lp.solve_zero_dirichlet(grid_, edges_, w_source);
}

double ConductivityContext::last_linear_residual() const {
  return impl_->lp.last_residual;
}

ScalarField solve_conductivity(const Grid& g, const ScalarField& sigma,
                               const DirichletData& f) {
  return ConductivityContext(g, sigma).solve(f);
}

ScalarField solve_conductivity(const Grid& g, const ScalarField& sigma,
                               const BoundaryTrace& f) {
  return solve_conductivity(g, sigma, DirichletData::from_trace(f));
}

ScalarField solve_corrector(const Grid& g, const ScalarField& sigma,
                            const ScalarField& w_source) {
  return ConductivityContext(g, sigma).solve_corrector(w_source);
}

// ---------------------------------------------------------------------------
// damped Picard for the perturbed p-Laplace problem

namespace {

double nonlinear_residual(const Grid& g, const EdgeCoeffs& e,
                          const ScalarField& u) {
  std::vector<Cplx> r;
  bform_rows(g, e, u, r);
  double num = 0.0, den = 0.0;
  for (int j = 1; j < g.n2 - 1; ++j)
    for (int i = 1; i < g.n1 - 1; ++i) {
      int k = g.idx(i, j);
      num += std::norm(r[k]);
      // row magnitude: sum of |k_e (u_a - u_b)| over the 4 incident edges
      double m = 0.0;
      m += std::abs(e.kx[j * (g.n1 - 1) + i - 1]) * std::abs(u.v[k] - u.v[k - 1]);
      m += std::abs(e.kx[j * (g.n1 - 1) + i]) * std::abs(u.v[k + 1] - u.v[k]);
      m += std::abs(e.ky[(j - 1) * g.n1 + i]) * std::abs(u.v[k] - u.v[k - g.n1]);
      m += std::abs(e.ky[j * g.n1 + i]) * std::abs(u.v[k + g.n1] - u.v[k]);
      den += m * m;
    }
  if (den == 0.0) return 0.0;
  return std::sqrt(num / den);
}

}  // namespace

PlaplaceSolution solve_plaplace_fields(const Grid& g, const ScalarField& sigma,
                                       const ScalarField& gamma, double p,
                                       const DirichletData& f,
                                       const SolverOptions& opts,
                                       const ScalarField* warm_start) {
  if (!(p > 1.0)) throw std::invalid_argument("p must be > 1");
  std::vector<double> sn = real_nodal(sigma, "sigma");
  std::vector<double> gn = real_nodal(gamma, "gamma");
  double delta = opts.delta >= 0.0 ? opts.delta : (p > 2.0 ? 1e-8 : 1e-4);
  if (p < 2.0 && delta <= 0.0)
    throw std::invalid_argument("p < 2 requires delta > 0");

  LinearProblem lp;
  lp.init(g);

  ScalarField u(g);
  if (warm_start && warm_start->grid.same_as(g)) {
    u = *warm_start;
    for (int j = 0; j < g.n2; ++j)
      for (int i = 0; i < g.n1; ++i)
        if (g.is_boundary(i, j)) u.v[g.idx(i, j)] = f.values[g.idx(i, j)];
  } else {
    // conductivity lift as the initial iterate
    EdgeCoeffs e0 = edge_coeffs_nodal(g, sn);
    lp.assemble_factorize(g, e0);
    u = lp.solve_dirichlet(g, e0, f);
  }

  PlaplaceSolution out;
  SolveReport rep;
  double E_cur = plaplace_energy(g, sn, gn, p, delta, u);
  for (int it = 0; it <= opts.max_iterations; ++it) {
    EdgeCoeffs e = edge_coeffs_plaplace(g, sn, gn, p, delta, u);
    double res = nonlinear_residual(g, e, u);
    rep.iterations = it;
    rep.residual = res;
    if (res <= opts.tolerance) {
      rep.converged = true;
      out.final_edges = std::move(e);
      break;
    }
    if (it == opts.max_iterations) {
      rep.converged = false;
      out.final_edges = std::move(e);
      break;
    }
    lp.assemble_factorize(g, e);
    ScalarField next = lp.solve_dirichlet(g, e, f);
    // damped update with energy backtracking; the Picard direction is a
    // descent direction of the convex discrete energy, so this terminates
    double theta = opts.theta;
    ScalarField trial(g);
    bool stepped = false;
    for (int half = 0; half <= 12; ++half) {
      for (size_t k = 0; k < u.v.size(); ++k)
        trial.v[k] = (1.0 - theta) * u.v[k] + theta * next.v[k];
      double E_t = plaplace_energy(g, sn, gn, p, delta, trial);
      if (E_t <= E_cur + 1e-12 * (1.0 + std::abs(E_cur))) {
        u = trial;
        E_cur = E_t;
        stepped = true;
        break;
      }
      theta *= 0.5;
    }
    if (!stepped) {  // energy stalled at roundoff level; stop honestly
      rep.converged = rep.residual <= opts.tolerance;
      out.final_edges = std::move(e);
      break;
    }
  }
  rep.energy = E_cur;
  out.u = std::move(u);
  out.report = rep;
  out.delta = delta;
  return out;
}

std::pair<ScalarField, SolveReport> solve_perturbed_plaplace(
    const Grid& g, const ProblemCoefficients& c, const DirichletData& f,
    const SolverOptions& opts) {
  BoundsReport br = validate_bounds(c, g);
  if (!br.ok) throw std::invalid_argument("coefficient bounds: " + br.message);
  PlaplaceSolution s = solve_plaplace_fields(g, sample(c.sigma, g),
                                             sample(c.gamma, g), c.p, f, opts);
  return {std::move(s.u), s.report};
}

}  // namespace plr
