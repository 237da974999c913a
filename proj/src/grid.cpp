#include "plrecon/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace plr {

Grid Grid::make(double x1_min, double x1_max, double x2_max, int n1, int n2) {
  if (n1 < 3 || n2 < 3)
    throw std::invalid_argument("grid: need at least 3 nodes per axis");
  if (!(x1_min < 0.0 && 0.0 < x1_max) || !(x2_max > 0.0))
    throw std::invalid_argument(
        "grid: domain must be [x1_min,x1_max]x[0,x2_max] with x1_min < 0 < "
        "x1_max");
  Grid g;
  g.x1_min = x1_min;
  g.x1_max = x1_max;
  g.x2_max = x2_max;
  g.n1 = n1;
  g.n2 = n2;
  g.h1 = (x1_max - x1_min) / (n1 - 1);
  g.h2 = x2_max / (n2 - 1);
  return g;
}

ScalarField ScalarField::from_fn(
    const Grid& g, const std::function<Cplx(double, double)>& f) {
  ScalarField u(g);
  for (int j = 0; j < g.n2; ++j)
    for (int i = 0; i < g.n1; ++i) u.v[g.idx(i, j)] = f(g.x1(i), g.x2(j));
  u.check_finite("from_fn");
  return u;
}

ScalarField ScalarField::conjugated() const {
  ScalarField r(grid);
  for (size_t k = 0; k < v.size(); ++k) r.v[k] = std::conj(v[k]);
  return r;
}

ScalarField ScalarField::real_part() const {
  ScalarField r(grid);
  for (size_t k = 0; k < v.size(); ++k) r.v[k] = v[k].real();
  return r;
}

bool ScalarField::is_real(double tol) const {
  for (const Cplx& z : v)
    if (std::abs(z.imag()) > tol) return false;
  return true;
}

void ScalarField::check_finite(const char* what) const {
  for (const Cplx& z : v)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw std::runtime_error(std::string("non-finite field values after ") +
                               what);
}

ScalarField add(const ScalarField& a, const ScalarField& b) {
  ScalarField r(a.grid);
  for (size_t k = 0; k < r.v.size(); ++k) r.v[k] = a.v[k] + b.v[k];
  return r;
}

ScalarField sub(const ScalarField& a, const ScalarField& b) {
  ScalarField r(a.grid);
  for (size_t k = 0; k < r.v.size(); ++k) r.v[k] = a.v[k] - b.v[k];
  return r;
}

ScalarField scale(const ScalarField& a, Cplx s) {
  ScalarField r(a.grid);
  for (size_t k = 0; k < r.v.size(); ++k) r.v[k] = s * a.v[k];
  return r;
}

ScalarField axpy(Cplx alpha, const ScalarField& x, const ScalarField& y) {
  ScalarField r(x.grid);
  for (size_t k = 0; k < r.v.size(); ++k) r.v[k] = alpha * x.v[k] + y.v[k];
  return r;
}

BoundaryTrace BoundaryTrace::from_fn(
    const Grid& g, Face f, const std::function<Cplx(double, double)>& fn) {
  BoundaryTrace t;
  t.grid = g;
  t.face = f;
  int n = g.face_nodes(f);
  t.v.resize(n);
  for (int k = 0; k < n; ++k) {
    double x1, x2;
    switch (f) {
      case Face::Bottom: x1 = g.x1(k); x2 = 0.0; break;
      case Face::Top:    x1 = g.x1(k); x2 = g.x2_max; break;
      case Face::Left:   x1 = g.x1_min; x2 = g.x2(k); break;
      default:           x1 = g.x1_max; x2 = g.x2(k); break;
    }
    t.v[k] = fn(x1, x2);
  }
  return t;
}

BoundaryTrace BoundaryTrace::of_field(const ScalarField& u, Face f) {
  const Grid& g = u.grid;
  BoundaryTrace t;
  t.grid = g;
  t.face = f;
  int n = g.face_nodes(f);
  t.v.resize(n);
  for (int k = 0; k < n; ++k) {
    switch (f) {
      case Face::Bottom: t.v[k] = u.at(k, 0); break;
      case Face::Top:    t.v[k] = u.at(k, g.n2 - 1); break;
      case Face::Left:   t.v[k] = u.at(0, k); break;
      default:           t.v[k] = u.at(g.n1 - 1, k); break;
    }
  }
  return t;
}

VectorField gradient(const ScalarField& u) {
  const Grid& g = u.grid;
  if (g.n1 < 3 || g.n2 < 3) throw std::invalid_argument("gradient: degenerate grid");
  VectorField w(g);
  for (int j = 0; j < g.n2; ++j) {
    for (int i = 0; i < g.n1; ++i) {
      int k = g.idx(i, j);
      if (i == 0)
        w.c1[k] = (-3.0 * u.at(0, j) + 4.0 * u.at(1, j) - u.at(2, j)) / (2.0 * g.h1);
      else if (i == g.n1 - 1)
        w.c1[k] = (3.0 * u.at(i, j) - 4.0 * u.at(i - 1, j) + u.at(i - 2, j)) / (2.0 * g.h1);
      else
        w.c1[k] = (u.at(i + 1, j) - u.at(i - 1, j)) / (2.0 * g.h1);
      if (j == 0)
        w.c2[k] = (-3.0 * u.at(i, 0) + 4.0 * u.at(i, 1) - u.at(i, 2)) / (2.0 * g.h2);
      else if (j == g.n2 - 1)
        w.c2[k] = (3.0 * u.at(i, j) - 4.0 * u.at(i, j - 1) + u.at(i, j - 2)) / (2.0 * g.h2);
      else
        w.c2[k] = (u.at(i, j + 1) - u.at(i, j - 1)) / (2.0 * g.h2);
    }
  }
  return w;
}

namespace {

std::vector<double> trapezoid_weights(int n, double h) {
  std::vector<double> w(n, h);
  w.front() = w.back() = 0.5 * h;
  return w;
}

Cplx weighted_sum_2d(const ScalarField& u, const std::vector<double>& w1,
                     const std::vector<double>& w2) {
  const Grid& g = u.grid;
  Cplx s(0.0);
  for (int j = 0; j < g.n2; ++j) {
    Cplx row(0.0);
    for (int i = 0; i < g.n1; ++i) row += w1[i] * u.v[g.idx(i, j)];
    s += w2[j] * row;
  }
  return s;
}

Cplx weighted_sum_1d(const std::vector<Cplx>& v, const std::vector<double>& w) {
  Cplx s(0.0);
  for (size_t k = 0; k < v.size(); ++k) s += w[k] * v[k];
  return s;
}

}  // namespace

// Simpson weights for n nodes (n-1 intervals); odd n is the classic composite
// rule, even n closes with a 3/8 block so order 4 is kept.
std::vector<double> simpson_weights(int n, double h) {
  std::vector<double> w(n, 0.0);
  if (n < 2) return w;
  if (n == 2) return trapezoid_weights(n, h);
  if (n == 3) {
    w = {h / 3.0, 4.0 * h / 3.0, h / 3.0};
    return w;
  }
  int m = n;
  bool tail38 = (n % 2 == 0);  // even node count -> odd interval count
  if (tail38) m = n - 3;       // composite part covers nodes [0, m-1]
  for (int k = 0; k < m; ++k) {
    if (k == 0 || k == m - 1)
      w[k] += h / 3.0;
    else if (k % 2 == 1)
      w[k] += 4.0 * h / 3.0;
    else
      w[k] += 2.0 * h / 3.0;
  }
  if (tail38) {
    w[n - 4] += 3.0 * h / 8.0;
    w[n - 3] += 9.0 * h / 8.0;
    w[n - 2] += 9.0 * h / 8.0;
    w[n - 1] += 3.0 * h / 8.0;
  }
  return w;
}

Cplx integrate_domain(const ScalarField& u) {
  const Grid& g = u.grid;
  return weighted_sum_2d(u, trapezoid_weights(g.n1, g.h1),
                         trapezoid_weights(g.n2, g.h2));
}

Cplx integrate_domain_simpson(const ScalarField& u) {
  const Grid& g = u.grid;
  return weighted_sum_2d(u, simpson_weights(g.n1, g.h1),
                         simpson_weights(g.n2, g.h2));
}

Cplx integrate_boundary(const BoundaryTrace& t) {
  double h = (t.face == Face::Bottom || t.face == Face::Top) ? t.grid.h1
                                                             : t.grid.h2;
  return weighted_sum_1d(t.v, trapezoid_weights((int)t.v.size(), h));
}

Cplx integrate_boundary_simpson(const BoundaryTrace& t) {
  double h = (t.face == Face::Bottom || t.face == Face::Top) ? t.grid.h1
                                                             : t.grid.h2;
  return weighted_sum_1d(t.v, simpson_weights((int)t.v.size(), h));
}

double integrate_1d(const std::function<double(double)>& f, double a, double b,
                    int n) {
  std::vector<double> w = simpson_weights(n, (b - a) / (n - 1));
  double s = 0.0;
  for (int k = 0; k < n; ++k) s += w[k] * f(a + k * (b - a) / (n - 1));
  return s;
}

}  // namespace plr
