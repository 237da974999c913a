#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace plr {

using Cplx = std::complex<double>;

enum class Face { Bottom, Top, Left, Right };

// Uniform tensor grid on [x1_min, x1_max] x [0, x2_max].
// The bottom face {x2 = 0} is the flat boundary patch; x0 = (0,0) must lie
// in its interior, so x1_min < 0 < x1_max.
struct Grid {
  double x1_min = -1.0, x1_max = 1.0, x2_max = 1.0;
  int n1 = 0, n2 = 0;  // nodes per axis
  double h1 = 0.0, h2 = 0.0;

  static Grid make(double x1_min, double x1_max, double x2_max, int n1, int n2);

  int nodes() const { return n1 * n2; }
  int idx(int i, int j) const { return j * n1 + i; }
  double x1(int i) const { return x1_min + i * h1; }
  double x2(int j) const { return j * h2; }
  double hmax() const { return h1 > h2 ? h1 : h2; }
  bool is_boundary(int i, int j) const {
    return i == 0 || j == 0 || i == n1 - 1 || j == n2 - 1;
  }
  int face_nodes(Face f) const {
    return (f == Face::Bottom || f == Face::Top) ? n1 : n2;
  }
  bool same_as(const Grid& o) const {
    return n1 == o.n1 && n2 == o.n2 && x1_min == o.x1_min &&
           x1_max == o.x1_max && x2_max == o.x2_max;
  }
};

struct ScalarField {
  Grid grid;
  std::vector<Cplx> v;

  ScalarField() = default;
  explicit ScalarField(const Grid& g) : grid(g), v(g.nodes(), Cplx(0.0)) {}

  Cplx& at(int i, int j) { return v[grid.idx(i, j)]; }
  Cplx at(int i, int j) const { return v[grid.idx(i, j)]; }

  static ScalarField from_fn(const Grid& g,
                             const std::function<Cplx(double, double)>& f);
  ScalarField conjugated() const;
  ScalarField real_part() const;
  bool is_real(double tol = 0.0) const;
  void check_finite(const char* what) const;
};

// axpy-style helpers used all over the pipelines
ScalarField add(const ScalarField& a, const ScalarField& b);
ScalarField sub(const ScalarField& a, const ScalarField& b);
ScalarField scale(const ScalarField& a, Cplx s);
ScalarField axpy(Cplx alpha, const ScalarField& x, const ScalarField& y);

struct VectorField {
  Grid grid;
  std::vector<Cplx> c1, c2;  // components per node

  VectorField() = default;
  explicit VectorField(const Grid& g)
      : grid(g), c1(g.nodes(), Cplx(0.0)), c2(g.nodes(), Cplx(0.0)) {}
};

struct BoundaryTrace {
  Grid grid;
  Face face = Face::Bottom;
  std::vector<Cplx> v;  // one value per face node

  static BoundaryTrace from_fn(const Grid& g, Face f,
                               const std::function<Cplx(double, double)>& fn);
  static BoundaryTrace of_field(const ScalarField& u, Face f);
};

// second-order gradient: central interior, one-sided at boundary; exact for
// affine fields
VectorField gradient(const ScalarField& u);

// tensor-product trapezoid; exact for multi-affine integrands
Cplx integrate_domain(const ScalarField& u);
// trapezoid along the trace's face
Cplx integrate_boundary(const BoundaryTrace& t);

// higher-order internal quadratures (composite Simpson, 3/8 tail on even
// interval counts); used by the functional/probe oracles
Cplx integrate_domain_simpson(const ScalarField& u);
Cplx integrate_boundary_simpson(const BoundaryTrace& t);
std::vector<double> simpson_weights(int n, double h);
double integrate_1d(const std::function<double(double)>& f, double a, double b,
                    int n);

}  // namespace plr
