#pragma once

#include <cmath>
#include <vector>

#include "plrecon/grid.hpp"

namespace th {

inline plr::Grid box(int n1, int n2, double a = -1, double b = 1, double top = 1) {
  return plr::Grid::make(a, b, top, n1, n2);
}

inline plr::ScalarField fn(const plr::Grid& g, plr::Cplx (*f)(double, double)) {
  return plr::ScalarField::from_fn(g, f);
}

inline plr::ScalarField constant(const plr::Grid& g, plr::Cplx v) {
  plr::ScalarField u(g);
  for (auto& x : u.v) x = v;
  return u;
}

inline double max_abs_diff(const plr::ScalarField& a, const plr::ScalarField& b) {
  double m = 0;
  for (size_t k = 0; k < a.v.size(); ++k) m = std::max(m, std::abs(a.v[k] - b.v[k]));
  return m;
}

// log2 decay exponents of consecutive errors (grids refined by 2)
inline std::vector<double> slopes(const std::vector<double>& err) {
  std::vector<double> s;
  for (size_t k = 0; k + 1 < err.size(); ++k) s.push_back(std::log2(err[k] / err[k + 1]));
  return s;
}

}  // namespace th
