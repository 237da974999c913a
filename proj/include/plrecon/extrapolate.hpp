#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "plrecon/grid.hpp"

namespace plr {

struct ExtrapolationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A parameter-indexed series with a fitted model  value ~ a + b * t^q.
// limit() is the fitted a; `confident` requires the rms misfit to stay under
// 10% of the value spread.
struct LimitSeries {
  std::vector<double> param;
  std::vector<Cplx> value;

  Cplx a{}, b{};
  double q = 0.0;
  double residual = 0.0;
  double spread = 0.0;
  bool fitted = false;
  bool confident = false;
  bool richardson_used = false;
  Cplx richardson{};
  std::string diag;

  Cplx limit() const { return a; }

  void push(double t, Cplx v) {
    param.push_back(t);
    value.push_back(v);
  }
};

// Least-squares fit of a + b t^q; q from the hint when given, otherwise
// estimated from consecutive differences. Falls back to Richardson (last
// three points) when the fixed-q fit misfits; throws ExtrapolationError on
// non-convergent input.
LimitSeries extrapolate(const LimitSeries& input,
                        std::optional<double> q_hint = {});

}  // namespace plr
