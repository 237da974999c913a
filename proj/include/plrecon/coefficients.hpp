#pragma once

#include <memory>
#include <string>

#include "plrecon/grid.hpp"

namespace plr {

struct ParseError : std::runtime_error {
  size_t position;
  ParseError(const std::string& msg, size_t pos)
      : std::runtime_error(msg + " (at position " + std::to_string(pos) + ")"),
        position(pos) {}
};

// Arithmetic expressions over x1, x2 with +,-,*,/,^ and exp,sin,cos,sqrt.
// Precedence: ^ > unary minus > *,/ > +,-.
class CoeffExpr {
 public:
  CoeffExpr() = default;

  static CoeffExpr parse(const std::string& src);
  double eval(double x1, double x2) const;
  std::string print() const;  // canonical form; parse(print()) == tree
  bool equals(const CoeffExpr& other) const;
  bool empty() const { return !root_; }

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
};

struct ProblemCoefficients {
  CoeffExpr sigma, gamma;
  double p = 3.0;
  double lambda = 0.1;  // lower bound for sigma; upper bound lambda^-1
  double m1 = 0.1;      // same for gamma
};

struct BoundsReport {
  bool ok = false;
  double sigma_min = 0, sigma_max = 0, gamma_min = 0, gamma_max = 0;
  std::string message;
};

// min/max over grid nodes; fails if lambda < sigma < 1/lambda or
// m1 < gamma < 1/m1 is violated anywhere (offending expression and node are
// named), or if evaluation is non-finite
BoundsReport validate_bounds(const ProblemCoefficients& c, const Grid& g);

ScalarField sample(const CoeffExpr& c, const Grid& g);

}  // namespace plr
