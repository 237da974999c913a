#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <stdexcept>

namespace plr {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Key = value configuration with section headers. Unknown keys are errors
// (configs are archived next to outputs; silent typos would poison reruns).
struct ExperimentConfig {
  // [domain]
  double x1_min = -1.0, x1_max = 1.0, x2_max = 1.0;
  // [grid]
  int n1 = 257, n2 = 129;
  // [coefficients]
  std::string sigma = "1";
  std::string gamma = "1";
  double p = 3.0;
  double lambda = 0.1;  // sigma bounds (lambda, 1/lambda)
  double m1 = 0.1;      // gamma bounds (m1, 1/m1)
  // [solver]
  double delta = -1.0;  // <0 means auto
  double theta = 1.0;
  double tolerance = 1e-12;
  int max_iterations = 200;
  // [schedules]
  double eps0 = 0.1;
  double eps_ratio = 0.5;
  int eps_count = 6;
  std::vector<double> m_values = {2.8284271247461903, 4.0, 5.656854249492381,
                                  8.0, 11.313708498984761};
  double n_exponent = 1.5;
  double mn_margin = 0.5;
  std::vector<double> n_values = {4.0, 8.0, 16.0, 32.0, 64.0};
  double n_margin = 0.5;
  // [probes]
  std::string eta = "flat_top";  // flat_top | wide_top
  double fd_step = 1e-3;
  // [run]
  std::string pipeline = "reconstruct-gamma";
  std::string mode = "oracle";  // oracle | inverse
  std::string u1_data = "x1";
  std::string data = "x1";    // forward / dn-check Dirichlet data
  std::string w_data = "x1";  // dn-check test-function data
  std::string output_dir = "out";
  std::uint64_t seed = 20250825;
  int workers = 1;
  bool score = true;  // attach ground truth to inverse reports post hoc
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);
// canonical form; parse_config_text(print_config(c)) reproduces c exactly
std::string print_config(const ExperimentConfig& c);
// semantic validation (grid sizes, bounds, expressions, enums); throws
// ConfigError with the offending key
void validate_config(const ExperimentConfig& c);

}  // namespace plr
