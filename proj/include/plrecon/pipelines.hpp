#pragma once

#include "plrecon/config.hpp"
#include "plrecon/reconstruct.hpp"

namespace plr {

// Executes the configured pipeline, writes <output_dir>/summary.txt and
// <output_dir>/series.csv, and returns the process exit code:
//   0 ok, 1 config error, 2 solver failure, 3 extrapolation failure.
// The optional out-parameters receive the same text that was written.
int run_pipeline(const ExperimentConfig& c, std::string* summary_out = nullptr,
                 std::string* csv_out = nullptr);

// Resolved experiment plan (grids, schedules, margins); performs no solves.
std::string describe_pipeline(const ExperimentConfig& c);

}  // namespace plr
