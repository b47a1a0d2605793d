#pragma once

#include "lrei/config.hpp"
#include "lrei/integrate.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace lrei {

// Exit codes shared by the library-level runners and the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitResource = 4;

std::string format_csv_value(double v);  // 17 significant digits, C locale

// Realize the configured initial state in factored form. Werner specs
// return the rank-1 part; the caller applies the damping rescale.
LowRankState initial_lowrank(const ExperimentConfig& cfg);

// run: CSV + manifest; returns an exit code.
int run_experiment(const ExperimentConfig& cfg, std::ostream& log);

// converge: endpoint error table against the closed-form (rank-1) or a
// fine dense reference; CSV columns scheme,h,error,fitted_order.
int run_convergence(const ExperimentConfig& cfg,
                    const std::vector<std::string>& schemes,
                    const std::vector<double>& h_values, std::ostream& log);

// bench: seconds per step averaged over >= 5 timed steps after a
// warm-up; CSV columns n,r,scheme,seconds_per_step[,dense_seconds_per_step].
int run_benchmark(const ExperimentConfig& cfg, const std::vector<int>& n_values,
                  const std::vector<int>& r_values,
                  const std::vector<std::string>& schemes, bool compare_dense,
                  std::ostream& log);

// validate: dry-run diagnostics and memory estimate, no computation.
int run_validate(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace lrei
