#pragma once

#include "shellflow/integrator.hpp"
#include "shellflow/shell_state.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace shellflow {

struct AttractorOptions {
    std::size_t members = 16;
    double pullback_time = 50.0;
    std::vector<double> lambdas{0.0, 0.01, 0.1, 0.5};
    double lambda0 = 0.0;
    double initial_radius = 0.0;  ///< 0 selects sqrt(R1^0) of the path
    double t_horizon = 200.0;
    double t_erg = 500.0;
    std::size_t n_modes = 6;
    double K1 = 1.0;
    double K2 = 1.0;
    double K3 = 1.0;
    double cstar = 0.0;  ///< 0 selects the empirical estimate
    double c_vh = 0.0;   ///< 0 selects the empirical estimate
    std::size_t constant_trials = 4000;
    std::size_t squeeze_pairs = 50;
    double squeeze_time = 5.0;
    double squeeze_pullback = 2.0;  ///< pullback time of the cloud the pairs are drawn from
};

struct StatsOptions {
    std::vector<double> p_list{1.0, 2.0, 4.0};
    int n_lo = 0;  ///< 0 selects the default range heuristic
    int n_hi = 0;
};

struct RunConfig {
    ModelConfig model;
    bool alpha_auto = false;  ///< alpha = 2 alpha_* resolved at run time
    SolverSettings solver;
    std::string initial = "zero";  ///< zero | ball
    double initial_radius = 1.0;   ///< for initial = ball
    AttractorOptions attractor;
    StatsOptions stats;
    bool tamper_sabra_conjugation = false;  ///< test hook for validate
};

/// Defaults: nu = 1, k0 = 1, N = 16 GOY, forcing on the first three shells.
RunConfig default_run_config();

/// Parses an INI file with sections [model], [solver], [attractor], [stats], [test].
/// Unknown keys and malformed values throw std::invalid_argument.
RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& text);

/// Comma list of reals ("1, 2.5, 1e-3").
std::vector<double> parse_real_list(const std::string& text);

}  // namespace shellflow
