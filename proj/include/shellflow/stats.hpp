#pragma once

#include "shellflow/integrator.hpp"
#include "shellflow/noise.hpp"

#include <string>
#include <utility>
#include <vector>

namespace shellflow {

enum class Component { u, w, q };

std::string to_string(Component c);
Component component_from_string(const std::string& name);

/// S_p(k_n) = (1/T) int |x_n(t)|^p dt for one component, n = 1..N.
struct StructureTable {
    double p = 2.0;
    Component component = Component::u;
    double k0 = 1.0;
    double t_start = 0.0;
    double t_end = 0.0;
    std::size_t samples = 0;
    std::vector<double> values;  ///< values[n-1] = S_p(k_n)
};

/// Trapezoid time average over the stored samples (a single sample is used as is).
/// Component q is u + lambda w with lambda from traj.config.
StructureTable structure_function(const Trajectory& traj, double p, Component component);

/// Mean of the per-trajectory tables (ensemble average on top of the time average).
StructureTable ensemble_structure_function(const std::vector<Trajectory>& trajs, double p, Component component);

struct ZetaFit {
    double zeta = 0.0;     ///< minus the slope of log S_p against log k_n
    double residual = 0.0; ///< RMS residual of the linear fit in log space
    double intercept = 0.0;
};

/// Least squares over shells n_lo..n_hi (1-based, inclusive, at least 3 shells).
/// Throws std::domain_error naming the first shell whose S_p is not positive.
ZetaFit fit_zeta(const StructureTable& table, int n_lo, int n_hi);

/// Longest run of at least three shells whose local log-log slopes stay within
/// `tolerance` (relative) of their mean. When no run qualifies, the longest run
/// of at least three shells with positive S_p, else the full range.
std::pair<int, int> default_fit_range(const StructureTable& table, double tolerance = 0.1);

struct ContinuityRow {
    double lambda = 0.0;
    double distance = 0.0;  ///< max over points and stored times of |x^lambda - x^lambda0|_H~
};

/// Runs every initial point under each lambda and under lambda0 on the shared path.
/// Rows are sorted by |lambda - lambda0| (stable for ties).
std::vector<ContinuityRow> lambda_continuity_sweep(const NoisePath& path, const std::vector<double>& lambdas,
                                                   double lambda0, const std::vector<CoupledState>& initial,
                                                   const SolverSettings& settings, const ModelConfig& cfg);

/// Same with M points drawn from the H~ ball of radius b_radius (seeded) and the path for `seed`.
std::vector<ContinuityRow> lambda_continuity_sweep(std::uint64_t seed, const std::vector<double>& lambdas,
                                                   double lambda0, double b_radius, std::size_t members,
                                                   const SolverSettings& settings, const ModelConfig& cfg);

/// |u^lambda - u^0|_H evaluated as |q^lambda - q^0 - lambda w^lambda|_H.
double u_distance_via_q(const CoupledState& x, const CoupledState& x0, double lambda);

struct ExponentComparison {
    double p = 0.0;
    double zeta_u = 0.0;
    double zeta_w = 0.0;
    double difference = 0.0;  ///< |zeta_u - zeta_w|
};

std::vector<ExponentComparison> compare_uw_exponents(const Trajectory& traj, const std::vector<double>& p_list,
                                                     int n_lo, int n_hi);

}  // namespace shellflow
