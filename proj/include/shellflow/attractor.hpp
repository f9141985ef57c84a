#pragma once

#include "shellflow/integrator.hpp"
#include "shellflow/noise.hpp"
#include "shellflow/shell_state.hpp"

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace shellflow {

/// Continuity constants of B and the absolute constants of the dimension bound.
struct AttractorConstants {
    double cstar = 0.0;  ///< |B(u,v)|^2_V' <= cstar |u|^2_H |v|^2_H (single model)
    double c_vh = 0.0;   ///< |B(u,v)|_H <= c_vh ||u||_V |v|_H (single model)
    double K1 = 1.0;
    double K2 = 1.0;
    double K3 = 1.0;

    /// Empirical cstar and c_vh for cfg's model and truncation.
    static AttractorConstants estimate(const ModelConfig& cfg, std::size_t trials = 4000,
                                       std::uint64_t seed = 20240611);

    /// Bound for B~_lambda: (1 + lambda^2) cstar.
    double coupled_cstar(double lambda) const;
    /// Bound for B~_lambda: sqrt(1 + lambda^2) c_vh.
    double coupled_c_vh(double lambda) const;
};

/// alpha_0 = 2 alpha_*, with alpha_* computed for the coupled OU process
/// (E||z~||^2_V~ = 2 E||z||^2_V, constant (1 + lambda^2) cstar).
double alpha_zero(const ModelConfig& cfg, const AttractorConstants& constants);

/// f = (4 cstar^2 / nu) |z|^4_H~ + (8 alpha^2 / (k0 nu)) |z|^2_H~ for the coupled OU state z.
double forcing_f(const CoupledState& z, const ModelConfig& cfg, double cstar);

struct R1Result {
    double value = 1.0;
    double tail_integrand = 0.0;  ///< integrand at the truncated lower limit
    /// max f over the window times the exponential factor at the lower limit,
    /// divided by the mean decay rate of the exponent
    double tail_estimate = 0.0;
};

/// Pathwise integrals behind R1, R2, R3 on the grid [-t_horizon, t_end] of the
/// path. z is the coupled OU process (z, z) with cfg.alpha, started pathwise,
/// so the path anchor must lie at or before -t_horizon. cstar is the bound
/// actually used (pass the coupled one for lambda != 0).
class RadiusIntegrals {
public:
    RadiusIntegrals(const NoisePath& path, const ModelConfig& cfg, double cstar, double t_horizon,
                    double t_end = 0.0);

    double dt() const { return dt_; }
    std::int64_t first_step() const { return first_; }
    std::int64_t last_step() const { return first_ + static_cast<std::int64_t>(r1_.size()) - 1; }

    /// R1^t with the lower limit at -t_horizon; t on the grid.
    double r1_at(double t) const;
    R1Result r1(double t) const;

    /// Mean of 2 cstar ||z~||_V~ - k0 nu / 2 over the window.
    double mean_exponent_rate() const { return mean_g_; }

    double r2() const;
    double r3() const;

    /// Coupled OU sample |z~(t)|^2_H~ and ||z~(t)||_V~.
    double z_h_sq(double t) const;
    double z_v(double t) const;

private:
    std::size_t index(double t) const;
    /// Trapezoid of values[j] over the grid points of [a, b].
    template <class F>
    double trapezoid(double a, double b, F value) const;

    const NoisePath* path_;
    ModelConfig cfg_;
    double cstar_;
    double dt_;
    std::int64_t first_;
    std::vector<double> zh2_;
    std::vector<double> zv_;
    std::vector<double> f_;
    std::vector<double> g_;
    std::vector<double> cum_g_;  ///< trapezoid integral of g from the lower limit
    std::vector<double> r1_;
    double mean_g_ = 0.0;
};

struct AbsorbingRadii {
    std::vector<double> r1_times;   ///< grid on [-1, 0]
    std::vector<double> r1_values;  ///< R1^t
    double r1_tail = 0.0;           ///< tail estimate of R1^0
    double r2 = 0.0;
    double r3 = 0.0;
    double alpha_used = 0.0;
    double cstar_used = 0.0;
    std::uint64_t seed = 0;
};

/// R1 on [-1, 0], R2 and R3 for the path, with alpha = cfg.alpha and the
/// coupled cstar for cfg.lambda.
AbsorbingRadii absorbing_radii(const NoisePath& path, const ModelConfig& cfg,
                               const AttractorConstants& constants, double t_horizon = 200.0);

R1Result radius_r1(const NoisePath& path, const ModelConfig& cfg, const AttractorConstants& constants,
                   double t, double t_horizon = 200.0);
double radius_r2(const NoisePath& path, const ModelConfig& cfg, const AttractorConstants& constants,
                 double t_horizon = 200.0);
double radius_r3(const NoisePath& path, const ModelConfig& cfg, const AttractorConstants& constants,
                 double t_horizon = 200.0);

/// ||u - z~||^2_V~: the quantity bounded by R3 at time 0 for a point u of the flow.
double v_norm_sq(const CoupledState& u, const ShellState& z, double k0);

struct PullbackCloud {
    std::vector<CoupledState> points;
    double lambda = 0.0;
    double pullback_time = 0.0;
    std::size_t members = 0;
    std::uint64_t seed = 0;
};

/// M points uniform in the H~ ball of the given radius; deterministic in sample_seed.
std::vector<CoupledState> sample_ball(std::size_t n_shells, std::size_t members, double radius,
                                      std::uint64_t sample_seed);

/// Error raised when one ensemble member blows up.
class MemberBlowUp : public std::runtime_error {
public:
    MemberBlowUp(std::size_t member, const BlowUpError& cause);
    std::size_t member() const { return member_; }

private:
    std::size_t member_;
};

/// Evolves each initial point from -pullback_time to 0 along the path, with
/// the OU process started pathwise. Only settings.dt is used from the solver settings.
PullbackCloud pullback_cloud(const NoisePath& path, const ModelConfig& cfg,
                             const std::vector<CoupledState>& initial, double pullback_time,
                             const SolverSettings& settings);

/// Same on a fresh path over [-pullback_time, 0] for `seed`, with M points
/// from the ball of the given radius.
PullbackCloud pullback_cloud(std::uint64_t seed, double lambda, const ModelConfig& cfg, std::size_t members,
                             double pullback_time, double initial_radius, const SolverSettings& settings);

double cloud_diameter(const PullbackCloud& cloud);
/// Largest nearest-neighbour distance within the cloud (0 for a singleton).
double cloud_resolution(const PullbackCloud& cloud);

/// sup_{x in a} inf_{y in b} |x - y|_H~.
double hausdorff_semidistance(const PullbackCloud& a, const PullbackCloud& b);

struct SemicontinuityRow {
    double lambda = 0.0;
    double d_forward = 0.0;   ///< d_H(A_lambda, A_lambda0)
    double d_backward = 0.0;  ///< d_H(A_lambda0, A_lambda)
    double resolution = 0.0;  ///< max of both cloud resolutions
};

struct SemicontinuityResult {
    std::vector<SemicontinuityRow> rows;
    std::vector<PullbackCloud> clouds;  ///< one per lambda, in grid order
};

/// Clouds for each lambda on one shared path and initial set; distances to the lambda0 cloud.
SemicontinuityResult upper_semicontinuity_curve(const NoisePath& path, const std::vector<double>& lambdas,
                                                double lambda0, const ModelConfig& cfg,
                                                const std::vector<CoupledState>& initial,
                                                double pullback_time, const SolverSettings& settings);

struct SqueezingReport {
    std::vector<double> c_h_times;
    std::vector<double> c_h_samples;
    double e_c_h = 0.0;
    double e_c_h_half = 0.0;  ///< same estimate over the first half of the window
    std::size_t n_modes = 0;
    double dim_bound = 0.0;
    double cstar = 0.0;  ///< coupled bound used
    double c_vh = 0.0;   ///< coupled bound used
    double K1 = 1.0;
    double K2 = 1.0;
    double K3 = 1.0;
    double mu = 0.0;        ///< nu k_{n+1}
    double delta_sq = 0.0;  ///< sqrt(2) C^2 / (nu k_{n+1})^{3/2}
    double gamma0 = 0.0;    ///< nu k0
    double c2_tilde = 0.0;  ///< time average of exp(cstar^2 ||z~||^2_V~ / (4 gamma0))
    double c2_tilde_half = 0.0;
    bool c2_tilde_stable = false;  ///< half and full window within 10%
};

/// Samples C_H(theta_s omega) = R1^2 + (cstar/nu) R1 for s on the grid of
/// [0, t_erg] and averages in time. R1(theta_s omega) equals R1^s(omega) with
/// the lower limit kept at -t_horizon. The path anchor must be at or before -t_horizon.
SqueezingReport squeezing_constants(const NoisePath& path, const ModelConfig& cfg,
                                    const AttractorConstants& constants, double t_erg, std::size_t n_modes,
                                    double t_horizon = 200.0);

struct DimensionBound {
    std::size_t n = 0;
    double bound = 0.0;
};

/// Smallest n with sqrt(2) C^2 / (nu k_{n+1})^{3/2} <= K1 and nu k_{n+1} >= K2 E(C_H),
/// and the bound K3 max(n ln n, ln 2).
DimensionBound dimension_bound(double e_c_h, double c, double nu, double k0, double K1, double K2,
                               double K3);

struct SqueezingCheck {
    double max_ratio_low = 0.0;   ///< |Pi d(t)| over its bound
    double max_ratio_high = 0.0;  ///< |(I - Pi) d(t)| over its bound
    std::size_t pairs = 0;
    bool passed = false;          ///< both ratios <= 1 + 1e-6
};

/// Integrates each pair on [0, t_final] along the path and checks both
/// squeezing inequalities at every grid time. Pi keeps shells 1..n_modes of
/// both components.
SqueezingCheck verify_squeezing(const NoisePath& path, const ModelConfig& cfg,
                                const AttractorConstants& constants,
                                const std::vector<std::pair<CoupledState, CoupledState>>& pairs,
                                std::size_t n_modes, double t_final, const SolverSettings& settings,
                                double t_horizon = 200.0);

}  // namespace shellflow
