#pragma once

#include "shellflow/bilinear.hpp"
#include "shellflow/noise.hpp"
#include "shellflow/shell_state.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace shellflow {

enum class Scheme { ou_splitting, euler_maruyama };

std::string to_string(Scheme scheme);
Scheme scheme_from_string(const std::string& name);

struct SolverSettings {
    double dt = 0x1.0p-10;
    double t0 = 0.0;
    double t1 = 1.0;
    std::size_t store_every = 1;
    Scheme scheme = Scheme::ou_splitting;
    /// Start of the OU process at t0. Forward runs default to zero; pullback
    /// runs should use pathwise so z depends on (omega, t) only.
    OUStart z_start = OUStart::zero;
    /// Test hook: drop the nonlinear term entirely.
    bool suppress_nonlinearity = false;
};

/// Checks dt > 0, t0 < t1, store_every >= 1 and grid alignment with the path.
void validate_settings(const SolverSettings& settings, const NoisePath& path);

struct Trajectory {
    std::vector<double> times;
    std::vector<CoupledState> states;
    ModelConfig config;
    std::uint64_t seed = 0;
    Scheme scheme = Scheme::ou_splitting;

    const CoupledState& final_state() const { return states.back(); }
};

/// Non-finite state during integration.
class BlowUpError : public std::runtime_error {
public:
    BlowUpError(double time, double v_norm_h, double z_norm_v);

    double time() const { return time_; }
    double v_norm_h() const { return v_norm_h_; }
    double z_norm_v() const { return z_norm_v_; }

private:
    double time_;
    double v_norm_h_;
    double z_norm_v_;
};

/// Exponential Euler for dv/dt + nu A v = -B~_lambda(v+z, v+z) + alpha z.
/// Linear coefficients are computed once; step() reuses internal buffers.
class FlowStepper {
public:
    FlowStepper(const ModelConfig& cfg, double dt, bool suppress_nonlinearity = false);

    /// Advances v in place by one step with z taken at the start of the step.
    /// `t` is only used to label a BlowUpError.
    void step(CoupledState& v, const ShellState& z, double t = 0.0);

    /// Same update for the single nonlinear model (the u-equation at lambda = 0).
    void step_solo(ShellState& v, const ShellState& z, double t = 0.0);

private:
    void nonlinear_term(const CoupledState& v, const ShellState& z);
    void blow_up(const CoupledState& v, const ShellState& z, double t) const;

    ModelConfig cfg_;
    BilinearKind kind_;
    bool suppress_;
    std::vector<double> decay_;  ///< exp(-nu k_n^2 dt)
    std::vector<double> weight_; ///< dt phi_1(-nu k_n^2 dt)
    CoupledState x_;             ///< v + z
    CoupledState nl_;            ///< B~_lambda(x, x)
};

/// One step of the random v-equation; see FlowStepper.
CoupledState step_v(const CoupledState& v, const CoupledState& z, double dt, const ModelConfig& cfg,
                    double t = 0.0);

/// phi(t, omega) u0 on [t0, t1] by OU splitting: v(t0) = u0 - z(t0), then v and
/// z advance in lockstep and u = v + z is stored at t0, every store_every-th
/// step and t1.
Trajectory solve_flow(const CoupledState& u0, const NoisePath& path, const SolverSettings& settings,
                      const ModelConfig& cfg);

/// Same, with z read from a precomputed series (shared across ensemble members).
/// The series must cover the grid steps of [t0, t1] and use cfg.alpha.
Trajectory solve_flow(const CoupledState& u0, const NoisePath& path, const OUSeries& z,
                      const SolverSettings& settings, const ModelConfig& cfg);

/// Flow of the single nonlinear model du = (-nu A u - B(u,u)) dt + dW with the
/// same discretization as the u-component of solve_flow. Returns the stored states.
std::vector<ShellState> solve_solo(const ShellState& u0, const NoisePath& path,
                                   const SolverSettings& settings, const ModelConfig& cfg);

/// Explicit Euler-Maruyama on the SDE itself:
/// u <- u + dt (-nu A u - B~_lambda(u,u)) + dW~. Throws std::domain_error when
/// dt nu k_N^2 > 2.
Trajectory solve_sde_em(const CoupledState& u0, const NoisePath& path, const SolverSettings& settings,
                        const ModelConfig& cfg);

/// Dispatches on settings.scheme.
Trajectory solve(const CoupledState& u0, const NoisePath& path, const SolverSettings& settings,
                 const ModelConfig& cfg);

/// |phi(t+s, omega) u0 - phi(t, theta_s omega) phi(s, omega) u0|_H~ with the
/// OU-splitting scheme, starting at time 0.
double verify_cocycle(const CoupledState& u0, const NoisePath& path, double s, double t,
                      const SolverSettings& settings, const ModelConfig& cfg);

/// Trajectory CSV: header "t,shell,re,im,component", one row per stored time,
/// shell and component (u or w).
std::string trajectory_to_csv(const Trajectory& traj);

/// Inverse of trajectory_to_csv. Only times and states are recovered.
Trajectory trajectory_from_csv(const std::vector<std::string>& lines);

/// Two consecutive rows "u,re_1,im_1,..." and "w,re_1,im_1,...".
std::string to_csv_rows(const CoupledState& x);
CoupledState coupled_state_from_csv_rows(const std::string& u_row, const std::string& w_row);

}  // namespace shellflow
