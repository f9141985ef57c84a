#pragma once

#include "shellflow/shell_state.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace shellflow {

/// Independent random streams carved out of one path seed.
enum class NoiseStream : std::uint64_t {
    increments = 1,    ///< Brownian increments dW
    ou_auxiliary = 2,  ///< part of the OU innovation orthogonal to dW
    stationary = 3,    ///< stationary OU draws
};

/// Standard complex normal (E|xi|^2 = 1, independent real and imaginary parts of
/// variance 1/2). A pure function of its key.
Complex keyed_normal(std::uint64_t seed, NoiseStream stream, int shell, std::int64_t index);

/// Two-sided complex Brownian path W_n(t) = sigma_n beta_n(t) on a time grid.
///
/// Randomness lives on a base grid of spacing base_dt; the path grid uses
/// dt = stride * base_dt, so paths with different strides over the same seed
/// are refinements of one another. Increments are generated on demand from
/// (seed, shell, absolute base index), which makes theta-shifts O(1).
class NoisePath {
public:
    NoisePath(std::uint64_t seed, double base_dt, std::int64_t stride, std::int64_t offset,
              std::int64_t anchor, double t_min, double t_max, double shift,
              std::vector<Complex> sigma);

    std::uint64_t seed() const { return seed_; }
    double dt() const { return base_dt_ * static_cast<double>(stride_); }
    double base_dt() const { return base_dt_; }
    std::int64_t stride() const { return stride_; }
    double t_min() const { return t_min_; }
    double t_max() const { return t_max_; }
    double shift() const { return shift_; }  ///< accumulated theta offset
    const std::vector<Complex>& sigma() const { return sigma_; }
    std::size_t n_shells() const { return sigma_.size(); }

    /// Grid index j with t = j * dt; throws std::invalid_argument when t is off the grid.
    std::int64_t step_index(double t) const;
    double time_of(std::int64_t step) const { return static_cast<double>(step) * dt(); }

    /// Base-grid index of local step j. Invariant under theta-shifts of the same time point.
    std::int64_t absolute_index(std::int64_t step) const { return offset_ + step * stride_; }

    /// W_n(t_{j+1}) - W_n(t_j); shell is 1-based.
    Complex increment(int shell, std::int64_t step) const;

    /// W_n(t_j), with W(0) = 0.
    Complex brownian(int shell, std::int64_t step) const;

    /// int_{t_j}^{t_{j+1}} exp(-rate (t_{j+1} - s)) dW_n(s), drawn jointly with
    /// increment() so that the pair has the exact Gaussian law.
    Complex ou_innovation(int shell, std::int64_t step, double rate) const;

    /// Standard complex normal tied to the absolute time of local step j.
    Complex stationary_draw(int shell, std::int64_t step) const;

    /// Local step index where the pathwise stationary OU process is started.
    std::int64_t anchor_step() const;

    /// Same Brownian path observed on a grid `factor` times coarser.
    NoisePath coarsened(std::int64_t factor) const;

    /// Path shifted by a whole number of steps (theta_{steps * dt}).
    NoisePath shifted(std::int64_t steps) const;

    /// Same randomness on the same grid. The informational window is ignored.
    friend bool operator==(const NoisePath&, const NoisePath&);

private:
    Complex base_increment(int shell, std::int64_t base_index) const;
    std::pair<Complex, Complex> base_pair(int shell, std::int64_t base_index) const;

    std::uint64_t seed_;
    double base_dt_;
    std::int64_t stride_;
    std::int64_t offset_;  ///< base index of local time 0
    std::int64_t anchor_;  ///< base index where the pathwise OU process starts
    double t_min_;
    double t_max_;
    double shift_;
    std::vector<Complex> sigma_;
};

/// Path on [t_min, t_max] (widened outward to the grid) with spacing dt.
NoisePath sample_path(std::uint64_t seed, double dt, double t_min, double t_max,
                      std::vector<Complex> sigma);

/// theta_s: the path omega(s + .) - omega(s). s must be a multiple of dt.
NoisePath shift_theta(const NoisePath& path, double s);

/// Ornstein-Uhlenbeck state. The coupled process (z, z) has identical
/// components because both equations see the same noise.
struct OUState {
    ShellState z;
    double alpha = 0.0;
    double t = 0.0;

    CoupledState coupled() const { return CoupledState(z, z); }
};

/// Exact one-step update with cached per-shell coefficients.
class OUPropagator {
public:
    OUPropagator(const NoisePath& path, double alpha, double nu, double k0);

    /// z(t_{j+1}) from z(t_j).
    void advance(ShellState& z, std::int64_t step) const;

private:
    struct ShellCoefficients {
        int shell;
        Complex sigma;
        double decay;       ///< exp(-rate dt)
        double fine_decay;  ///< exp(-rate base_dt)
        double a;           ///< weight on the base-grid increment
        double b;           ///< weight on the auxiliary normal
    };
    const NoisePath* path_;
    std::vector<ShellCoefficients> forced_;
    std::vector<double> decay_;
};

/// z_n <- exp(-(nu k_n^2 + alpha) dt) z_n + exact stochastic convolution over the step.
OUState ou_step(const OUState& state, const NoisePath& path, double dt, double nu, double k0);

/// Exact stationary draw: z_n ~ CN(0, |sigma_n|^2 / (2 (nu k_n^2 + alpha))).
OUState ou_stationary_init(std::uint64_t seed, double alpha, double nu, double k0,
                           const std::vector<Complex>& sigma);

/// Stationary draw tied to the absolute time t of the path.
OUState ou_stationary_init(const NoisePath& path, double t, double alpha, double nu, double k0);

/// How the OU process is started at the beginning of a run.
enum class OUStart {
    zero,        ///< z(t0) = 0
    stationary,  ///< stationary draw tied to the absolute time t0
    pathwise,    ///< stationary at the path anchor, evolved to t0: a function of (omega, t) only
};

/// z at grid steps first..last (inclusive).
struct OUSeries {
    std::int64_t first_step = 0;
    double alpha = 0.0;
    std::vector<ShellState> z;

    const ShellState& at_step(std::int64_t step) const {
        return z[static_cast<std::size_t>(step - first_step)];
    }
};

OUSeries ou_series(const NoisePath& path, double alpha, double nu, double k0, std::int64_t first,
                   std::int64_t last, OUStart start);

/// Closed form E||z^alpha||_V^2 = sum_n k_n^2 |sigma_n|^2 / (2 (nu k_n^2 + alpha)).
double expected_v_norm_sq(double alpha, double nu, double k0, const std::vector<Complex>& sigma);

/// Smallest alpha (bisection, relative tolerance 1e-6) with
/// expected_v_norm_sq(alpha) <= k0 nu / (8 cstar); 0 when alpha = 0 already qualifies.
double alpha_star(double nu, double k0, const std::vector<Complex>& sigma, double cstar);

}  // namespace shellflow
