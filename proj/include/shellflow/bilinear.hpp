#pragma once

#include "shellflow/shell_state.hpp"

#include <cstdint>

namespace shellflow {

struct BilinearKind {
    ModelKind kind = ModelKind::goy;
    double delta = 0.5;  ///< Sabra only
    /// Fault-injection hook: conjugates the k_{n-1} band of the Sabra stencil,
    /// which breaks energy annihilation. Never set outside tests.
    bool conjugate_third_band = false;

    static BilinearKind from(const ModelConfig& cfg) { return {cfg.model, cfg.delta, false}; }
};

/// GOY nonlinearity
///   B(u,v)_n = i k_n ( 1/4 conj(v_{n-1}) conj(u_{n+1})
///                     - 1/2 (conj(u_{n+1}) conj(v_{n+2}) + conj(v_{n+1}) conj(u_{n+2}))
///                     + 1/8 conj(u_{n-1}) conj(v_{n-2}) ).
ShellState goy_b(const ShellState& u, const ShellState& v, double k0);

/// Sabra nonlinearity
///   B(u,v)_n = i/3 k_{n+1} [ (1+d) conj(v_{n+1}) u_{n+2} + (2-d) conj(u_{n+1}) v_{n+2} ]
///            + i/3 k_n     [ (1-2d) conj(u_{n-1}) v_{n+1} - (1+d) conj(v_{n-1}) u_{n+1} ]
///            + i/3 k_{n-1} [ (2-d) u_{n-1} v_{n-2} + (1-2d) u_{n-2} v_{n-1} ].
ShellState sabra_b(const ShellState& u, const ShellState& v, double k0, double delta);

ShellState apply_b(const BilinearKind& kind, const ShellState& u, const ShellState& v, double k0);

/// out += scale * B(u, v), without allocating.
void accumulate_b(const BilinearKind& kind, const ShellState& u, const ShellState& v, double k0,
                  double scale, ShellState& out);

/// B~_lambda(x, y) = (B(x1,y1) + lambda B(x2,y1), B(x1,y2) + lambda B(x2,y2)).
/// The lambda terms are skipped entirely when lambda == 0.
CoupledState coupled_b_lambda(const CoupledState& x, const CoupledState& y, double lambda,
                              const BilinearKind& kind, double k0);

/// Multiplier applied to the sampled maxima in the constant estimators.
inline constexpr double constant_safety_factor = 1.5;

/// |B(u,v)|^2_{V'} / (|u|^2_H |v|^2_H) for one pair (0 when either is zero).
double cstar_ratio(const BilinearKind& kind, const ShellState& u, const ShellState& v, double k0);

/// max(|B(u,v)|_H / (||u||_V |v|_H), |B(u,v)|_H / (||v||_V |u|_H)) for one pair.
double c_vh_ratio(const BilinearKind& kind, const ShellState& u, const ShellState& v, double k0);

/// Safety factor times the largest cstar_ratio over `trials` random unit pairs.
double estimate_cstar(const BilinearKind& kind, double k0, std::size_t n_shells, std::size_t trials,
                      std::uint64_t seed);

/// Safety factor times the largest c_vh_ratio over `trials` random unit pairs.
double estimate_c_vh(const BilinearKind& kind, double k0, std::size_t n_shells, std::size_t trials,
                     std::uint64_t seed);

}  // namespace shellflow
