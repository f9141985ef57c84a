#include "shellflow/bilinear.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace shellflow {
namespace {

constexpr Complex I{0.0, 1.0};

void check_sizes(const ShellState& u, const ShellState& v, const ShellState& out) {
    if (u.size() != v.size() || u.size() != out.size())
        throw std::invalid_argument("bilinear operands differ in shell count");
}

void goy_accumulate(const ShellState& u_state, const ShellState& v_state, double k0, double scale,
                    ShellState& out) {
    check_sizes(u_state, v_state, out);
    const Complex* u = u_state.shell_origin();
    const Complex* v = v_state.shell_origin();
    Complex* o = out.shell_origin();
    const int n_shells = static_cast<int>(u_state.size());
    for (int n = 1; n <= n_shells; ++n) {
        const Complex t = 0.25 * v[n - 1] * u[n + 1] - 0.5 * (u[n + 1] * v[n + 2] + v[n + 1] * u[n + 2]) +
                          0.125 * u[n - 1] * v[n - 2];
        o[n] += (scale * std::ldexp(k0, n)) * I * std::conj(t);
    }
}

void sabra_accumulate(const ShellState& u_state, const ShellState& v_state, double k0, double delta,
                      bool conjugate_third_band, double scale, ShellState& out) {
    check_sizes(u_state, v_state, out);
    if (!std::isfinite(delta)) throw std::invalid_argument("Sabra delta must be finite");
    const Complex* u = u_state.shell_origin();
    const Complex* v = v_state.shell_origin();
    Complex* o = out.shell_origin();
    const double a = 1.0 + delta;
    const double b = 2.0 - delta;
    const double c = 1.0 - 2.0 * delta;
    const int n_shells = static_cast<int>(u_state.size());
    for (int n = 1; n <= n_shells; ++n) {
        const Complex band_up = a * std::conj(v[n + 1]) * u[n + 2] + b * std::conj(u[n + 1]) * v[n + 2];
        const Complex band_mid = c * std::conj(u[n - 1]) * v[n + 1] - a * std::conj(v[n - 1]) * u[n + 1];
        const Complex band_low = conjugate_third_band
                                     ? b * std::conj(u[n - 1]) * std::conj(v[n - 2]) +
                                           c * std::conj(u[n - 2]) * std::conj(v[n - 1])
                                     : b * u[n - 1] * v[n - 2] + c * u[n - 2] * v[n - 1];
        const Complex sum = std::ldexp(k0, n + 1) * band_up + std::ldexp(k0, n) * band_mid +
                            std::ldexp(k0, n - 1) * band_low;
        o[n] += (scale / 3.0) * I * sum;
    }
}

ShellState random_unit(std::size_t n_shells, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    ShellState x(n_shells);
    for (std::size_t i = 0; i < n_shells; ++i) x[i] = Complex(normal(rng), normal(rng));
    x *= 1.0 / norm_h(x);
    return x;
}

template <class Ratio>
double sampled_max(const BilinearKind& kind, double k0, std::size_t n_shells, std::size_t trials,
                   std::uint64_t seed, Ratio ratio) {
    std::mt19937_64 rng(seed);
    double best = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        const ShellState u = random_unit(n_shells, rng);
        const ShellState v = random_unit(n_shells, rng);
        best = std::max(best, ratio(kind, u, v, k0));
    }
    return constant_safety_factor * best;
}

}  // namespace

ShellState goy_b(const ShellState& u, const ShellState& v, double k0) {
    ShellState out(u.size());
    goy_accumulate(u, v, k0, 1.0, out);
    return out;
}

ShellState sabra_b(const ShellState& u, const ShellState& v, double k0, double delta) {
    ShellState out(u.size());
    sabra_accumulate(u, v, k0, delta, false, 1.0, out);
    return out;
}

void accumulate_b(const BilinearKind& kind, const ShellState& u, const ShellState& v, double k0,
                  double scale, ShellState& out) {
    if (kind.kind == ModelKind::goy)
        goy_accumulate(u, v, k0, scale, out);
    else
        sabra_accumulate(u, v, k0, kind.delta, kind.conjugate_third_band, scale, out);
}

ShellState apply_b(const BilinearKind& kind, const ShellState& u, const ShellState& v, double k0) {
    ShellState out(u.size());
    accumulate_b(kind, u, v, k0, 1.0, out);
    return out;
}

CoupledState coupled_b_lambda(const CoupledState& x, const CoupledState& y, double lambda,
                              const BilinearKind& kind, double k0) {
    if (x.size() != y.size()) throw std::invalid_argument("coupled operands differ in shell count");
    CoupledState out(x.size());
    accumulate_b(kind, x.u, y.u, k0, 1.0, out.u);
    accumulate_b(kind, x.u, y.w, k0, 1.0, out.w);
    if (lambda != 0.0) {
        accumulate_b(kind, x.w, y.u, k0, lambda, out.u);
        accumulate_b(kind, x.w, y.w, k0, lambda, out.w);
    }
    return out;
}

double cstar_ratio(const BilinearKind& kind, const ShellState& u, const ShellState& v, double k0) {
    const double hu = norm_h(u);
    const double hv = norm_h(v);
    if (hu == 0.0 || hv == 0.0) return 0.0;
    const double b = norm_v_prime(apply_b(kind, u, v, k0), k0);
    return (b * b) / (hu * hu * hv * hv);
}

double c_vh_ratio(const BilinearKind& kind, const ShellState& u, const ShellState& v, double k0) {
    const double hu = norm_h(u);
    const double hv = norm_h(v);
    if (hu == 0.0 || hv == 0.0) return 0.0;
    const double b = norm_h(apply_b(kind, u, v, k0));
    return std::max(b / (norm_v(u, k0) * hv), b / (norm_v(v, k0) * hu));
}

double estimate_cstar(const BilinearKind& kind, double k0, std::size_t n_shells, std::size_t trials,
                      std::uint64_t seed) {
    return sampled_max(kind, k0, n_shells, trials, seed, cstar_ratio);
}

double estimate_c_vh(const BilinearKind& kind, double k0, std::size_t n_shells, std::size_t trials,
                     std::uint64_t seed) {
    return sampled_max(kind, k0, n_shells, trials, seed, c_vh_ratio);
}

}  // namespace shellflow
