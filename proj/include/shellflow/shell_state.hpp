#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace shellflow {

using Complex = std::complex<double>;

enum class ModelKind { goy, sabra };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

/// Wavenumber k_n = k0 * 2^n of shell n (n >= 1).
double wavenumber(int n, double k0);

/// Complex shell amplitudes u_1..u_N.
///
/// Storage is 0-based (element i holds shell n = i + 1) and padded with two
/// zero cells on each side, so stencils may read shells -1, 0, N+1 and N+2
/// without branching.
class ShellState {
public:
    static constexpr std::size_t min_shells = 4;
    static constexpr std::size_t guard = 2;

    explicit ShellState(std::size_t n_shells);
    explicit ShellState(std::span<const Complex> amplitudes);

    /// Unit vector e_n (1-based shell index).
    static ShellState unit(std::size_t n_shells, int shell);

    std::size_t size() const { return data_.size() - 2 * guard; }

    Complex operator[](std::size_t i) const { return data_[i + guard]; }
    Complex& operator[](std::size_t i) { return data_[i + guard]; }

    /// Amplitude of shell n (1-based); zero on the virtual shells -1, 0, N+1, N+2.
    Complex shell(int n) const { return data_[static_cast<std::size_t>(n + 1)]; }

    /// Pointer p with p[n] == u_n for n in [-1, N+2].
    const Complex* shell_origin() const { return data_.data() + 1; }
    Complex* shell_origin() { return data_.data() + 1; }

    std::span<const Complex> amplitudes() const { return {data_.data() + guard, size()}; }
    std::span<Complex> amplitudes() { return {data_.data() + guard, size()}; }

    bool is_finite() const;

    ShellState& operator+=(const ShellState& other);
    ShellState& operator-=(const ShellState& other);
    ShellState& operator*=(double s);
    ShellState& operator*=(Complex s);

    friend bool operator==(const ShellState& a, const ShellState& b) { return a.data_ == b.data_; }

private:
    std::vector<Complex> data_;
};

ShellState operator+(ShellState a, const ShellState& b);
ShellState operator-(ShellState a, const ShellState& b);
ShellState operator*(double s, ShellState a);
ShellState operator*(Complex s, ShellState a);

/// Pair (u, w) living in H x H.
struct CoupledState {
    ShellState u;
    ShellState w;

    CoupledState(ShellState u_, ShellState w_);
    explicit CoupledState(std::size_t n_shells) : u(n_shells), w(n_shells) {}

    std::size_t size() const { return u.size(); }
    bool is_finite() const { return u.is_finite() && w.is_finite(); }

    CoupledState& operator+=(const CoupledState& o);
    CoupledState& operator-=(const CoupledState& o);
    CoupledState& operator*=(double s);

    friend bool operator==(const CoupledState& a, const CoupledState& b) = default;
};

CoupledState operator+(CoupledState a, const CoupledState& b);
CoupledState operator-(CoupledState a, const CoupledState& b);
CoupledState operator*(double s, CoupledState a);

// Norms. Plain left-to-right summation in double precision.
double norm_h(const ShellState& x);
double norm_v(const ShellState& x, double k0);
double norm_v_prime(const ShellState& x, double k0);
double inner_h(const ShellState& x, const ShellState& y);  ///< Re sum x_n conj(y_n)

double norm_h(const CoupledState& x);
double norm_v(const CoupledState& x, double k0);
double inner_h(const CoupledState& x, const CoupledState& y);

/// (A^a x)_n = k_n^{2a} x_n.
ShellState apply_a_alpha(const ShellState& x, double alpha_exp, double k0);

struct QRho {
    ShellState q;    ///< u^lambda + lambda w^lambda
    ShellState rho;  ///< q - u^0
};

/// Diagnostic pair used to compare a lambda-run x against the decoupled run x0.
QRho combine_q_rho(const CoupledState& x, const CoupledState& x0, double lambda);

/// Scalars and forcing spectrum shared by every experiment.
struct ModelConfig {
    double nu = 1.0;
    double k0 = 1.0;
    std::size_t n_shells = 16;
    ModelKind model = ModelKind::goy;
    double delta = 0.5;
    double lambda = 0.0;
    std::vector<Complex> sigma;  ///< length n_shells
    double alpha = 0.0;
    double epsilon = 1.0;
};

/// Throws std::invalid_argument on a hard violation; returns warnings otherwise.
std::vector<std::string> validate_config(const ModelConfig& cfg);

/// One CSV row: re_1,im_1,...,re_N,im_N.
std::string to_csv_row(const ShellState& x);
ShellState shell_state_from_csv_row(const std::string& row);

}  // namespace shellflow
