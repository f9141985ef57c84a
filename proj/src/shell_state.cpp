#include "shellflow/shell_state.hpp"

#include "shellflow/io.hpp"

#include <cmath>
#include <stdexcept>

namespace shellflow {

std::string to_string(ModelKind kind) {
    return kind == ModelKind::goy ? "goy" : "sabra";
}

ModelKind model_kind_from_string(const std::string& name) {
    if (name == "goy" || name == "GOY") return ModelKind::goy;
    if (name == "sabra" || name == "Sabra") return ModelKind::sabra;
    throw std::invalid_argument("unknown model kind '" + name + "'");
}

double wavenumber(int n, double k0) {
    if (n < 1) throw std::domain_error("shell index must be >= 1");
    return std::ldexp(k0, n);
}

ShellState::ShellState(std::size_t n_shells) {
    if (n_shells < min_shells)
        throw std::invalid_argument("a shell state needs at least 4 shells");
    data_.assign(n_shells + 2 * guard, Complex{});
}

ShellState::ShellState(std::span<const Complex> amplitudes) : ShellState(amplitudes.size()) {
    for (std::size_t i = 0; i < amplitudes.size(); ++i) data_[i + guard] = amplitudes[i];
}

ShellState ShellState::unit(std::size_t n_shells, int shell) {
    ShellState x(n_shells);
    if (shell < 1 || static_cast<std::size_t>(shell) > n_shells)
        throw std::out_of_range("unit vector shell out of range");
    x[static_cast<std::size_t>(shell - 1)] = 1.0;
    return x;
}

bool ShellState::is_finite() const {
    for (const auto& c : data_)
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
    return true;
}

ShellState& ShellState::operator+=(const ShellState& other) {
    if (other.size() != size()) throw std::invalid_argument("shell count mismatch");
    for (std::size_t i = guard; i < data_.size() - guard; ++i) data_[i] += other.data_[i];
    return *this;
}

ShellState& ShellState::operator-=(const ShellState& other) {
    if (other.size() != size()) throw std::invalid_argument("shell count mismatch");
    for (std::size_t i = guard; i < data_.size() - guard; ++i) data_[i] -= other.data_[i];
    return *this;
}

ShellState& ShellState::operator*=(double s) {
    for (auto& c : data_) c *= s;
    return *this;
}

ShellState& ShellState::operator*=(Complex s) {
    for (auto& c : data_) c *= s;
    return *this;
}

ShellState operator+(ShellState a, const ShellState& b) { return a += b; }
ShellState operator-(ShellState a, const ShellState& b) { return a -= b; }
ShellState operator*(double s, ShellState a) { return a *= s; }
ShellState operator*(Complex s, ShellState a) { return a *= s; }

CoupledState::CoupledState(ShellState u_, ShellState w_) : u(std::move(u_)), w(std::move(w_)) {
    if (u.size() != w.size()) throw std::invalid_argument("coupled components differ in shell count");
}

CoupledState& CoupledState::operator+=(const CoupledState& o) {
    u += o.u;
    w += o.w;
    return *this;
}

CoupledState& CoupledState::operator-=(const CoupledState& o) {
    u -= o.u;
    w -= o.w;
    return *this;
}

CoupledState& CoupledState::operator*=(double s) {
    u *= s;
    w *= s;
    return *this;
}

CoupledState operator+(CoupledState a, const CoupledState& b) { return a += b; }
CoupledState operator-(CoupledState a, const CoupledState& b) { return a -= b; }
CoupledState operator*(double s, CoupledState a) { return a *= s; }

double norm_h(const ShellState& x) {
    double s = 0.0;
    for (const auto& c : x.amplitudes()) s += std::norm(c);
    return std::sqrt(s);
}

double norm_v(const ShellState& x, double k0) {
    double s = 0.0;
    const auto a = x.amplitudes();
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double k = wavenumber(static_cast<int>(i) + 1, k0);
        s += k * k * std::norm(a[i]);
    }
    return std::sqrt(s);
}

double norm_v_prime(const ShellState& x, double k0) {
    double s = 0.0;
    const auto a = x.amplitudes();
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double k = wavenumber(static_cast<int>(i) + 1, k0);
        s += std::norm(a[i]) / (k * k);
    }
    return std::sqrt(s);
}

double inner_h(const ShellState& x, const ShellState& y) {
    if (x.size() != y.size()) throw std::invalid_argument("shell count mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] * std::conj(y[i])).real();
    return s;
}

double norm_h(const CoupledState& x) {
    const double a = norm_h(x.u);
    const double b = norm_h(x.w);
    return std::sqrt(a * a + b * b);
}

double norm_v(const CoupledState& x, double k0) {
    const double a = norm_v(x.u, k0);
    const double b = norm_v(x.w, k0);
    return std::sqrt(a * a + b * b);
}

double inner_h(const CoupledState& x, const CoupledState& y) {
    return inner_h(x.u, y.u) + inner_h(x.w, y.w);
}

ShellState apply_a_alpha(const ShellState& x, double alpha_exp, double k0) {
    ShellState out = x;
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] *= std::pow(wavenumber(static_cast<int>(i) + 1, k0), 2.0 * alpha_exp);
    return out;
}

QRho combine_q_rho(const CoupledState& x, const CoupledState& x0, double lambda) {
    if (x.size() != x0.size()) throw std::invalid_argument("shell count mismatch");
    ShellState q = x.u;
    if (lambda != 0.0) q += lambda * x.w;
    ShellState rho = q - x0.u;
    return {std::move(q), std::move(rho)};
}

std::vector<std::string> validate_config(const ModelConfig& cfg) {
    std::vector<std::string> warnings;
    if (!(cfg.nu > 0.0) || !std::isfinite(cfg.nu)) throw std::invalid_argument("nu must be positive");
    if (!(cfg.k0 > 0.0) || !std::isfinite(cfg.k0)) throw std::invalid_argument("k0 must be positive");
    if (cfg.n_shells < ShellState::min_shells) throw std::invalid_argument("n_shells must be >= 4");
    if (cfg.sigma.size() != cfg.n_shells)
        throw std::invalid_argument("sigma must have n_shells entries");
    if (!std::isfinite(cfg.delta)) throw std::invalid_argument("delta must be finite");
    if (!std::isfinite(cfg.lambda)) throw std::invalid_argument("lambda must be finite");
    if (!(cfg.alpha >= 0.0) || !std::isfinite(cfg.alpha)) throw std::invalid_argument("alpha must be >= 0");
    if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    for (const auto& s : cfg.sigma)
        if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
            throw std::invalid_argument("sigma entries must be finite");

    // A flat or growing spectrum keeps a sizeable share of the forcing in the
    // upper half of the shells.
    double total = 0.0;
    double upper = 0.0;
    for (std::size_t i = 0; i < cfg.sigma.size(); ++i) {
        total += std::norm(cfg.sigma[i]);
        if (2 * i >= cfg.sigma.size()) upper += std::norm(cfg.sigma[i]);
    }
    if (total > 0.0 && upper >= 0.25 * total)
        warnings.push_back("forcing spectrum |sigma_n| does not decay: " +
                           format_real(100.0 * upper / total) +
                           "% of sum |sigma_n|^2 sits in the upper half of the shells");
    return warnings;
}

std::string to_csv_row(const ShellState& x) {
    std::string row;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i) row += ',';
        row += format_real(x[i].real());
        row += ',';
        row += format_real(x[i].imag());
    }
    return row;
}

ShellState shell_state_from_csv_row(const std::string& row) {
    const auto fields = split_csv(row);
    if (fields.size() % 2 != 0) throw std::invalid_argument("shell row needs an even number of fields");
    std::vector<Complex> a;
    for (std::size_t i = 0; i < fields.size(); i += 2)
        a.emplace_back(parse_real(fields[i]), parse_real(fields[i + 1]));
    return ShellState(a);
}

}  // namespace shellflow
