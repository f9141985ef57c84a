#include "shellflow/noise.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace shellflow {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

struct FineCoefficients {
    double decay;  ///< exp(-x)
    double a;      ///< multiplies sigma * xi
    double b;      ///< multiplies sigma * eta
};

// Over one base step of length h with x = rate * h, the pair
// (dW, int exp(-rate (h - s)) dW) is Gaussian with
//   Var dW = h, Cov = h (1 - e^-x) / x, Var I = h (1 - e^-2x) / (2x)  (per unit |sigma|^2).
// Writing I = a sqrt(h) xi + b eta with dW = sqrt(h) xi reproduces that law.
FineCoefficients fine_coefficients(double rate, double h) {
    const double x = rate * h;
    FineCoefficients c{};
    c.decay = std::exp(-x);
    double a_unit = 1.0;
    double residual = 0.0;  // Var I / h - a_unit^2
    if (x < 1e-4) {
        a_unit = 1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0;
        residual = x * x / 12.0 - x * x * x / 12.0;
    } else {
        a_unit = -std::expm1(-x) / x;
        residual = -std::expm1(-2.0 * x) / (2.0 * x) - a_unit * a_unit;
    }
    c.a = a_unit * std::sqrt(h);
    c.b = std::sqrt(std::max(residual, 0.0) * h);
    return c;
}

double rate_of(int shell, double alpha, double nu, double k0) {
    const double k = wavenumber(shell, k0);
    return nu * k * k + alpha;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

}  // namespace

Complex keyed_normal(std::uint64_t seed, NoiseStream stream, int shell, std::int64_t index) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
    h = splitmix64(h ^ static_cast<std::uint64_t>(static_cast<std::int64_t>(shell)));
    h = splitmix64(h ^ static_cast<std::uint64_t>(index));
    constexpr double scale = 0x1.0p-53;
    const double u1 = (static_cast<double>(splitmix64(h) >> 11) + 0.5) * scale;
    const double u2 = static_cast<double>(splitmix64(h ^ 0xD1B54A32D192ED03ULL) >> 11) * scale;
    const double r = std::sqrt(-std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(theta), r * std::sin(theta)};
}

NoisePath::NoisePath(std::uint64_t seed, double base_dt, std::int64_t stride, std::int64_t offset,
                     std::int64_t anchor, double t_min, double t_max, double shift,
                     std::vector<Complex> sigma)
    : seed_(seed),
      base_dt_(base_dt),
      stride_(stride),
      offset_(offset),
      anchor_(anchor),
      t_min_(t_min),
      t_max_(t_max),
      shift_(shift),
      sigma_(std::move(sigma)) {
    if (!(base_dt > 0.0)) throw std::invalid_argument("path time step must be positive");
    if (stride < 1) throw std::invalid_argument("path stride must be >= 1");
}

std::int64_t NoisePath::step_index(double t) const {
    const double r = t / dt();
    const double j = std::round(r);
    if (std::abs(r - j) > 1e-9 * std::max(1.0, std::abs(r)))
        throw std::invalid_argument("time " + std::to_string(t) + " is not on the path grid");
    return static_cast<std::int64_t>(j);
}

std::pair<Complex, Complex> NoisePath::base_pair(int shell, std::int64_t base_index) const {
    return {keyed_normal(seed_, NoiseStream::increments, shell, base_index),
            keyed_normal(seed_, NoiseStream::ou_auxiliary, shell, base_index)};
}

Complex NoisePath::base_increment(int shell, std::int64_t base_index) const {
    const Complex s = sigma_.at(static_cast<std::size_t>(shell - 1));
    if (s == Complex{}) return {};
    return s * std::sqrt(base_dt_) * keyed_normal(seed_, NoiseStream::increments, shell, base_index);
}

Complex NoisePath::increment(int shell, std::int64_t step) const {
    Complex sum{};
    const std::int64_t first = absolute_index(step);
    for (std::int64_t i = 0; i < stride_; ++i) sum += base_increment(shell, first + i);
    return sum;
}

Complex NoisePath::brownian(int shell, std::int64_t step) const {
    Complex w{};
    if (step > 0)
        for (std::int64_t j = 0; j < step; ++j) w += increment(shell, j);
    else
        for (std::int64_t j = step; j < 0; ++j) w -= increment(shell, j);
    return w;
}

Complex NoisePath::ou_innovation(int shell, std::int64_t step, double rate) const {
    const Complex s = sigma_.at(static_cast<std::size_t>(shell - 1));
    if (s == Complex{}) return {};
    const FineCoefficients c = fine_coefficients(rate, base_dt_);
    Complex acc{};
    const std::int64_t first = absolute_index(step);
    for (std::int64_t i = 0; i < stride_; ++i) {
        const auto [xi, eta] = base_pair(shell, first + i);
        acc = acc * c.decay + s * (c.a * xi + c.b * eta);
    }
    return acc;
}

Complex NoisePath::stationary_draw(int shell, std::int64_t step) const {
    return keyed_normal(seed_, NoiseStream::stationary, shell, absolute_index(step));
}

std::int64_t NoisePath::anchor_step() const {
    // First local grid point at or after the anchor.
    const std::int64_t delta = anchor_ - offset_;
    return -floor_div(-delta, stride_);
}

NoisePath NoisePath::coarsened(std::int64_t factor) const {
    if (factor < 1) throw std::invalid_argument("coarsening factor must be >= 1");
    NoisePath p = *this;
    p.stride_ = stride_ * factor;
    return p;
}

NoisePath NoisePath::shifted(std::int64_t steps) const {
    NoisePath p = *this;
    const double s = time_of(steps);
    p.offset_ = offset_ + steps * stride_;
    p.t_min_ = std::min(t_min_ - s, 0.0);
    p.t_max_ = std::max(t_max_ - s, 0.0);
    p.shift_ = shift_ + s;
    return p;
}

bool operator==(const NoisePath& a, const NoisePath& b) {
    return a.seed_ == b.seed_ && a.base_dt_ == b.base_dt_ && a.stride_ == b.stride_ &&
           a.offset_ == b.offset_ && a.anchor_ == b.anchor_ && a.sigma_ == b.sigma_;
}

NoisePath sample_path(std::uint64_t seed, double dt, double t_min, double t_max,
                      std::vector<Complex> sigma) {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (!(t_min <= 0.0 && 0.0 <= t_max)) throw std::invalid_argument("path window must contain 0");
    const auto lo = static_cast<std::int64_t>(std::floor(t_min / dt + 1e-9));
    const auto hi = static_cast<std::int64_t>(std::ceil(t_max / dt - 1e-9));
    return NoisePath(seed, dt, 1, 0, lo, static_cast<double>(lo) * dt, static_cast<double>(hi) * dt,
                     0.0, std::move(sigma));
}

NoisePath shift_theta(const NoisePath& path, double s) {
    return path.shifted(path.step_index(s));
}

OUPropagator::OUPropagator(const NoisePath& path, double alpha, double nu, double k0) : path_(&path) {
    const auto n = static_cast<int>(path.n_shells());
    for (int shell = 1; shell <= n; ++shell) {
        const double rate = rate_of(shell, alpha, nu, k0);
        decay_.push_back(std::exp(-rate * path.dt()));
        const Complex s = path.sigma()[static_cast<std::size_t>(shell - 1)];
        if (s == Complex{}) continue;
        const FineCoefficients c = fine_coefficients(rate, path.base_dt());
        forced_.push_back({shell, s, decay_.back(), c.decay, c.a, c.b});
    }
}

void OUPropagator::advance(ShellState& z, std::int64_t step) const {
    if (z.size() != decay_.size()) throw std::invalid_argument("OU state and path differ in shell count");
    for (std::size_t i = 0; i < decay_.size(); ++i) z[i] *= decay_[i];
    const std::int64_t first = path_->absolute_index(step);
    const std::int64_t stride = path_->stride();
    for (const auto& c : forced_) {
        Complex acc{};
        for (std::int64_t i = 0; i < stride; ++i) {
            const Complex xi = keyed_normal(path_->seed(), NoiseStream::increments, c.shell, first + i);
            const Complex eta = keyed_normal(path_->seed(), NoiseStream::ou_auxiliary, c.shell, first + i);
            acc = acc * c.fine_decay + c.sigma * (c.a * xi + c.b * eta);
        }
        z[static_cast<std::size_t>(c.shell - 1)] += acc;
    }
}

OUState ou_step(const OUState& state, const NoisePath& path, double dt, double nu, double k0) {
    if (std::abs(dt - path.dt()) > 1e-12 * path.dt())
        throw std::invalid_argument("OU step must use the path grid spacing");
    const std::int64_t j = path.step_index(state.t);
    OUPropagator prop(path, state.alpha, nu, k0);
    OUState next = state;
    prop.advance(next.z, j);
    next.t = path.time_of(j + 1);
    return next;
}

OUState ou_stationary_init(std::uint64_t seed, double alpha, double nu, double k0,
                           const std::vector<Complex>& sigma) {
    if (alpha < 0.0 || !(nu > 0.0)) throw std::invalid_argument("need alpha >= 0 and nu > 0");
    OUState s{ShellState(sigma.size()), alpha, 0.0};
    for (std::size_t i = 0; i < sigma.size(); ++i) {
        if (sigma[i] == Complex{}) continue;
        const int shell = static_cast<int>(i) + 1;
        const double rate = rate_of(shell, alpha, nu, k0);
        s.z[i] = sigma[i] / std::sqrt(2.0 * rate) * keyed_normal(seed, NoiseStream::stationary, shell, 0);
    }
    return s;
}

OUState ou_stationary_init(const NoisePath& path, double t, double alpha, double nu, double k0) {
    if (alpha < 0.0 || !(nu > 0.0)) throw std::invalid_argument("need alpha >= 0 and nu > 0");
    const std::int64_t j = path.step_index(t);
    OUState s{ShellState(path.n_shells()), alpha, path.time_of(j)};
    for (std::size_t i = 0; i < path.n_shells(); ++i) {
        const Complex sigma = path.sigma()[i];
        if (sigma == Complex{}) continue;
        const int shell = static_cast<int>(i) + 1;
        const double rate = rate_of(shell, alpha, nu, k0);
        s.z[i] = sigma / std::sqrt(2.0 * rate) * path.stationary_draw(shell, j);
    }
    return s;
}

OUSeries ou_series(const NoisePath& path, double alpha, double nu, double k0, std::int64_t first,
                   std::int64_t last, OUStart start) {
    if (last < first) throw std::invalid_argument("empty OU series range");
    OUPropagator prop(path, alpha, nu, k0);
    ShellState z(path.n_shells());
    switch (start) {
    case OUStart::zero:
        break;
    case OUStart::stationary:
        z = ou_stationary_init(path, path.time_of(first), alpha, nu, k0).z;
        break;
    case OUStart::pathwise: {
        const std::int64_t anchor = path.anchor_step();
        if (first < anchor)
            throw std::domain_error("requested OU start precedes the path anchor at t = " +
                                    std::to_string(path.time_of(anchor)));
        z = ou_stationary_init(path, path.time_of(anchor), alpha, nu, k0).z;
        for (std::int64_t j = anchor; j < first; ++j) prop.advance(z, j);
        break;
    }
    }
    OUSeries series;
    series.first_step = first;
    series.alpha = alpha;
    series.z.reserve(static_cast<std::size_t>(last - first + 1));
    series.z.push_back(z);
    for (std::int64_t j = first; j < last; ++j) {
        prop.advance(z, j);
        series.z.push_back(z);
    }
    return series;
}

double expected_v_norm_sq(double alpha, double nu, double k0, const std::vector<Complex>& sigma) {
    if (!(nu > 0.0) || alpha < 0.0) throw std::invalid_argument("need nu > 0 and alpha >= 0");
    double sum = 0.0;
    for (std::size_t i = 0; i < sigma.size(); ++i) {
        const double k = wavenumber(static_cast<int>(i) + 1, k0);
        sum += k * k * std::norm(sigma[i]) / (2.0 * (nu * k * k + alpha));
    }
    return sum;
}

double alpha_star(double nu, double k0, const std::vector<Complex>& sigma, double cstar) {
    if (!(cstar > 0.0)) throw std::invalid_argument("cstar must be positive");
    const double threshold = k0 * nu / (8.0 * cstar);
    auto ok = [&](double a) { return expected_v_norm_sq(a, nu, k0, sigma) <= threshold; };
    if (ok(0.0)) return 0.0;
    double lo = 0.0;
    double hi = 1.0;
    while (!ok(hi)) {
        lo = hi;
        hi *= 2.0;
    }
    while (hi - lo > 1e-7 * hi) {
        const double mid = 0.5 * (lo + hi);
        (ok(mid) ? hi : lo) = mid;
    }
    return hi;
}

}  // namespace shellflow
