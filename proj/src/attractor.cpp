#include "shellflow/attractor.hpp"

#include "shellflow/bilinear.hpp"
#include "shellflow/io.hpp"
#include "shellflow/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace shellflow {

AttractorConstants AttractorConstants::estimate(const ModelConfig& cfg, std::size_t trials, std::uint64_t seed) {
    const BilinearKind kind = BilinearKind::from(cfg);
    AttractorConstants c;
    c.cstar = estimate_cstar(kind, cfg.k0, cfg.n_shells, trials, seed);
    c.c_vh = estimate_c_vh(kind, cfg.k0, cfg.n_shells, trials, seed);
    return c;
}

double AttractorConstants::coupled_cstar(double lambda) const { return (1.0 + lambda * lambda) * cstar; }

double AttractorConstants::coupled_c_vh(double lambda) const {
    return std::sqrt(1.0 + lambda * lambda) * c_vh;
}

double alpha_zero(const ModelConfig& cfg, const AttractorConstants& constants) {
    // E||z~||^2_V~ <= k0 nu / (8 c)  <=>  E||z||^2_V <= k0 nu / (8 (2 c)).
    return 2.0 * alpha_star(cfg.nu, cfg.k0, cfg.sigma, 2.0 * constants.coupled_cstar(cfg.lambda));
}

double forcing_f(const CoupledState& z, const ModelConfig& cfg, double cstar) {
    const double h2 = norm_h(z) * norm_h(z);
    return 4.0 * cstar * cstar / cfg.nu * h2 * h2 + 8.0 * cfg.alpha * cfg.alpha / (cfg.k0 * cfg.nu) * h2;
}

RadiusIntegrals::RadiusIntegrals(const NoisePath& path, const ModelConfig& cfg, double cstar,
                                 double t_horizon, double t_end)
    : path_(&path), cfg_(cfg), cstar_(cstar), dt_(path.dt()) {
    if (!(t_horizon > 0.0)) throw std::invalid_argument("t_horizon must be positive");
    if (!(t_end > -t_horizon)) throw std::invalid_argument("radius window is empty");
    first_ = path.step_index(-t_horizon);
    const std::int64_t last = path.step_index(t_end);
    const auto count = static_cast<std::size_t>(last - first_ + 1);

    OUPropagator prop(path, cfg.alpha, cfg.nu, cfg.k0);
    ShellState z = ou_series(path, cfg.alpha, cfg.nu, cfg.k0, first_, first_, OUStart::pathwise).z.front();
    zh2_.reserve(count);
    zv_.reserve(count);
    f_.reserve(count);
    g_.reserve(count);
    const double half_rate = cfg.k0 * cfg.nu / 2.0;
    for (std::int64_t j = first_; j <= last; ++j) {
        if (j > first_) prop.advance(z, j - 1);
        const double h = norm_h(z);
        const double h2 = 2.0 * h * h;  // |(z, z)|^2_H~
        const double v = std::sqrt(2.0) * norm_v(z, cfg.k0);
        zh2_.push_back(h2);
        zv_.push_back(v);
        f_.push_back(4.0 * cstar * cstar / cfg.nu * h2 * h2 +
                     8.0 * cfg.alpha * cfg.alpha / (cfg.k0 * cfg.nu) * h2);
        g_.push_back(2.0 * cstar * v - half_rate);
    }
    double sum = 0.0;
    for (double g : g_) sum += g;
    mean_g_ = sum / static_cast<double>(g_.size());
    if (mean_g_ >= 0.0)
        throw std::domain_error("exponent rate 2 C* ||z||_V - k0 nu / 2 has nonnegative mean " +
                                format_real(mean_g_) + " over the window; alpha is below alpha_* or the window is too short");

    cum_g_.assign(count, 0.0);
    r1_.assign(count, 1.0);
    double integral = 0.0;
    const double h = dt_ / 2.0;
    for (std::size_t j = 0; j + 1 < count; ++j) {
        cum_g_[j + 1] = cum_g_[j] + h * (g_[j] + g_[j + 1]);
        integral = std::exp(cum_g_[j + 1] - cum_g_[j]) * (integral + h * f_[j]) + h * f_[j + 1];
        r1_[j + 1] = 1.0 + integral;
    }
}

std::size_t RadiusIntegrals::index(double t) const {
    const std::int64_t j = path_->step_index(t) - first_;
    if (j < 0 || j >= static_cast<std::int64_t>(r1_.size()))
        throw std::out_of_range("time " + format_real(t) + " outside the radius window");
    return static_cast<std::size_t>(j);
}

double RadiusIntegrals::r1_at(double t) const { return r1_[index(t)]; }

R1Result RadiusIntegrals::r1(double t) const {
    const std::size_t i = index(t);
    R1Result r;
    r.value = r1_[i];
    r.tail_integrand = f_.front() * std::exp(cum_g_[i] - cum_g_.front());
    // Older contributions are bounded by the largest f seen in the window,
    // discounted at the mean exponent rate.
    const double f_max = *std::max_element(f_.begin(), f_.end());
    r.tail_estimate = f_max * std::exp(cum_g_[i] - cum_g_.front()) / (-mean_g_);
    return r;
}

double RadiusIntegrals::z_h_sq(double t) const { return zh2_[index(t)]; }
double RadiusIntegrals::z_v(double t) const { return zv_[index(t)]; }

template <class F>
double RadiusIntegrals::trapezoid(double a, double b, F value) const {
    const std::size_t ia = index(a);
    const std::size_t ib = index(b);
    if (ib <= ia) return 0.0;
    double interior = 0.0;
    for (std::size_t j = ia + 1; j < ib; ++j) interior += value(j);
    return dt_ * (0.5 * (value(ia) + value(ib)) + interior);
}

double RadiusIntegrals::r2() const {
    const double c = cstar_;
    const double half_rate = cfg_.k0 * cfg_.nu / 2.0;
    const double int_f = trapezoid(-1.0, 0.0, [&](std::size_t j) { return f_[j]; });
    const double int_r1 =
        trapezoid(-1.0, 0.0, [&](std::size_t j) { return r1_[j] * (2.0 * c * zv_[j] + half_rate); });
    return r1_at(-1.0) / cfg_.nu + int_f + int_r1;
}

double RadiusIntegrals::r3() const {
    const double c2 = cstar_ * cstar_;
    const double a2 = cfg_.alpha * cfg_.alpha;
    const double addend = trapezoid(-1.0, 0.0, [&](std::size_t j) {
        return 2.0 * c2 * (r1_[j] + zh2_[j]) * zv_[j] * zv_[j] + 2.0 * a2 / cfg_.nu * zh2_[j];
    });
    const double exponent = trapezoid(-1.0, 0.0, [&](std::size_t j) { return 2.0 * c2 * (r1_[j] + zh2_[j]); });
    return (r2() + addend) * std::exp(exponent);
}

AbsorbingRadii absorbing_radii(const NoisePath& path, const ModelConfig& cfg,
                               const AttractorConstants& constants, double t_horizon) {
    if (t_horizon < 1.0) throw std::invalid_argument("t_horizon must be at least 1");
    const double cstar = constants.coupled_cstar(cfg.lambda);
    const RadiusIntegrals ri(path, cfg, cstar, t_horizon, 0.0);
    AbsorbingRadii r;
    for (std::int64_t j = path.step_index(-1.0); j <= 0; ++j) {
        r.r1_times.push_back(path.time_of(j));
        r.r1_values.push_back(ri.r1_at(path.time_of(j)));
    }
    r.r1_tail = ri.r1(0.0).tail_estimate;
    r.r2 = ri.r2();
    r.r3 = ri.r3();
    r.alpha_used = cfg.alpha;
    r.cstar_used = cstar;
    r.seed = path.seed();
    return r;
}

R1Result radius_r1(const NoisePath& path, const ModelConfig& cfg, const AttractorConstants& constants,
                   double t, double t_horizon) {
    return RadiusIntegrals(path, cfg, constants.coupled_cstar(cfg.lambda), t_horizon, t).r1(t);
}

double radius_r2(const NoisePath& path, const ModelConfig& cfg, const AttractorConstants& constants,
                 double t_horizon) {
    return RadiusIntegrals(path, cfg, constants.coupled_cstar(cfg.lambda), t_horizon, 0.0).r2();
}

double radius_r3(const NoisePath& path, const ModelConfig& cfg, const AttractorConstants& constants,
                 double t_horizon) {
    return RadiusIntegrals(path, cfg, constants.coupled_cstar(cfg.lambda), t_horizon, 0.0).r3();
}

double v_norm_sq(const CoupledState& u, const ShellState& z, double k0) {
    const double a = norm_v(u.u - z, k0);
    const double b = norm_v(u.w - z, k0);
    return a * a + b * b;
}

std::vector<CoupledState> sample_ball(std::size_t n_shells, std::size_t members, double radius,
                                      std::uint64_t sample_seed) {
    if (!(radius >= 0.0)) throw std::invalid_argument("ball radius must be >= 0");
    std::mt19937_64 rng(sample_seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> uniform;
    const double dim = 4.0 * static_cast<double>(n_shells);
    std::vector<CoupledState> points;
    for (std::size_t m = 0; m < members; ++m) {
        CoupledState x(n_shells);
        for (std::size_t i = 0; i < n_shells; ++i) {
            x.u[i] = Complex(normal(rng), normal(rng));
            x.w[i] = Complex(normal(rng), normal(rng));
        }
        const double r = radius * std::pow(uniform(rng), 1.0 / dim);
        x *= r / norm_h(x);
        points.push_back(std::move(x));
    }
    return points;
}

MemberBlowUp::MemberBlowUp(std::size_t member, const BlowUpError& cause)
    : std::runtime_error("ensemble member " + std::to_string(member) + ": " + cause.what()), member_(member) {}

PullbackCloud pullback_cloud(const NoisePath& path, const ModelConfig& cfg,
                             const std::vector<CoupledState>& initial, double pullback_time,
                             const SolverSettings& settings) {
    if (initial.empty()) throw std::invalid_argument("pullback cloud needs at least one initial point");
    if (!(pullback_time > 0.0)) throw std::invalid_argument("pullback time must be positive");
    SolverSettings st = settings;
    st.scheme = Scheme::ou_splitting;
    st.t0 = -pullback_time;
    st.t1 = 0.0;
    st.store_every = std::numeric_limits<std::size_t>::max();
    st.z_start = OUStart::pathwise;
    validate_settings(st, path);
    const OUSeries z = ou_series(path, cfg.alpha, cfg.nu, cfg.k0, path.step_index(st.t0), 0, OUStart::pathwise);

    PullbackCloud cloud;
    cloud.points.assign(initial.size(), CoupledState(cfg.n_shells));
    parallel_for(initial.size(), [&](std::size_t m) {
        try {
            cloud.points[m] = solve_flow(initial[m], path, z, st, cfg).final_state();
        } catch (const BlowUpError& e) {
            throw MemberBlowUp(m, e);
        }
    });
    cloud.lambda = cfg.lambda;
    cloud.pullback_time = pullback_time;
    cloud.members = initial.size();
    cloud.seed = path.seed();
    return cloud;
}

PullbackCloud pullback_cloud(std::uint64_t seed, double lambda, const ModelConfig& cfg, std::size_t members,
                             double pullback_time, double initial_radius, const SolverSettings& settings) {
    ModelConfig c = cfg;
    c.lambda = lambda;
    const NoisePath path = sample_path(seed, settings.dt, -pullback_time, 0.0, cfg.sigma);
    return pullback_cloud(path, c, sample_ball(cfg.n_shells, members, initial_radius, seed), pullback_time,
                          settings);
}

double cloud_diameter(const PullbackCloud& cloud) {
    double d = 0.0;
    for (std::size_t i = 0; i < cloud.points.size(); ++i)
        for (std::size_t j = i + 1; j < cloud.points.size(); ++j)
            d = std::max(d, norm_h(cloud.points[i] - cloud.points[j]));
    return d;
}

double cloud_resolution(const PullbackCloud& cloud) {
    if (cloud.points.size() < 2) return 0.0;
    double worst = 0.0;
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        double nearest = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < cloud.points.size(); ++j)
            if (j != i) nearest = std::min(nearest, norm_h(cloud.points[i] - cloud.points[j]));
        worst = std::max(worst, nearest);
    }
    return worst;
}

double hausdorff_semidistance(const PullbackCloud& a, const PullbackCloud& b) {
    if (a.points.empty() || b.points.empty()) throw std::invalid_argument("Hausdorff distance of an empty cloud");
    std::vector<double> nearest(a.points.size(), std::numeric_limits<double>::infinity());
    parallel_for(a.points.size(), [&](std::size_t i) {
        for (const auto& y : b.points) nearest[i] = std::min(nearest[i], norm_h(a.points[i] - y));
    });
    return *std::max_element(nearest.begin(), nearest.end());
}

SemicontinuityResult upper_semicontinuity_curve(const NoisePath& path, const std::vector<double>& lambdas,
                                                double lambda0, const ModelConfig& cfg,
                                                const std::vector<CoupledState>& initial,
                                                double pullback_time, const SolverSettings& settings) {
    const auto ref = std::find(lambdas.begin(), lambdas.end(), lambda0);
    if (ref == lambdas.end()) throw std::invalid_argument("lambda0 must be part of the lambda grid");
    SemicontinuityResult result;
    for (double lambda : lambdas) {
        ModelConfig c = cfg;
        c.lambda = lambda;
        result.clouds.push_back(pullback_cloud(path, c, initial, pullback_time, settings));
    }
    const PullbackCloud& base = result.clouds[static_cast<std::size_t>(ref - lambdas.begin())];
    const double base_res = cloud_resolution(base);
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        const PullbackCloud& cloud = result.clouds[k];
        result.rows.push_back({lambdas[k], hausdorff_semidistance(cloud, base), hausdorff_semidistance(base, cloud),
                               std::max(base_res, cloud_resolution(cloud))});
    }
    return result;
}

SqueezingReport squeezing_constants(const NoisePath& path, const ModelConfig& cfg,
                                    const AttractorConstants& constants, double t_erg, std::size_t n_modes,
                                    double t_horizon) {
    if (!(t_erg > 0.0)) throw std::invalid_argument("t_erg must be positive");
    if (n_modes < 1) throw std::invalid_argument("n_modes must be >= 1");
    SqueezingReport rep;
    rep.cstar = constants.coupled_cstar(cfg.lambda);
    rep.c_vh = constants.coupled_c_vh(cfg.lambda);
    rep.K1 = constants.K1;
    rep.K2 = constants.K2;
    rep.K3 = constants.K3;
    rep.gamma0 = cfg.nu * cfg.k0;
    rep.n_modes = n_modes;
    const double k_next = wavenumber(static_cast<int>(n_modes) + 1, cfg.k0);
    rep.mu = cfg.nu * k_next;
    rep.delta_sq = std::sqrt(2.0) * rep.c_vh * rep.c_vh / std::pow(cfg.nu * k_next, 1.5);

    const RadiusIntegrals ri(path, cfg, rep.cstar, t_horizon, t_erg);
    const std::int64_t j_end = path.step_index(t_erg);
    const std::int64_t j_half = std::max<std::int64_t>(1, j_end / 2);
    std::vector<double> c2_samples;
    for (std::int64_t j = 0; j <= j_end; ++j) {
        const double t = path.time_of(j);
        const double r1 = ri.r1_at(t);
        rep.c_h_times.push_back(t);
        rep.c_h_samples.push_back(r1 * r1 + rep.cstar / cfg.nu * r1);
        const double zv = ri.z_v(t);
        c2_samples.push_back(std::exp(rep.cstar * rep.cstar * zv * zv / (4.0 * rep.gamma0)));
    }
    auto average = [](const std::vector<double>& x, std::int64_t last) {
        const auto n = static_cast<std::size_t>(last);
        double interior = 0.0;
        for (std::size_t j = 1; j < n; ++j) interior += x[j];
        return (0.5 * (x[0] + x[n]) + interior) / static_cast<double>(n);
    };
    rep.e_c_h = average(rep.c_h_samples, j_end);
    rep.e_c_h_half = average(rep.c_h_samples, j_half);
    rep.c2_tilde = average(c2_samples, j_end);
    rep.c2_tilde_half = average(c2_samples, j_half);
    rep.c2_tilde_stable = std::isfinite(rep.c2_tilde) &&
                          std::abs(rep.c2_tilde - rep.c2_tilde_half) <= 0.1 * std::abs(rep.c2_tilde);
    rep.dim_bound =
        dimension_bound(rep.e_c_h, rep.c_vh, cfg.nu, cfg.k0, constants.K1, constants.K2, constants.K3).bound;
    return rep;
}

DimensionBound dimension_bound(double e_c_h, double c, double nu, double k0, double K1, double K2, double K3) {
    if (!(K1 > 0.0 && K2 > 0.0 && K3 > 0.0)) throw std::invalid_argument("K1, K2, K3 must be positive");
    if (!std::isfinite(e_c_h)) throw std::invalid_argument("E(C_H) must be finite");
    for (std::size_t n = 1; n <= 4096; ++n) {
        const double rate = nu * std::ldexp(k0, static_cast<int>(n) + 1);
        const bool small = std::sqrt(2.0) * c * c / std::pow(rate, 1.5) <= K1;
        const bool fast = rate >= K2 * e_c_h;
        if (small && fast) {
            const double nn = static_cast<double>(n);
            return {n, K3 * std::max(nn * std::log(nn), std::log(2.0))};
        }
    }
    throw std::domain_error("no mode count up to 4096 satisfies the squeezing conditions");
}

SqueezingCheck verify_squeezing(const NoisePath& path, const ModelConfig& cfg,
                                const AttractorConstants& constants,
                                const std::vector<std::pair<CoupledState, CoupledState>>& pairs,
                                std::size_t n_modes, double t_final, const SolverSettings& settings,
                                double t_horizon) {
    if (n_modes < 1 || n_modes > cfg.n_shells) throw std::invalid_argument("n_modes must lie in [1, N]");
    const double cstar = constants.coupled_cstar(cfg.lambda);
    const double c = constants.coupled_c_vh(cfg.lambda);
    const double k_next = wavenumber(static_cast<int>(n_modes) + 1, cfg.k0);
    const double delta_sq = std::sqrt(2.0) * c * c / std::pow(cfg.nu * k_next, 1.5);

    const RadiusIntegrals ri(path, cfg, cstar, t_horizon, t_final);
    const std::int64_t j_end = path.step_index(t_final);
    std::vector<double> int_r1{0.0};
    std::vector<double> int_ch{0.0};
    for (std::int64_t j = 0; j < j_end; ++j) {
        const double a = ri.r1_at(path.time_of(j));
        const double b = ri.r1_at(path.time_of(j + 1));
        int_r1.push_back(int_r1.back() + path.dt() / 2.0 * (a + b));
        int_ch.push_back(int_ch.back() +
                         path.dt() / 2.0 * (a * a + cstar / cfg.nu * a + b * b + cstar / cfg.nu * b));
    }

    SolverSettings st = settings;
    st.scheme = Scheme::ou_splitting;
    st.t0 = 0.0;
    st.t1 = t_final;
    st.store_every = 1;
    st.z_start = OUStart::pathwise;
    const OUSeries z = ou_series(path, cfg.alpha, cfg.nu, cfg.k0, 0, j_end, OUStart::pathwise);

    std::vector<std::pair<double, double>> ratios(pairs.size(), {0.0, 0.0});
    parallel_for(pairs.size(), [&](std::size_t p) {
        const double d0 = norm_h(pairs[p].first - pairs[p].second);
        if (d0 == 0.0) return;
        const Trajectory a = solve_flow(pairs[p].first, path, z, st, cfg);
        const Trajectory b = solve_flow(pairs[p].second, path, z, st, cfg);
        for (std::size_t k = 0; k < a.times.size(); ++k) {
            const CoupledState d = a.states[k] - b.states[k];
            double low = 0.0;
            double high = 0.0;
            for (std::size_t i = 0; i < d.size(); ++i) {
                const double e = std::norm(d.u[i]) + std::norm(d.w[i]);
                (i < n_modes ? low : high) += e;
            }
            const double t = a.times[k];
            const double rhs_low = d0 * std::exp(cstar / cfg.nu * int_r1[k]);
            const double rhs_high = d0 * (std::exp(-k_next * cfg.nu * t) + delta_sq * std::exp(int_ch[k]));
            ratios[p].first = std::max(ratios[p].first, std::sqrt(low) / rhs_low);
            ratios[p].second = std::max(ratios[p].second, std::sqrt(high) / rhs_high);
        }
    });
    SqueezingCheck check;
    check.pairs = pairs.size();
    for (const auto& [lo, hi] : ratios) {
        check.max_ratio_low = std::max(check.max_ratio_low, lo);
        check.max_ratio_high = std::max(check.max_ratio_high, hi);
    }
    check.passed = check.max_ratio_low <= 1.0 + 1e-6 && check.max_ratio_high <= 1.0 + 1e-6;
    return check;
}

}  // namespace shellflow
