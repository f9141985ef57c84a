// Acceptance run: one PASS/FAIL line per property, nonzero exit on any failure.

#include "shellflow/attractor.hpp"
#include "shellflow/bilinear.hpp"
#include "shellflow/integrator.hpp"
#include "shellflow/noise.hpp"
#include "shellflow/stats.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace shellflow;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

int failures = 0;

/// Runs one check, appends the runtime budget to the verdict and prints one line.
void check(const std::string& name, double budget_seconds, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < budget_seconds;
    const bool ok = o.passed && in_time;
    if (!ok) ++failures;
    std::printf("%s %s: %s [%.2f s of %.0f s%s]\n", ok ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs,
                budget_seconds, in_time ? "" : ", over budget");
    std::fflush(stdout);
}

std::string num(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

ShellState random_state(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    ShellState x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = Complex(normal(rng), normal(rng));
    return x;
}

/// nu = 1, k0 = 1, N = 16 GOY forced on the first three shells.
ModelConfig desk_config(double lambda = 0.0) {
    ModelConfig cfg;
    cfg.n_shells = 16;
    cfg.lambda = lambda;
    cfg.sigma.assign(16, Complex{});
    cfg.sigma[0] = 0.5;
    cfg.sigma[1] = Complex(0.0, 0.5);
    cfg.sigma[2] = 0.25;
    return cfg;
}

double slope_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

constexpr double desk_dt = 0x1.0p-10;

Outcome bilinear_sweep(bool skew) {
    std::mt19937_64 rng(skew ? 202 : 101);
    double worst = 0.0;
    for (ModelKind kind : {ModelKind::goy, ModelKind::sabra}) {
        const BilinearKind b{kind, 0.5, false};
        for (std::size_t n : {8u, 16u, 32u}) {
            for (int t = 0; t < 1000; ++t) {
                const ShellState u = random_state(n, rng);
                const ShellState v = random_state(n, rng);
                double defect;
                if (skew) {
                    const ShellState w = random_state(n, rng);
                    defect = std::abs(inner_h(apply_b(b, u, v, 1.0), w) + inner_h(apply_b(b, u, w, 1.0), v)) /
                             (norm_v(u, 1.0) * norm_h(v) * norm_h(w));
                } else {
                    defect = std::abs(inner_h(apply_b(b, u, v, 1.0), v)) / (norm_v(u, 1.0) * std::pow(norm_h(v), 2));
                }
                worst = std::max(worst, defect);
            }
        }
    }
    return {worst <= 1e-12, "GOY and Sabra, N = 8, 16, 32, 1000 pairs each: max relative defect " + num(worst) +
                                " (limit 1e-12)"};
}

}  // namespace

int main() {
    const ModelConfig desk = desk_config();
    const AttractorConstants constants = AttractorConstants::estimate(desk);
    std::printf("desk model: GOY N = 16, nu = 1, k0 = 1, C* = %s, C = %s\n", num(constants.cstar).c_str(),
                num(constants.c_vh).c_str());

    check("energy annihilation", 1.0, [] { return bilinear_sweep(false); });

    check("skew pairing", 1.0, [] { return bilinear_sweep(true); });

    check("decoupling at lambda = 0", 5.0, [&] {
        std::mt19937_64 rng(303);
        const NoisePath path = sample_path(3, desk_dt, 0.0, 1.0, desk.sigma);
        SolverSettings s;
        s.dt = desk_dt;
        const CoupledState u0(random_state(16, rng), random_state(16, rng));
        const Trajectory coupled = solve_flow(u0, path, s, desk);
        const std::vector<ShellState> solo = solve_solo(u0.u, path, s, desk);
        bool same = solo.size() == coupled.states.size();
        for (std::size_t k = 0; same && k < solo.size(); ++k) same = coupled.states[k].u == solo[k];
        return Outcome{same, same ? "u-component bit-identical to the single-model run at all " +
                                        std::to_string(solo.size()) + " stored times"
                                  : "u-component differs from the single-model run"};
    });

    check("diagonal symmetry", 10.0, [] {
        std::mt19937_64 rng(404);
        double worst = 0.0;
        for (double lambda : {-1.0, 0.3, 1.0}) {
            const ModelConfig cfg = desk_config(lambda);
            const NoisePath path = sample_path(4, desk_dt, 0.0, 1.0, cfg.sigma);
            SolverSettings s;
            s.dt = desk_dt;
            ShellState a = random_state(16, rng);
            for (std::size_t i = 0; i < 16; ++i) a[i] /= 1.0 + static_cast<double>(i * i);
            const Trajectory traj = solve_flow(CoupledState(a, a), path, s, cfg);
            double gap = 0.0, size = 0.0;
            for (const auto& x : traj.states) {
                gap = std::max(gap, norm_h(x.u - x.w));
                size = std::max(size, norm_h(x.u));
            }
            worst = std::max(worst, gap / size);
        }
        return Outcome{worst <= 1e-8, "lambda = -1, 0.3, 1: max_t |u - w| / max_t |u| = " + num(worst) +
                                          " (limit 1e-8)"};
    });

    check("cocycle property", 10.0, [] {
        const ModelConfig cfg = desk_config(0.3);
        double worst = 0.0;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            std::mt19937_64 rng(seed);
            const NoisePath path = sample_path(seed, desk_dt, 0.0, 1.0, cfg.sigma);
            SolverSettings s;
            s.dt = desk_dt;
            s.store_every = 1u << 30;
            const CoupledState u0(random_state(16, rng), random_state(16, rng));
            const double scale = norm_h(solve_flow(u0, path, s, cfg).final_state());
            worst = std::max(worst, verify_cocycle(u0, path, 0.5, 0.5, s, cfg) / scale);
        }
        return Outcome{worst <= 1e-10, "s = t = 0.5, 10 seeds: max residual / |u(1)| = " + num(worst) +
                                           " (limit 1e-10)"};
    });

    check("OU stationary variance", 10.0, [] {
        const int samples = 10000;
        std::vector<Complex> sigma(16);
        for (std::size_t i = 0; i < 16; ++i) sigma[i] = Complex(1.0 / (1.0 + i), 0.5 / (1.0 + i * i));
        bool ok = true;
        std::string detail;
        for (double alpha : {0.0, 2.0}) {
            double sum = 0.0;
            for (int s = 0; s < samples; ++s)
                sum += std::pow(norm_v(ou_stationary_init(s, alpha, 1.0, 1.0, sigma).z, 1.0), 2);
            const double expected = expected_v_norm_sq(alpha, 1.0, 1.0, sigma);
            const double rel = std::abs(sum / samples - expected) / expected;
            ok = ok && rel <= 0.05;
            detail += "alpha = " + num(alpha) + ": relative error " + num(rel) + "; ";
        }
        std::vector<Complex> one(16);
        one[0] = 1.0;
        double sum = 0.0;
        for (int s = 0; s < samples; ++s) sum += std::pow(norm_v(ou_stationary_init(s, 0.0, 1.0, 1.0, one).z, 1.0), 2);
        const double hand = sum / samples;
        ok = ok && std::abs(hand - 0.5) <= 0.025 && expected_v_norm_sq(0.0, 1.0, 1.0, one) == 0.5;
        detail += "single-shell case " + num(hand) + " (target 0.5 +- 0.025)";
        return Outcome{ok, detail};
    });

    check("alpha_* hand case", 1.0, [] {
        std::vector<Complex> one(16);
        one[0] = 1.0;
        const double a = alpha_star(1.0, 1.0, one, 1.0);
        return Outcome{std::abs(a - 12.0) <= 12.0 * 1e-6, "alpha_* = " + num(a) + " (target 12)"};
    });

    check("scheme cross-validation", 60.0, [] {
        // Small k0 keeps explicit Euler-Maruyama stable at N = 16 for every dt tested.
        ModelConfig cfg = desk_config(0.5);
        cfg.k0 = 0x1.0p-12;
        cfg.sigma.assign(16, Complex{});
        for (std::size_t i = 10; i < 16; ++i) cfg.sigma[i] = Complex(1.0 / (static_cast<double>(i) - 8.0), 0.3);
        CoupledState u0(16);
        for (std::size_t i = 0; i < 16; ++i) {
            u0.u[i] = Complex(0.5 / (1.0 + i), 0.1);
            u0.w[i] = Complex(0.2, -0.3 / (1.0 + i));
        }
        const int paths = 20;
        std::vector<double> err(6, 0.0);
        for (int seed = 1; seed <= paths; ++seed) {
            const NoisePath fine = sample_path(seed, 0x1.0p-13, 0.0, 1.0, cfg.sigma);
            for (int e = 8; e <= 13; ++e) {
                const NoisePath p = fine.coarsened(std::int64_t{1} << (13 - e));
                SolverSettings s;
                s.dt = std::ldexp(1.0, -e);
                s.store_every = 1u << 30;
                err[static_cast<std::size_t>(e - 8)] +=
                    norm_h(solve_sde_em(u0, p, s, cfg).final_state() - solve_flow(u0, p, s, cfg).final_state()) /
                    paths;
            }
        }
        bool monotone = true;
        for (std::size_t i = 1; i < err.size(); ++i) monotone = monotone && err[i] < err[i - 1];
        std::vector<double> x, y;
        for (int e = 8; e <= 13; ++e) {
            x.push_back(std::log(std::ldexp(1.0, -e)));
            y.push_back(std::log(err[static_cast<std::size_t>(e - 8)]));
        }
        const double slope = slope_fit(x, y);
        std::string detail = "mean |u_EM(1) - u_flow(1)| over 20 paths for dt = 2^-8..2^-13:";
        for (double v : err) detail += " " + num(v);
        detail += "; monotone " + std::string(monotone ? "yes" : "no") + ", slope " + num(slope) + " (1.0 +- 0.3)";
        return Outcome{monotone && std::abs(slope - 1.0) <= 0.3, detail};
    });

    check("absorption", 300.0, [&] {
        ModelConfig cfg = desk;
        cfg.alpha = alpha_zero(cfg, constants);
        const double t_h = 200.0;
        int inside = 0;
        double worst = 0.0;
        for (std::uint64_t seed = 1; seed <= 50; ++seed) {
            const NoisePath path = sample_path(seed, desk_dt, -t_h, 0.0, cfg.sigma);
            const AbsorbingRadii r = absorbing_radii(path, cfg, constants, t_h);
            CoupledState u0 = sample_ball(16, 1, 1.0, seed).front();
            u0 *= 10.0 / norm_h(u0);
            SolverSettings s;
            s.dt = desk_dt;
            s.t0 = -50.0;
            s.t1 = 0.0;
            s.store_every = 1u << 30;
            s.z_start = OUStart::pathwise;
            const CoupledState u = solve_flow(u0, path, s, cfg).final_state();
            const ShellState z = ou_series(path, cfg.alpha, cfg.nu, cfg.k0, 0, 0, OUStart::pathwise).z.front();
            const double v2 = v_norm_sq(u, z, cfg.k0);
            if (v2 <= r.r3) ++inside;
            worst = std::max(worst, v2 / r.r3);
        }
        return Outcome{inside == 50, std::to_string(inside) + "/50 seeds with ||v(0)||_V^2 <= R3 after pullback from "
                                                              "t0 = -50, |u(t0)| = 10; max ratio " + num(worst)};
    });

    check("pullback contraction", 600.0, [&] {
        ModelConfig cfg = desk;
        cfg.alpha = alpha_zero(cfg, constants);
        SolverSettings s;
        s.dt = desk_dt;
        int monotone = 0;
        double worst_increase = 0.0, largest_final = 0.0;
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const NoisePath path = sample_path(seed, desk_dt, -50.0, 0.0, cfg.sigma);
            const double radius = std::sqrt(radius_r1(path, cfg, constants, 0.0, 50.0).value);
            const auto initial = sample_ball(16, 16, radius, seed);
            double prev = cloud_diameter(PullbackCloud{initial, 0.0, 0.0, 16, seed});
            bool ok = true;
            for (double t_pb : {12.5, 25.0, 50.0}) {
                const double d = cloud_diameter(pullback_cloud(path, cfg, initial, t_pb, s));
                worst_increase = std::max(worst_increase, d - prev);
                ok = ok && d <= prev + 1e-8;
                prev = d;
            }
            largest_final = std::max(largest_final, prev);
            if (ok) ++monotone;
        }
        return Outcome{monotone == 20, std::to_string(monotone) + "/20 seeds nonincreasing over T_pb = 12.5, 25, 50 "
                                                                   "(M = 16); largest increase " + num(worst_increase) +
                                           ", largest diameter at 50 " + num(largest_final)};
    });

    check("upper semicontinuity in lambda", 1200.0, [&] {
        const std::vector<double> lambdas{0.0, 0.01, 0.1, 0.5};
        SolverSettings s;
        s.dt = desk_dt;
        // One alpha for the whole grid: alpha_0 of the largest |lambda|.
        ModelConfig cfg = desk;
        cfg.alpha = alpha_zero(desk_config(0.5), constants);
        std::vector<double> mean(lambdas.size(), 0.0);
        const int seeds = 10;
        for (std::uint64_t seed = 1; seed <= static_cast<std::uint64_t>(seeds); ++seed) {
            const NoisePath path = sample_path(seed, desk_dt, -50.0, 0.0, cfg.sigma);
            const double radius = std::sqrt(radius_r1(path, cfg, constants, 0.0, 50.0).value);
            const auto res = upper_semicontinuity_curve(path, lambdas, 0.0, cfg, sample_ball(16, 32, radius, seed),
                                                        50.0, s);
            for (std::size_t i = 0; i < lambdas.size(); ++i) mean[i] += res.rows[i].d_forward / seeds;
        }
        bool monotone = true;
        for (std::size_t i = 1; i < mean.size(); ++i) monotone = monotone && mean[i] >= mean[i - 1];
        const double ratio = mean[1] / mean[3];
        std::string detail = "mean d_H(A_lambda, A_0) over 10 seeds, M = 32, T_pb = 50:";
        for (std::size_t i = 0; i < mean.size(); ++i) detail += " " + num(lambdas[i]) + " -> " + num(mean[i]) + ";";
        detail += " d(0.01)/d(0.5) = " + num(ratio) + " (limit 0.25)";
        return Outcome{monotone && ratio < 0.25, detail};
    });

    check("lambda continuity slope", 300.0, [&] {
        SolverSettings s;
        s.dt = desk_dt;
        s.t1 = 2.0;
        s.store_every = 16;
        const std::vector<double> lambdas{1e-3, 1e-2, 1e-1};
        const auto rows = lambda_continuity_sweep(1, lambdas, 0.0, 1.0, 8, s, desk);
        std::vector<double> x, y;
        std::string detail = "sup distance at";
        for (const auto& r : rows) {
            x.push_back(std::log(r.lambda));
            y.push_back(std::log(r.distance));
            detail += " " + num(r.lambda) + " -> " + num(r.distance) + ";";
        }
        const double slope = slope_fit(x, y);
        const bool increasing = rows[0].distance < rows[1].distance && rows[1].distance < rows[2].distance;
        detail += " slope " + num(slope) + " (1.0 +- 0.3)";
        return Outcome{increasing && std::abs(slope - 1.0) <= 0.3, detail};
    });

    check("squeezing inequalities", 600.0, [&] {
        ModelConfig cfg = desk;
        cfg.alpha = alpha_zero(cfg, constants);
        SolverSettings s;
        s.dt = desk_dt;
        const double t_h = 200.0;
        const NoisePath path = sample_path(1, desk_dt, -t_h - 2.0, 5.0, cfg.sigma);
        const double radius = std::sqrt(radius_r1(path, cfg, constants, 0.0, t_h).value);
        const PullbackCloud cloud = pullback_cloud(path, cfg, sample_ball(16, 100, radius, 1), 2.0, s);
        std::vector<std::pair<CoupledState, CoupledState>> pairs;
        for (std::size_t i = 0; i < 50; ++i) pairs.emplace_back(cloud.points[2 * i], cloud.points[2 * i + 1]);
        const SqueezingCheck chk = verify_squeezing(path, cfg, constants, pairs, 6, 5.0, s, t_h);
        const bool ok = chk.pairs == 50 && chk.max_ratio_low <= 1.0 + 1e-6 && chk.max_ratio_high <= 1.0 + 1e-6;
        return Outcome{ok, "50 pairs, n = 6, T = 5: max ratio low modes " + num(chk.max_ratio_low) + ", high modes " +
                               num(chk.max_ratio_high) + " (limit 1 + 1e-6)"};
    });

    check("structure function homogeneity", 1.0, [&] {
        std::mt19937_64 rng(1414);
        SolverSettings s;
        s.dt = desk_dt;
        s.t1 = 0.25;
        const ModelConfig cfg = desk_config(0.4);
        const NoisePath path = sample_path(14, desk_dt, 0.0, 0.25, cfg.sigma);
        const Trajectory traj = solve_flow(CoupledState(random_state(16, rng), random_state(16, rng)), path, s, cfg);
        double worst = 0.0;
        for (double c : {0.5, 2.0}) {
            Trajectory scaled = traj;
            for (auto& x : scaled.states) x.w *= c;
            for (double p : {1.0, 2.0, 4.0}) {
                const StructureTable a = structure_function(traj, p, Component::w);
                const StructureTable b = structure_function(scaled, p, Component::w);
                for (std::size_t i = 0; i < a.values.size(); ++i) {
                    const double expect = std::pow(c, p) * a.values[i];
                    worst = std::max(worst, std::abs(b.values[i] - expect) / expect);
                }
            }
        }
        return Outcome{worst <= 1e-12, "p = 1, 2, 4 and scale 0.5, 2: max relative deviation " + num(worst) +
                                           " (limit 1e-12)"};
    });

    check("zeta recovery", 1.0, [] {
        StructureTable t;
        for (int n = 1; n <= 16; ++n) t.values.push_back(std::pow(wavenumber(n, 1.0), -2.0));
        const ZetaFit exact = fit_zeta(t, 1, 16);
        std::mt19937_64 rng(1515);
        std::normal_distribution<double> noise(0.0, 0.01);
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            StructureTable noisy = t;
            for (auto& v : noisy.values) v *= 1.0 + noise(rng);
            worst = std::max(worst, std::abs(fit_zeta(noisy, 1, 16).zeta - 2.0));
        }
        const bool ok = std::abs(exact.zeta - 2.0) <= 1e-12 && exact.residual < 1e-12 && worst <= 0.05;
        return Outcome{ok, "exact: zeta = " + num(exact.zeta) + ", residual " + num(exact.residual) +
                               "; 1% noise, 100 trials: max |zeta - 2| = " + num(worst) + " (limit 0.05)"};
    });

    check("E(C_H) stability and R1 moments", 600.0, [&] {
        ModelConfig cfg = desk;
        cfg.alpha = alpha_zero(cfg, constants);
        const double t_h = 200.0;
        const NoisePath path = sample_path(1, desk_dt, -t_h, 500.0, cfg.sigma);
        const SqueezingReport rep = squeezing_constants(path, cfg, constants, 500.0, 6, t_h);
        const double change = std::abs(rep.e_c_h - rep.e_c_h_half) / rep.e_c_h;

        // R1(omega) at time 0 over independent paths; a coarser grid keeps the 200-seed run short.
        const double dt = 0x1.0p-8;
        double m100 = 0.0, m200 = 0.0;
        for (std::uint64_t seed = 1; seed <= 200; ++seed) {
            const NoisePath p = sample_path(10000 + seed, dt, -t_h, 0.0, cfg.sigma);
            const double r1 = radius_r1(p, cfg, constants, 0.0, t_h).value;
            m200 += r1 * r1;
            if (seed <= 100) m100 += r1 * r1;
        }
        m100 /= 100.0;
        m200 /= 200.0;
        const double moment_change = std::abs(m200 - m100) / m200;
        const bool ok = std::isfinite(rep.e_c_h) && change < 0.1 && std::isfinite(m200) && moment_change < 0.1;
        return Outcome{ok, "E(C_H) over 500 = " + num(rep.e_c_h) + ", over 250 = " + num(rep.e_c_h_half) +
                               " (change " + num(change) + ", limit 0.1); E(R1^2) over 100 / 200 seeds = " +
                               num(m100) + " / " + num(m200) + " (change " + num(moment_change) + ", limit 0.1)"};
    });

    check("zero-noise closed forms", 1.0, [&] {
        ModelConfig cfg = desk;
        cfg.sigma.assign(16, Complex{});
        const NoisePath path = sample_path(17, desk_dt, -10.0, 1.0, cfg.sigma);
        const AbsorbingRadii r = absorbing_radii(path, cfg, constants, 10.0);
        const SqueezingReport rep = squeezing_constants(path, cfg, constants, 1.0, 6, 10.0);
        const double cs = constants.cstar;
        double r1_err = 0.0, ch_err = 0.0;
        for (double v : r.r1_values) r1_err = std::max(r1_err, std::abs(v - 1.0));
        for (double v : rep.c_h_samples) ch_err = std::max(ch_err, std::abs(v - (1.0 + cs / cfg.nu)));
        const double r2 = 1.0 / cfg.nu + cfg.k0 * cfg.nu / 2.0;
        const double r2_err = std::abs(r.r2 - r2) / r2;
        const double r3_err = std::abs(r.r3 - r.r2 * std::exp(2.0 * cs * cs)) / r.r3;
        const bool ok = r1_err <= 1e-12 && r2_err <= 1e-12 && r3_err <= 1e-12 && ch_err <= 1e-12;
        return Outcome{ok, "errors: R1 " + num(r1_err) + ", R2 " + num(r2_err) + ", R3 " + num(r3_err) + ", C_H " +
                               num(ch_err) + " (limit 1e-12)"};
    });

    std::printf("%s: %d failing\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
    return failures == 0 ? 0 : 1;
}
