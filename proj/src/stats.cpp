#include "shellflow/stats.hpp"

#include "shellflow/attractor.hpp"
#include "shellflow/parallel.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace shellflow {

std::string to_string(Component c) {
    switch (c) {
    case Component::u:
        return "u";
    case Component::w:
        return "w";
    case Component::q:
        return "q";
    }
    return "u";
}

Component component_from_string(const std::string& name) {
    if (name == "u") return Component::u;
    if (name == "w") return Component::w;
    if (name == "q") return Component::q;
    throw std::invalid_argument("unknown component '" + name + "' (expected u, w or q)");
}

StructureTable structure_function(const Trajectory& traj, double p, Component component) {
    if (traj.states.empty()) throw std::invalid_argument("structure function of an empty trajectory");
    if (!(p > 0.0)) throw std::invalid_argument("moment order p must be positive");
    const std::size_t n = traj.states.front().size();
    const double lambda = traj.config.lambda;
    auto amplitude = [&](const CoupledState& x, std::size_t i) {
        switch (component) {
        case Component::u:
            return x.u[i];
        case Component::w:
            return x.w[i];
        case Component::q:
            return x.u[i] + lambda * x.w[i];
        }
        return x.u[i];
    };

    StructureTable table;
    table.p = p;
    table.component = component;
    table.k0 = traj.config.k0;
    table.t_start = traj.times.front();
    table.t_end = traj.times.back();
    table.samples = traj.states.size();
    table.values.assign(n, 0.0);
    const std::size_t m = traj.states.size();
    if (m == 1) {
        for (std::size_t i = 0; i < n; ++i) table.values[i] = std::pow(std::abs(amplitude(traj.states[0], i)), p);
        return table;
    }
    const double span = traj.times.back() - traj.times.front();
    if (!(span > 0.0)) throw std::invalid_argument("trajectory times must increase");
    for (std::size_t i = 0; i < n; ++i) {
        double integral = 0.0;
        double prev = std::pow(std::abs(amplitude(traj.states[0], i)), p);
        for (std::size_t k = 1; k < m; ++k) {
            const double cur = std::pow(std::abs(amplitude(traj.states[k], i)), p);
            integral += 0.5 * (traj.times[k] - traj.times[k - 1]) * (prev + cur);
            prev = cur;
        }
        table.values[i] = integral / span;
    }
    return table;
}

StructureTable ensemble_structure_function(const std::vector<Trajectory>& trajs, double p, Component component) {
    if (trajs.empty()) throw std::invalid_argument("empty ensemble");
    StructureTable mean = structure_function(trajs.front(), p, component);
    for (std::size_t k = 1; k < trajs.size(); ++k) {
        const StructureTable t = structure_function(trajs[k], p, component);
        if (t.values.size() != mean.values.size()) throw std::invalid_argument("ensemble members differ in N");
        for (std::size_t i = 0; i < t.values.size(); ++i) mean.values[i] += t.values[i];
        mean.samples += t.samples;
    }
    for (double& v : mean.values) v /= static_cast<double>(trajs.size());
    return mean;
}

ZetaFit fit_zeta(const StructureTable& table, int n_lo, int n_hi) {
    if (n_lo < 1 || n_hi > static_cast<int>(table.values.size()) || n_hi - n_lo < 2)
        throw std::invalid_argument("fit range needs 1 <= n_lo, n_hi <= N and n_hi - n_lo >= 2");
    std::vector<double> x;
    std::vector<double> y;
    for (int n = n_lo; n <= n_hi; ++n) {
        const double s = table.values[static_cast<std::size_t>(n - 1)];
        if (!(s > 0.0) || !std::isfinite(s))
            throw std::domain_error("S_p at shell " + std::to_string(n) + " is not positive; log undefined");
        x.push_back(std::log(wavenumber(n, table.k0)));
        y.push_back(std::log(s));
    }
    const double m = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / m;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / m;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (intercept + slope * x[i]);
        ss += r * r;
    }
    return {-slope, std::sqrt(ss / m), intercept};
}

std::pair<int, int> default_fit_range(const StructureTable& table, double tolerance) {
    const int n = static_cast<int>(table.values.size());
    std::vector<double> slope;  // slope[i] between shells i+1 and i+2
    for (int i = 0; i + 1 < n; ++i) {
        const double a = table.values[static_cast<std::size_t>(i)];
        const double b = table.values[static_cast<std::size_t>(i + 1)];
        slope.push_back(a > 0.0 && b > 0.0 ? std::log(b / a) / std::log(2.0)
                                           : std::numeric_limits<double>::quiet_NaN());
    }
    // Fallback: the longest run of shells with positive S_p, so the fit never takes a log of zero.
    int best_lo = 1;
    int best_hi = n;
    int run_start = 0;
    int longest = 0;
    for (int i = 0; i <= n; ++i) {
        if (i < n && table.values[static_cast<std::size_t>(i)] > 0.0) continue;
        if (i - run_start > longest && i - run_start >= 3) {
            longest = i - run_start;
            best_lo = run_start + 1;
            best_hi = i;
        }
        run_start = i + 1;
    }
    int best_len = 0;
    for (int lo = 0; lo < static_cast<int>(slope.size()); ++lo) {
        for (int hi = lo + 1; hi < static_cast<int>(slope.size()); ++hi) {
            double mean = 0.0;
            bool ok = true;
            for (int k = lo; k <= hi; ++k) {
                if (!std::isfinite(slope[static_cast<std::size_t>(k)])) ok = false;
                mean += slope[static_cast<std::size_t>(k)];
            }
            if (!ok) break;
            mean /= static_cast<double>(hi - lo + 1);
            for (int k = lo; k <= hi && ok; ++k)
                ok = std::abs(slope[static_cast<std::size_t>(k)] - mean) <= tolerance * std::abs(mean);
            if (ok && hi - lo + 2 > best_len) {
                best_len = hi - lo + 2;
                best_lo = lo + 1;
                best_hi = hi + 2;
            }
        }
    }
    return {best_lo, best_hi};
}

std::vector<ContinuityRow> lambda_continuity_sweep(const NoisePath& path, const std::vector<double>& lambdas,
                                                   double lambda0, const std::vector<CoupledState>& initial,
                                                   const SolverSettings& settings, const ModelConfig& cfg) {
    if (initial.empty()) throw std::invalid_argument("continuity sweep needs initial points");
    auto run_all = [&](double lambda) {
        ModelConfig c = cfg;
        c.lambda = lambda;
        std::vector<Trajectory> out(initial.size());
        parallel_for(initial.size(), [&](std::size_t m) { out[m] = solve(initial[m], path, settings, c); });
        return out;
    };
    const std::vector<Trajectory> base = run_all(lambda0);
    std::vector<ContinuityRow> rows;
    for (double lambda : lambdas) {
        double worst = 0.0;
        if (lambda != lambda0) {
            const std::vector<Trajectory> runs = run_all(lambda);
            for (std::size_t m = 0; m < runs.size(); ++m)
                for (std::size_t k = 0; k < runs[m].states.size(); ++k)
                    worst = std::max(worst, norm_h(runs[m].states[k] - base[m].states[k]));
        }
        rows.push_back({lambda, worst});
    }
    std::stable_sort(rows.begin(), rows.end(), [&](const ContinuityRow& a, const ContinuityRow& b) {
        return std::abs(a.lambda - lambda0) < std::abs(b.lambda - lambda0);
    });
    return rows;
}

std::vector<ContinuityRow> lambda_continuity_sweep(std::uint64_t seed, const std::vector<double>& lambdas,
                                                   double lambda0, double b_radius, std::size_t members,
                                                   const SolverSettings& settings, const ModelConfig& cfg) {
    const NoisePath path = sample_path(seed, settings.dt, std::min(settings.t0, 0.0),
                                       std::max(settings.t1, 0.0), cfg.sigma);
    return lambda_continuity_sweep(path, lambdas, lambda0, sample_ball(cfg.n_shells, members, b_radius, seed),
                                   settings, cfg);
}

double u_distance_via_q(const CoupledState& x, const CoupledState& x0, double lambda) {
    const QRho at_lambda = combine_q_rho(x, x0, lambda);
    const QRho at_zero = combine_q_rho(x0, x0, 0.0);
    ShellState d = at_lambda.q - at_zero.q;
    if (lambda != 0.0) d -= lambda * x.w;
    return norm_h(d);
}

std::vector<ExponentComparison> compare_uw_exponents(const Trajectory& traj, const std::vector<double>& p_list,
                                                     int n_lo, int n_hi) {
    std::vector<ExponentComparison> rows;
    for (double p : p_list) {
        const double zu = fit_zeta(structure_function(traj, p, Component::u), n_lo, n_hi).zeta;
        const double zw = fit_zeta(structure_function(traj, p, Component::w), n_lo, n_hi).zeta;
        rows.push_back({p, zu, zw, std::abs(zu - zw)});
    }
    return rows;
}

}  // namespace shellflow
