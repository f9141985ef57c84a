#include "shellflow/integrator.hpp"

#include "shellflow/io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace shellflow {
namespace {

void clear(ShellState& x) {
    auto a = x.amplitudes();
    std::fill(a.begin(), a.end(), Complex{});
}

bool on_grid(double t, const NoisePath& path) {
    try {
        path.step_index(t);
        return true;
    } catch (const std::invalid_argument&) {
        return false;
    }
}

/// z read step by step from a propagator, never stored.
class LockstepZ {
public:
    LockstepZ(const NoisePath& path, const ModelConfig& cfg, std::int64_t first, OUStart start)
        : prop_(path, cfg.alpha, cfg.nu, cfg.k0),
          z_(ou_series(path, cfg.alpha, cfg.nu, cfg.k0, first, first, start).z.front()),
          step_(first) {}

    const ShellState& at(std::int64_t step) {
        while (step_ < step) prop_.advance(z_, step_++);
        return z_;
    }

private:
    OUPropagator prop_;
    ShellState z_;
    std::int64_t step_;
};

class SeriesZ {
public:
    explicit SeriesZ(const OUSeries& s) : s_(&s) {}
    const ShellState& at(std::int64_t step) const { return s_->at_step(step); }

private:
    const OUSeries* s_;
};

CoupledState plus_z(const CoupledState& v, const ShellState& z) {
    CoupledState u = v;
    u.u += z;
    u.w += z;
    return u;
}

template <class ZSource>
Trajectory integrate_flow(const CoupledState& u0, const NoisePath& path, const SolverSettings& settings,
                          const ModelConfig& cfg, ZSource& z) {
    const std::int64_t j0 = path.step_index(settings.t0);
    const std::int64_t j1 = path.step_index(settings.t1);
    FlowStepper stepper(cfg, settings.dt, settings.suppress_nonlinearity);

    Trajectory traj;
    traj.config = cfg;
    traj.seed = path.seed();
    traj.scheme = Scheme::ou_splitting;
    traj.times.push_back(path.time_of(j0));
    traj.states.push_back(u0);

    CoupledState v = u0;
    v.u -= z.at(j0);
    v.w -= z.at(j0);
    for (std::int64_t j = j0; j < j1; ++j) {
        stepper.step(v, z.at(j), path.time_of(j));
        const auto done = static_cast<std::size_t>(j + 1 - j0);
        if (done % settings.store_every == 0 || j + 1 == j1) {
            traj.times.push_back(path.time_of(j + 1));
            traj.states.push_back(plus_z(v, z.at(j + 1)));
        }
    }
    return traj;
}

}  // namespace

std::string to_string(Scheme scheme) {
    return scheme == Scheme::ou_splitting ? "ou_splitting" : "euler_maruyama";
}

Scheme scheme_from_string(const std::string& name) {
    if (name == "ou_splitting" || name == "ou" || name == "flow") return Scheme::ou_splitting;
    if (name == "euler_maruyama" || name == "em") return Scheme::euler_maruyama;
    throw std::invalid_argument("unknown scheme '" + name + "'");
}

void validate_settings(const SolverSettings& settings, const NoisePath& path) {
    if (!(settings.dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (!(settings.t0 < settings.t1)) throw std::invalid_argument("need t0 < t1");
    if (settings.store_every < 1) throw std::invalid_argument("store_every must be >= 1");
    if (std::abs(settings.dt - path.dt()) > 1e-12 * path.dt())
        throw std::invalid_argument("solver dt differs from the noise path grid");
    if (!on_grid(settings.t0, path) || !on_grid(settings.t1, path))
        throw std::invalid_argument("t0 and t1 must lie on the noise path grid");
}

BlowUpError::BlowUpError(double time, double v_norm_h, double z_norm_v)
    : std::runtime_error("blow-up at t = " + format_real(time) + " (|v|_H = " + format_real(v_norm_h) +
                         ", ||z||_V = " + format_real(z_norm_v) + ")"),
      time_(time),
      v_norm_h_(v_norm_h),
      z_norm_v_(z_norm_v) {}

FlowStepper::FlowStepper(const ModelConfig& cfg, double dt, bool suppress_nonlinearity)
    : cfg_(cfg),
      kind_(BilinearKind::from(cfg)),
      suppress_(suppress_nonlinearity),
      x_(cfg.n_shells),
      nl_(cfg.n_shells) {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    for (std::size_t i = 0; i < cfg.n_shells; ++i) {
        const double k = wavenumber(static_cast<int>(i) + 1, cfg.k0);
        const double x = -cfg.nu * k * k * dt;
        decay_.push_back(std::exp(x));
        weight_.push_back(x == 0.0 ? dt : dt * std::expm1(x) / x);
    }
}

void FlowStepper::blow_up(const CoupledState& v, const ShellState& z, double t) const {
    throw BlowUpError(t, norm_h(v), norm_v(z, cfg_.k0));
}

void FlowStepper::step(CoupledState& v, const ShellState& z, double t) {
    const std::size_t n = decay_.size();
    if (v.size() != n || z.size() != n) throw std::invalid_argument("state size differs from config");
    for (std::size_t i = 0; i < n; ++i) {
        x_.u[i] = v.u[i] + z[i];
        x_.w[i] = v.w[i] + z[i];
    }
    clear(nl_.u);
    clear(nl_.w);
    if (!suppress_) {
        accumulate_b(kind_, x_.u, x_.u, cfg_.k0, 1.0, nl_.u);
        accumulate_b(kind_, x_.u, x_.w, cfg_.k0, 1.0, nl_.w);
        if (cfg_.lambda != 0.0) {
            accumulate_b(kind_, x_.w, x_.u, cfg_.k0, cfg_.lambda, nl_.u);
            accumulate_b(kind_, x_.w, x_.w, cfg_.k0, cfg_.lambda, nl_.w);
        }
    }
    if (!nl_.is_finite()) blow_up(v, z, t);
    for (std::size_t i = 0; i < n; ++i) {
        v.u[i] = decay_[i] * v.u[i] + weight_[i] * (-nl_.u[i] + cfg_.alpha * z[i]);
        v.w[i] = decay_[i] * v.w[i] + weight_[i] * (-nl_.w[i] + cfg_.alpha * z[i]);
    }
    if (!v.is_finite()) blow_up(v, z, t);
}

void FlowStepper::step_solo(ShellState& v, const ShellState& z, double t) {
    const std::size_t n = decay_.size();
    if (v.size() != n || z.size() != n) throw std::invalid_argument("state size differs from config");
    for (std::size_t i = 0; i < n; ++i) x_.u[i] = v[i] + z[i];
    clear(nl_.u);
    if (!suppress_) accumulate_b(kind_, x_.u, x_.u, cfg_.k0, 1.0, nl_.u);
    if (!nl_.u.is_finite()) throw BlowUpError(t, norm_h(v), norm_v(z, cfg_.k0));
    for (std::size_t i = 0; i < n; ++i)
        v[i] = decay_[i] * v[i] + weight_[i] * (-nl_.u[i] + cfg_.alpha * z[i]);
    if (!v.is_finite()) throw BlowUpError(t, norm_h(v), norm_v(z, cfg_.k0));
}

CoupledState step_v(const CoupledState& v, const CoupledState& z, double dt, const ModelConfig& cfg,
                    double t) {
    if (!(z.u == z.w)) throw std::invalid_argument("OU state must have identical components");
    FlowStepper stepper(cfg, dt);
    CoupledState out = v;
    stepper.step(out, z.u, t);
    return out;
}

Trajectory solve_flow(const CoupledState& u0, const NoisePath& path, const SolverSettings& settings,
                      const ModelConfig& cfg) {
    validate_settings(settings, path);
    LockstepZ z(path, cfg, path.step_index(settings.t0), settings.z_start);
    return integrate_flow(u0, path, settings, cfg, z);
}

Trajectory solve_flow(const CoupledState& u0, const NoisePath& path, const OUSeries& series,
                      const SolverSettings& settings, const ModelConfig& cfg) {
    validate_settings(settings, path);
    const std::int64_t j0 = path.step_index(settings.t0);
    const std::int64_t j1 = path.step_index(settings.t1);
    const auto last = series.first_step + static_cast<std::int64_t>(series.z.size()) - 1;
    if (j0 < series.first_step || j1 > last)
        throw std::invalid_argument("OU series does not cover the integration window");
    if (series.alpha != cfg.alpha) throw std::invalid_argument("OU series alpha differs from config");
    SeriesZ z(series);
    return integrate_flow(u0, path, settings, cfg, z);
}

std::vector<ShellState> solve_solo(const ShellState& u0, const NoisePath& path,
                                   const SolverSettings& settings, const ModelConfig& cfg) {
    validate_settings(settings, path);
    const std::int64_t j0 = path.step_index(settings.t0);
    const std::int64_t j1 = path.step_index(settings.t1);
    LockstepZ z(path, cfg, j0, settings.z_start);
    FlowStepper stepper(cfg, settings.dt, settings.suppress_nonlinearity);
    std::vector<ShellState> out{u0};
    ShellState v = u0 - z.at(j0);
    for (std::int64_t j = j0; j < j1; ++j) {
        stepper.step_solo(v, z.at(j), path.time_of(j));
        const auto done = static_cast<std::size_t>(j + 1 - j0);
        if (done % settings.store_every == 0 || j + 1 == j1) out.push_back(v + z.at(j + 1));
    }
    return out;
}

Trajectory solve_sde_em(const CoupledState& u0, const NoisePath& path, const SolverSettings& settings,
                        const ModelConfig& cfg) {
    validate_settings(settings, path);
    const double k_top = wavenumber(static_cast<int>(cfg.n_shells), cfg.k0);
    if (settings.dt * cfg.nu * k_top * k_top > 2.0)
        throw std::domain_error("Euler-Maruyama is unstable: dt nu k_N^2 = " +
                                format_real(settings.dt * cfg.nu * k_top * k_top) + " > 2");
    const std::int64_t j0 = path.step_index(settings.t0);
    const std::int64_t j1 = path.step_index(settings.t1);
    const BilinearKind kind = BilinearKind::from(cfg);
    const std::size_t n = cfg.n_shells;
    std::vector<double> damping;
    std::vector<int> forced;
    for (std::size_t i = 0; i < n; ++i) {
        const double k = wavenumber(static_cast<int>(i) + 1, cfg.k0);
        damping.push_back(cfg.nu * k * k);
        if (path.sigma().at(i) != Complex{}) forced.push_back(static_cast<int>(i) + 1);
    }

    Trajectory traj;
    traj.config = cfg;
    traj.seed = path.seed();
    traj.scheme = Scheme::euler_maruyama;
    traj.times.push_back(path.time_of(j0));
    traj.states.push_back(u0);

    CoupledState u = u0;
    CoupledState nl(n);
    const double dt = settings.dt;
    for (std::int64_t j = j0; j < j1; ++j) {
        clear(nl.u);
        clear(nl.w);
        if (!settings.suppress_nonlinearity) {
            accumulate_b(kind, u.u, u.u, cfg.k0, 1.0, nl.u);
            accumulate_b(kind, u.u, u.w, cfg.k0, 1.0, nl.w);
            if (cfg.lambda != 0.0) {
                accumulate_b(kind, u.w, u.u, cfg.k0, cfg.lambda, nl.u);
                accumulate_b(kind, u.w, u.w, cfg.k0, cfg.lambda, nl.w);
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            u.u[i] += dt * (-damping[i] * u.u[i] - nl.u[i]);
            u.w[i] += dt * (-damping[i] * u.w[i] - nl.w[i]);
        }
        for (const int shell : forced) {
            const Complex dw = path.increment(shell, j);
            u.u[static_cast<std::size_t>(shell - 1)] += dw;
            u.w[static_cast<std::size_t>(shell - 1)] += dw;
        }
        if (!u.is_finite()) throw BlowUpError(path.time_of(j), norm_h(u), 0.0);
        const auto done = static_cast<std::size_t>(j + 1 - j0);
        if (done % settings.store_every == 0 || j + 1 == j1) {
            traj.times.push_back(path.time_of(j + 1));
            traj.states.push_back(u);
        }
    }
    return traj;
}

Trajectory solve(const CoupledState& u0, const NoisePath& path, const SolverSettings& settings,
                 const ModelConfig& cfg) {
    return settings.scheme == Scheme::ou_splitting ? solve_flow(u0, path, settings, cfg)
                                                   : solve_sde_em(u0, path, settings, cfg);
}

double verify_cocycle(const CoupledState& u0, const NoisePath& path, double s, double t,
                      const SolverSettings& settings, const ModelConfig& cfg) {
    if (s < 0.0 || t < 0.0) throw std::invalid_argument("cocycle check needs s, t >= 0");
    auto run = [&](const CoupledState& x, const NoisePath& p, double span) {
        if (span == 0.0) return x;
        SolverSettings st = settings;
        st.scheme = Scheme::ou_splitting;
        st.t0 = 0.0;
        st.t1 = span;
        st.store_every = std::numeric_limits<std::size_t>::max();
        return solve_flow(x, p, st, cfg).final_state();
    };
    const CoupledState direct = run(u0, path, s + t);
    const CoupledState split = run(run(u0, path, s), shift_theta(path, s), t);
    return norm_h(direct - split);
}

std::string trajectory_to_csv(const Trajectory& traj) {
    std::string out = "t,shell,re,im,component\n";
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const std::string t = format_real(traj.times[k]);
        const CoupledState& x = traj.states[k];
        for (const char* tag : {"u", "w"}) {
            const ShellState& c = tag[0] == 'u' ? x.u : x.w;
            for (std::size_t i = 0; i < c.size(); ++i) {
                out += t;
                out += ',' + std::to_string(i + 1) + ',' + format_real(c[i].real()) + ',' +
                       format_real(c[i].imag()) + ',' + tag + '\n';
            }
        }
    }
    return out;
}

Trajectory trajectory_from_csv(const std::vector<std::string>& lines) {
    if (lines.empty() || split_csv(lines.front()) !=
                             std::vector<std::string>{"t", "shell", "re", "im", "component"})
        throw std::invalid_argument("trajectory CSV must start with header t,shell,re,im,component");
    struct Row {
        double t;
        std::size_t shell;
        Complex value;
        bool is_u;
    };
    std::vector<Row> rows;
    std::size_t n_shells = 0;
    for (std::size_t k = 1; k < lines.size(); ++k) {
        if (lines[k].empty()) continue;
        const auto f = split_csv(lines[k]);
        if (f.size() != 5 || (f[4] != "u" && f[4] != "w"))
            throw std::invalid_argument("malformed trajectory row " + std::to_string(k + 1));
        const double shell = parse_real(f[1]);
        if (shell < 1 || shell != std::floor(shell))
            throw std::invalid_argument("bad shell index in row " + std::to_string(k + 1));
        rows.push_back({parse_real(f[0]), static_cast<std::size_t>(shell),
                        {parse_real(f[2]), parse_real(f[3])}, f[4] == "u"});
        n_shells = std::max(n_shells, rows.back().shell);
    }
    Trajectory traj;
    for (const Row& r : rows) {
        if (traj.times.empty() || traj.times.back() != r.t) {
            if (!traj.times.empty() && r.t < traj.times.back())
                throw std::invalid_argument("trajectory times must increase");
            traj.times.push_back(r.t);
            traj.states.emplace_back(n_shells);
        }
        CoupledState& x = traj.states.back();
        (r.is_u ? x.u : x.w)[r.shell - 1] = r.value;
    }
    if (traj.states.empty()) throw std::invalid_argument("trajectory CSV has no samples");
    traj.config.n_shells = n_shells;
    return traj;
}

std::string to_csv_rows(const CoupledState& x) {
    return "u," + to_csv_row(x.u) + "\nw," + to_csv_row(x.w) + "\n";
}

CoupledState coupled_state_from_csv_rows(const std::string& u_row, const std::string& w_row) {
    auto strip = [](const std::string& row, const char* tag) {
        const std::string prefix = std::string(tag) + ",";
        if (row.rfind(prefix, 0) != 0) throw std::invalid_argument(std::string("expected a row tagged ") + tag);
        return shell_state_from_csv_row(row.substr(prefix.size()));
    };
    return CoupledState(strip(u_row, "u"), strip(w_row, "w"));
}

}  // namespace shellflow
