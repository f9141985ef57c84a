#include "shellflow/cli.hpp"

#include "shellflow/attractor.hpp"
#include "shellflow/bilinear.hpp"
#include "shellflow/io.hpp"
#include "shellflow/manifest.hpp"
#include "shellflow/noise.hpp"
#include "shellflow/stats.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>
#include <ostream>
#include <random>

#ifndef SHELLFLOW_VERSION
#define SHELLFLOW_VERSION "unknown"
#endif

namespace shellflow {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::size_t suite_shells = 16;
constexpr std::size_t suite_pairs = 200;

/// Thrown when a check inside a subcommand fails; maps to exit 4.
struct ViolationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

ShellState random_state(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    ShellState x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = Complex(normal(rng), normal(rng));
    return x;
}

InvariantResult check_energy(const std::string& name, const BilinearKind& kind, double k0, std::mt19937_64& rng) {
    double worst = 0.0;
    for (std::size_t t = 0; t < suite_pairs; ++t) {
        const ShellState u = random_state(suite_shells, rng);
        const ShellState v = random_state(suite_shells, rng);
        const double scale = norm_v(u, k0) * norm_h(v) * norm_h(v);
        worst = std::max(worst, std::abs(inner_h(apply_b(kind, u, v, k0), v)) / scale);
    }
    return {name, worst <= 1e-12, "max |Re<B(u,v),v>| / (||u||_V |v|^2) = " + format_real(worst)};
}

InvariantResult check_skew(const std::string& name, const BilinearKind& kind, double k0, std::mt19937_64& rng) {
    double worst = 0.0;
    for (std::size_t t = 0; t < suite_pairs; ++t) {
        const ShellState u = random_state(suite_shells, rng);
        const ShellState v = random_state(suite_shells, rng);
        const ShellState w = random_state(suite_shells, rng);
        const double lhs = inner_h(apply_b(kind, u, v, k0), w);
        const double rhs = -inner_h(apply_b(kind, u, w, k0), v);
        const double scale = norm_v(u, k0) * norm_h(v) * norm_h(w);
        worst = std::max(worst, std::abs(lhs - rhs) / scale);
    }
    return {name, worst <= 1e-12, "max skew defect / (||u||_V |v| |w|) = " + format_real(worst)};
}

std::vector<Complex> suite_sigma(const ModelConfig& m) {
    std::vector<Complex> sigma(suite_shells);
    for (std::size_t i = 0; i < suite_shells && i < m.sigma.size(); ++i) sigma[i] = m.sigma[i];
    return sigma;
}

/// Reads the trajectory, model and flags into one place so every subcommand
/// resolves configuration the same way.
struct CommonOptions {
    std::string config_path;
    std::uint64_t seed = 1;
    std::string out_dir = ".";
};

RunConfig load(const CommonOptions& o) {
    RunConfig rc = o.config_path.empty() ? default_run_config() : load_run_config(o.config_path);
    return rc;
}

void prepare_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create output directory '" + dir + "'");
}

class OutputWriter {
public:
    explicit OutputWriter(std::string dir) : dir_(std::move(dir)) { prepare_out_dir(dir_); }

    void write(const std::string& name, const std::string& text) {
        const std::string path = (fs::path(dir_) / name).string();
        write_text_file(path, text);
        digests_.push_back({name, sha256_hex(text)});
    }

    void finish(RunManifest m, std::ostream& out) {
        m.outputs = digests_;
        write_text_file((fs::path(dir_) / "manifest.json").string(), emit_manifest(m));
        for (const auto& d : digests_) out << "wrote " << (fs::path(dir_) / d.path).string() << "\n";
        out << "wrote " << (fs::path(dir_) / "manifest.json").string() << "\n";
    }

private:
    std::string dir_;
    std::vector<OutputDigest> digests_;
};

RunManifest base_manifest(const std::string& sub, const RunConfig& rc, std::uint64_t seed) {
    RunManifest m;
    m.subcommand = sub;
    m.model = rc.model;
    m.solver = rc.solver;
    m.seed = seed;
    m.tool_version = SHELLFLOW_VERSION;
    m.timestamp = utc_timestamp();
    return m;
}

AttractorConstants resolve_constants(const RunConfig& rc) {
    AttractorConstants c;
    if (rc.attractor.cstar <= 0.0 || rc.attractor.c_vh <= 0.0) {
        const AttractorConstants est = AttractorConstants::estimate(rc.model, rc.attractor.constant_trials);
        c.cstar = est.cstar;
        c.c_vh = est.c_vh;
    }
    if (rc.attractor.cstar > 0.0) c.cstar = rc.attractor.cstar;
    if (rc.attractor.c_vh > 0.0) c.c_vh = rc.attractor.c_vh;
    c.K1 = rc.attractor.K1;
    c.K2 = rc.attractor.K2;
    c.K3 = rc.attractor.K3;
    return c;
}

void print_warnings(const RunConfig& rc, std::ostream& err) {
    for (const auto& w : validate_config(rc.model)) err << "warning: " << w << "\n";
}

std::string cloud_to_csv(const PullbackCloud& cloud) {
    std::string out = "member,component";
    for (std::size_t i = 1; i <= (cloud.points.empty() ? 0 : cloud.points.front().size()); ++i)
        out += ",re_" + std::to_string(i) + ",im_" + std::to_string(i);
    out += "\n";
    for (std::size_t m = 0; m < cloud.points.size(); ++m) {
        out += std::to_string(m) + ",u," + to_csv_row(cloud.points[m].u) + "\n";
        out += std::to_string(m) + ",w," + to_csv_row(cloud.points[m].w) + "\n";
    }
    return out;
}

json constants_json(const AttractorConstants& c) {
    return {{"cstar", c.cstar}, {"c_vh", c.c_vh}, {"K1", c.K1}, {"K2", c.K2}, {"K3", c.K3}};
}

int cmd_validate(const CommonOptions& o, std::ostream& out, std::ostream& err) {
    const RunConfig rc = load(o);
    print_warnings(rc, err);
    const auto results = run_invariant_suite(rc);
    std::optional<std::string> first_failure;
    for (const auto& r : results) {
        out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
        if (!r.passed && !first_failure) first_failure = r.name;
    }
    if (first_failure) {
        err << "invariant failed: " << *first_failure << "\n";
        return exit_usage;
    }
    out << "all invariants passed\n";
    return exit_ok;
}

struct SimulateFlags {
    std::optional<double> t1;
    std::optional<double> dt;
    std::optional<double> lambda;
    std::optional<std::string> scheme;
};

int cmd_simulate(const CommonOptions& o, const SimulateFlags& f, std::ostream& out, std::ostream& err) {
    RunConfig rc = load(o);
    if (f.t1) rc.solver.t1 = *f.t1;
    if (f.dt) rc.solver.dt = *f.dt;
    if (f.lambda) rc.model.lambda = *f.lambda;
    if (f.scheme) rc.solver.scheme = scheme_from_string(*f.scheme);
    print_warnings(rc, err);
    if (rc.alpha_auto) rc.model.alpha = alpha_zero(rc.model, resolve_constants(rc));

    OutputWriter writer(o.out_dir);
    const NoisePath path = sample_path(o.seed, rc.solver.dt, std::min(rc.solver.t0, 0.0),
                                       std::max(rc.solver.t1, 0.0), rc.model.sigma);
    const CoupledState u0 = rc.initial == "ball"
                                ? sample_ball(rc.model.n_shells, 1, rc.initial_radius, o.seed).front()
                                : CoupledState(rc.model.n_shells);
    const Trajectory traj = solve(u0, path, rc.solver, rc.model);
    writer.write("trajectory.csv", trajectory_to_csv(traj));

    RunManifest m = base_manifest("simulate", rc, o.seed);
    m.parameters = {{"initial", rc.initial}, {"initial_radius", rc.initial_radius}, {"alpha_auto", rc.alpha_auto}};
    writer.finish(m, out);
    return exit_ok;
}

struct AttractorFlags {
    std::optional<std::string> lambdas;
    std::optional<std::size_t> members;
    std::optional<double> pullback_time;
};

int cmd_attractor(const CommonOptions& o, const AttractorFlags& f, std::ostream& out, std::ostream& err) {
    RunConfig rc = load(o);
    auto& a = rc.attractor;
    if (f.lambdas) a.lambdas = parse_real_list(*f.lambdas);
    if (f.members) a.members = *f.members;
    if (f.pullback_time) a.pullback_time = *f.pullback_time;
    print_warnings(rc, err);
    if (a.lambdas.empty()) throw std::invalid_argument("lambda grid is empty");

    OutputWriter writer(o.out_dir);
    const AttractorConstants constants = resolve_constants(rc);
    if (rc.alpha_auto) {
        // One alpha for the whole grid: the largest |lambda| needs the largest shift.
        ModelConfig widest = rc.model;
        for (double l : a.lambdas) widest.lambda = std::max(std::abs(widest.lambda), std::abs(l));
        rc.model.alpha = alpha_zero(widest, constants);
    }
    const double depth = std::max(a.pullback_time, a.t_horizon);
    const NoisePath path = sample_path(o.seed, rc.solver.dt, -depth, 0.0, rc.model.sigma);
    ModelConfig base = rc.model;
    base.lambda = a.lambda0;
    double radius = a.initial_radius;
    if (radius <= 0.0) radius = std::sqrt(radius_r1(path, base, constants, 0.0, a.t_horizon).value);
    const auto initial = sample_ball(rc.model.n_shells, a.members, radius, o.seed);
    const SemicontinuityResult result =
        upper_semicontinuity_curve(path, a.lambdas, a.lambda0, rc.model, initial, a.pullback_time, rc.solver);

    std::string table = "lambda,d_forward,d_backward,cloud_resolution\n";
    for (const auto& r : result.rows)
        table += format_real(r.lambda) + "," + format_real(r.d_forward) + "," + format_real(r.d_backward) + "," +
                 format_real(r.resolution) + "\n";
    writer.write("semicontinuity.csv", table);
    for (std::size_t k = 0; k < result.clouds.size(); ++k) {
        const PullbackCloud& cloud = result.clouds[k];
        ModelConfig c = rc.model;
        c.lambda = cloud.lambda;
        const AbsorbingRadii radii = absorbing_radii(path, c, constants, a.t_horizon);
        const json meta = {{"lambda", cloud.lambda},       {"pullback_time", cloud.pullback_time},
                           {"members", cloud.members},     {"seed", cloud.seed},
                           {"r3_bound", radii.r3},         {"resolution", cloud_resolution(cloud)},
                           {"diameter", cloud_diameter(cloud)}};
        writer.write("cloud_" + std::to_string(k) + ".csv", cloud_to_csv(cloud));
        writer.write("cloud_" + std::to_string(k) + ".json", meta.dump(2) + "\n");
    }

    RunManifest m = base_manifest("attractor", rc, o.seed);
    m.parameters = {{"lambdas", a.lambdas},     {"lambda0", a.lambda0},     {"members", a.members},
                    {"pullback_time", a.pullback_time}, {"initial_radius", radius}, {"t_horizon", a.t_horizon},
                    {"constants", constants_json(constants)}};
    writer.finish(m, out);
    for (const auto& r : result.rows)
        out << "lambda " << format_real(r.lambda) << ": d_H = " << format_real(r.d_forward) << "\n";
    return exit_ok;
}

struct DimensionFlags {
    std::optional<double> t_erg;
    std::optional<double> K1;
    std::optional<double> K2;
    std::optional<double> K3;
    std::optional<std::size_t> n_modes;
};

int cmd_dimension(const CommonOptions& o, const DimensionFlags& f, std::ostream& out, std::ostream& err) {
    RunConfig rc = load(o);
    auto& a = rc.attractor;
    if (f.t_erg) a.t_erg = *f.t_erg;
    if (f.K1) a.K1 = *f.K1;
    if (f.K2) a.K2 = *f.K2;
    if (f.K3) a.K3 = *f.K3;
    if (f.n_modes) a.n_modes = *f.n_modes;
    print_warnings(rc, err);

    OutputWriter writer(o.out_dir);
    const AttractorConstants constants = resolve_constants(rc);
    if (rc.alpha_auto) rc.model.alpha = alpha_zero(rc.model, constants);
    const double depth = a.t_horizon + a.squeeze_pullback;
    const NoisePath path = sample_path(o.seed, rc.solver.dt, -depth, std::max(a.t_erg, a.squeeze_time),
                                       rc.model.sigma);
    const SqueezingReport rep = squeezing_constants(path, rc.model, constants, a.t_erg, a.n_modes, a.t_horizon);
    const DimensionBound dim = dimension_bound(rep.e_c_h, rep.c_vh, rc.model.nu, rc.model.k0, a.K1, a.K2, a.K3);

    const double radius = std::sqrt(radius_r1(path, rc.model, constants, 0.0, a.t_horizon).value);
    const auto initial = sample_ball(rc.model.n_shells, 2 * a.squeeze_pairs, radius, o.seed);
    const PullbackCloud cloud = pullback_cloud(path, rc.model, initial, a.squeeze_pullback, rc.solver);
    std::vector<std::pair<CoupledState, CoupledState>> pairs;
    for (std::size_t p = 0; p < a.squeeze_pairs; ++p)
        pairs.emplace_back(cloud.points[2 * p], cloud.points[2 * p + 1]);
    const SqueezingCheck check =
        verify_squeezing(path, rc.model, constants, pairs, a.n_modes, a.squeeze_time, rc.solver, a.t_horizon);

    const json report = {
        {"schema_version", 1},
        {"e_c_h", rep.e_c_h},
        {"e_c_h_half_window", rep.e_c_h_half},
        {"t_erg", a.t_erg},
        {"n_modes", rep.n_modes},
        {"mu", rep.mu},
        {"delta_sq", rep.delta_sq},
        {"gamma0", rep.gamma0},
        {"c2_tilde", rep.c2_tilde},
        {"c2_tilde_half_window", rep.c2_tilde_half},
        {"c2_tilde_stable", rep.c2_tilde_stable},
        {"constants", {{"cstar", rep.cstar}, {"c_vh", rep.c_vh}, {"K1", a.K1}, {"K2", a.K2}, {"K3", a.K3}}},
        {"dimension", {{"n", dim.n}, {"bound", dim.bound}}},
        {"squeezing_check",
         {{"pairs", check.pairs},
          {"max_ratio_low", check.max_ratio_low},
          {"max_ratio_high", check.max_ratio_high},
          {"passed", check.passed}}},
    };
    writer.write("squeezing_report.json", report.dump(2) + "\n");
    const std::size_t stride = std::max<std::size_t>(1, rep.c_h_samples.size() / 4096);
    std::string series = "s,c_h\n";
    for (std::size_t k = 0; k < rep.c_h_samples.size(); k += stride)
        series += format_real(rep.c_h_times[k]) + "," + format_real(rep.c_h_samples[k]) + "\n";
    writer.write("c_h_samples.csv", series);

    RunManifest m = base_manifest("dimension", rc, o.seed);
    m.parameters = {{"t_erg", a.t_erg},          {"n_modes", a.n_modes},       {"K1", a.K1},
                    {"K2", a.K2},                {"K3", a.K3},                 {"t_horizon", a.t_horizon},
                    {"squeeze_pairs", a.squeeze_pairs}, {"squeeze_time", a.squeeze_time},
                    {"squeeze_pullback", a.squeeze_pullback}, {"constants", constants_json(constants)}};
    writer.finish(m, out);
    out << "E(C_H) = " << format_real(rep.e_c_h) << ", n = " << dim.n << ", dimension bound = "
        << format_real(dim.bound) << "\n";
    if (!check.passed)
        throw ViolationError("squeezing inequality violated: ratios " + format_real(check.max_ratio_low) + ", " +
                             format_real(check.max_ratio_high));
    return exit_ok;
}

struct StructureFlags {
    std::string input;
    std::optional<std::string> p_list;
    std::optional<int> n_lo;
    std::optional<int> n_hi;
    std::string component = "u";
    std::optional<double> homogeneity;
};

int cmd_structure(const CommonOptions& o, const StructureFlags& f, std::ostream& out, std::ostream& err) {
    RunConfig rc = load(o);
    if (f.p_list) rc.stats.p_list = parse_real_list(*f.p_list);
    if (f.n_lo) rc.stats.n_lo = *f.n_lo;
    if (f.n_hi) rc.stats.n_hi = *f.n_hi;
    print_warnings(rc, err);

    Trajectory traj = trajectory_from_csv(read_lines(f.input));
    traj.config.k0 = rc.model.k0;
    traj.config.lambda = rc.model.lambda;
    const Component comp = component_from_string(f.component);

    OutputWriter writer(o.out_dir);
    std::string table = "p,component,shell,log2_k,S_p\n";
    std::string zetas = "p,component,zeta,residual,n_lo,n_hi\n";
    for (double p : rc.stats.p_list) {
        const StructureTable s = structure_function(traj, p, comp);
        for (std::size_t i = 0; i < s.values.size(); ++i)
            table += format_real(p) + "," + f.component + "," + std::to_string(i + 1) + "," +
                     format_real(std::log2(wavenumber(static_cast<int>(i) + 1, s.k0))) + "," +
                     format_real(s.values[i]) + "\n";
        auto [lo, hi] = default_fit_range(s);
        if (rc.stats.n_lo > 0) lo = rc.stats.n_lo;
        if (rc.stats.n_hi > 0) hi = rc.stats.n_hi;
        const ZetaFit fit = fit_zeta(s, lo, hi);
        zetas += format_real(p) + "," + f.component + "," + format_real(fit.zeta) + "," + format_real(fit.residual) +
                 "," + std::to_string(lo) + "," + std::to_string(hi) + "\n";
        out << "p = " << format_real(p) << ": zeta = " << format_real(fit.zeta) << " (shells " << lo << ".." << hi
            << ", residual " << format_real(fit.residual) << ")\n";
    }
    writer.write("structure.csv", table);
    writer.write("zeta.csv", zetas);

    if (f.homogeneity) {
        const double c = *f.homogeneity;
        Trajectory scaled = traj;
        for (auto& x : scaled.states) x *= c;
        double worst = 0.0;
        for (double p : rc.stats.p_list) {
            const StructureTable a = structure_function(traj, p, comp);
            const StructureTable b = structure_function(scaled, p, comp);
            for (std::size_t i = 0; i < a.values.size(); ++i) {
                const double expect = std::pow(std::abs(c), p) * a.values[i];
                if (expect != 0.0) worst = std::max(worst, std::abs(b.values[i] - expect) / expect);
                else worst = std::max(worst, std::abs(b.values[i]));
            }
        }
        out << "homogeneity: max relative defect " << format_real(worst) << "\n";
        if (worst > 1e-12) throw ViolationError("structure-function homogeneity violated");
    }

    RunManifest m = base_manifest("structure", rc, o.seed);
    m.parameters = {{"input", f.input}, {"p_list", rc.stats.p_list}, {"component", f.component},
                    {"n_lo", rc.stats.n_lo}, {"n_hi", rc.stats.n_hi}};
    writer.finish(m, out);
    return exit_ok;
}

constexpr const char* footer = R"(Outputs (all reals printed with %.17g):
  trajectory.csv      t,shell,re,im,component        component is u or w
  semicontinuity.csv  lambda,d_forward,d_backward,cloud_resolution
  cloud_K.csv         member,component,re_1,im_1,...,re_N,im_N
  c_h_samples.csv     s,c_h
  structure.csv       p,component,shell,log2_k,S_p
  zeta.csv            p,component,zeta,residual,n_lo,n_hi
  manifest.json       config, seed, scheme, tool version and SHA-256 of every output
Exit codes: 0 ok, 2 usage/config/IO, 3 numerical blow-up, 4 invariant violation.
SHELLFLOW_THREADS caps the number of worker threads.)";

}  // namespace

std::vector<InvariantResult> run_invariant_suite(const RunConfig& rc) {
    std::vector<InvariantResult> results;
    std::mt19937_64 rng(12345);
    const double k0 = rc.model.k0;
    const BilinearKind goy{ModelKind::goy, 0.0, false};
    const BilinearKind sabra{ModelKind::sabra, rc.model.delta, rc.tamper_sabra_conjugation};
    results.push_back(check_energy("goy energy annihilation", goy, k0, rng));
    results.push_back(check_energy("sabra energy annihilation", sabra, k0, rng));
    results.push_back(check_skew("goy skew pairing", goy, k0, rng));
    results.push_back(check_skew("sabra skew pairing", sabra, k0, rng));

    {
        const BilinearKind kind = BilinearKind::from(rc.model);
        double worst = 0.0;
        for (std::size_t t = 0; t < 50; ++t) {
            const ShellState u = random_state(suite_shells, rng);
            const ShellState u2 = random_state(suite_shells, rng);
            const ShellState v = random_state(suite_shells, rng);
            const double a = 0.7;
            const double b = -1.3;
            const ShellState lhs = apply_b(kind, a * u + b * u2, v, k0);
            const ShellState rhs = a * apply_b(kind, u, v, k0) + b * apply_b(kind, u2, v, k0);
            worst = std::max(worst, norm_h(lhs - rhs) / norm_h(rhs));
        }
        results.push_back({"bilinearity", worst <= 1e-12, "max relative defect " + format_real(worst)});
    }
    {
        const BilinearKind kind{rc.model.model, rc.model.delta, rc.tamper_sabra_conjugation};
        double worst = 0.0;
        for (std::size_t t = 0; t < 50; ++t) {
            const CoupledState x(random_state(suite_shells, rng), random_state(suite_shells, rng));
            const CoupledState y(random_state(suite_shells, rng), random_state(suite_shells, rng));
            const double scale = norm_v(x, k0) * norm_h(y) * norm_h(y);
            worst = std::max(worst, std::abs(inner_h(coupled_b_lambda(x, y, 0.7, kind, k0), y)) / scale);
        }
        results.push_back({"coupled energy annihilation", worst <= 1e-12, "max defect " + format_real(worst)});
    }

    const std::vector<Complex> sigma = suite_sigma(rc.model);
    {
        const NoisePath a = sample_path(99, 0.01, -1.0, 1.0, sigma);
        const NoisePath b = sample_path(99, 0.01, -1.0, 1.0, sigma);
        bool same = true;
        for (int shell = 1; shell <= static_cast<int>(suite_shells); ++shell)
            for (std::int64_t j = -100; j < 100; ++j) same = same && a.increment(shell, j) == b.increment(shell, j);
        results.push_back({"noise determinism", same, "bitwise comparison of two draws"});
    }
    {
        const NoisePath p = sample_path(7, 0.01, -2.0, 2.0, sigma);
        const NoisePath composed = shift_theta(shift_theta(p, 0.3), -0.7);
        const NoisePath direct = shift_theta(p, -0.4);
        bool same = composed == direct;
        for (int shell = 1; shell <= 3; ++shell)
            for (std::int64_t j = -50; j < 50; ++j)
                same = same && composed.increment(shell, j) == direct.increment(shell, j);
        results.push_back({"theta shift composition", same, "theta_-0.7 theta_0.3 == theta_-0.4"});
    }
    {
        const std::vector<Complex> zero(suite_shells);
        const NoisePath p = sample_path(1, 0.01, 0.0, 1.0, zero);
        OUState s{ShellState::unit(suite_shells, 1), 0.5, 0.0};
        for (int j = 0; j < 50; ++j) s = ou_step(s, p, 0.01, rc.model.nu, k0);
        const double k = wavenumber(1, k0);
        const double expect = std::exp(-(rc.model.nu * k * k + 0.5) * 0.5);
        const double err = std::abs(s.z[0].real() - expect) / expect;
        results.push_back({"OU exact decay", err <= 1e-12, "relative error " + format_real(err)});
    }
    return results;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"shellflow: stochastic GOY/Sabra shell models with lambda coupling"};
    app.footer(footer);
    app.require_subcommand(1);

    CommonOptions common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config_path, "INI configuration file");
        sub->add_option("--seed", common.seed, "noise path seed");
        sub->add_option("--out", common.out_dir, "output directory");
    };

    auto* validate = app.add_subcommand("validate", "run the bilinear and noise invariant checks");
    validate->add_option("--config", common.config_path, "INI configuration file");

    SimulateFlags sim;
    auto* simulate = app.add_subcommand("simulate", "integrate one trajectory");
    add_common(simulate);
    simulate->add_option("--T", sim.t1, "final time");
    simulate->add_option("--dt", sim.dt, "time step");
    simulate->add_option("--lambda", sim.lambda, "coupling lambda");
    simulate->add_option("--scheme", sim.scheme, "ou_splitting | em");

    AttractorFlags att;
    auto* attractor = app.add_subcommand("attractor", "pullback clouds and upper semicontinuity in lambda");
    add_common(attractor);
    attractor->add_option("--lambdas", att.lambdas, "comma-separated lambda grid");
    attractor->add_option("--members", att.members, "points per cloud");
    attractor->add_option("--pullback-time", att.pullback_time, "pullback horizon");

    DimensionFlags dim;
    auto* dimension = app.add_subcommand("dimension", "squeezing constants and the dimension bound");
    add_common(dimension);
    dimension->add_option("--t-erg", dim.t_erg, "ergodic averaging window");
    dimension->add_option("--K1", dim.K1, "absolute constant K1");
    dimension->add_option("--K2", dim.K2, "absolute constant K2");
    dimension->add_option("--K3", dim.K3, "absolute constant K3");
    dimension->add_option("--n-modes", dim.n_modes, "projector rank for the squeezing check");

    StructureFlags st;
    auto* structure = app.add_subcommand("structure", "structure functions and scaling exponents");
    add_common(structure);
    structure->add_option("--input", st.input, "trajectory CSV")->required();
    structure->add_option("--p", st.p_list, "comma-separated moment orders");
    structure->add_option("--n-lo", st.n_lo, "first shell of the fit range");
    structure->add_option("--n-hi", st.n_hi, "last shell of the fit range");
    structure->add_option("--component", st.component, "u | w | q");
    structure->add_option("--homogeneity", st.homogeneity, "re-verify S_p(c x) = |c|^p S_p(x) for this c");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return exit_usage;
    }

    try {
        if (validate->parsed()) return cmd_validate(common, out, err);
        if (simulate->parsed()) return cmd_simulate(common, sim, out, err);
        if (attractor->parsed()) return cmd_attractor(common, att, out, err);
        if (dimension->parsed()) return cmd_dimension(common, dim, out, err);
        if (structure->parsed()) return cmd_structure(common, st, out, err);
    } catch (const BlowUpError& e) {
        err << "error: " << e.what() << "\n";
        return exit_blow_up;
    } catch (const MemberBlowUp& e) {
        err << "error: " << e.what() << "\n";
        return exit_blow_up;
    } catch (const ViolationError& e) {
        err << "error: " << e.what() << "\n";
        return exit_violation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_usage;
    }
    return exit_usage;
}

}  // namespace shellflow
