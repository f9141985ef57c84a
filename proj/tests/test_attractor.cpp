#include "shellflow/attractor.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>

using namespace shellflow;

namespace {

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

ModelConfig quiet_config(double lambda = 0.0) {
    ModelConfig cfg = desk_config(lambda);
    cfg.sigma.assign(16, Complex{});
    return cfg;
}

AttractorConstants fixed_constants(double cstar, double c_vh) {
    AttractorConstants c;
    c.cstar = cstar;
    c.c_vh = c_vh;
    return c;
}

PullbackCloud cloud_of(std::vector<CoupledState> pts) {
    PullbackCloud c;
    c.members = pts.size();
    c.points = std::move(pts);
    return c;
}

CoupledState random_point(std::mt19937_64& rng, std::size_t n = 4) {
    std::normal_distribution<double> normal;
    CoupledState x(n);
    for (std::size_t i = 0; i < n; ++i) {
        x.u[i] = Complex(normal(rng), normal(rng));
        x.w[i] = Complex(normal(rng), normal(rng));
    }
    return x;
}

constexpr double dt = 0x1.0p-8;

}  // namespace

TEST_CASE("forcing term") {
    ModelConfig cfg = quiet_config();
    cfg.n_shells = 4;
    CHECK(forcing_f(CoupledState(4), cfg, 1.0) == 0.0);
    const ShellState half = std::sqrt(0.5) * ShellState::unit(4, 1);
    const double f = forcing_f(CoupledState(half, half), cfg, 1.0);
    CHECK(f == doctest::Approx(4.0).epsilon(1e-15));
    cfg.alpha = 3.0;
    const ShellState big = 1e7 * ShellState::unit(4, 2);
    const double ratio = forcing_f(CoupledState(2.0 * big, 2.0 * big), cfg, 0.1) /
                         forcing_f(CoupledState(big, big), cfg, 0.1);
    CHECK(ratio == doctest::Approx(16.0).epsilon(1e-6));
}

TEST_CASE("coupled constants") {
    const AttractorConstants c = fixed_constants(0.2, 0.5);
    CHECK(c.coupled_cstar(0.0) == 0.2);
    CHECK(c.coupled_cstar(2.0) == doctest::Approx(1.0));
    CHECK(c.coupled_c_vh(2.0) == doctest::Approx(0.5 * std::sqrt(5.0)));
    const AttractorConstants est = AttractorConstants::estimate(desk_config(), 500, 3);
    CHECK(est.cstar > 0.0);
    CHECK(est.c_vh > 0.0);
    CHECK(AttractorConstants::estimate(desk_config(), 500, 3).cstar == est.cstar);
}

TEST_CASE("closed forms without noise") {
    const ModelConfig cfg = quiet_config(0.4);
    const AttractorConstants c = fixed_constants(0.3, 0.6);
    const double cs = c.coupled_cstar(0.4);
    const NoisePath path = sample_path(1, dt, -20.0, 10.0, cfg.sigma);
    const AbsorbingRadii r = absorbing_radii(path, cfg, c, 20.0);
    for (double v : r.r1_values) CHECK(v == 1.0);
    CHECK(r.r1_tail == 0.0);
    const double r2 = 1.0 / cfg.nu + cfg.k0 * cfg.nu / 2.0;
    CHECK(std::abs(r.r2 - r2) <= 1e-12 * r2);
    CHECK(std::abs(r.r3 - r2 * std::exp(2.0 * cs * cs)) <= 1e-12 * r.r3);
    CHECK(r.cstar_used == cs);

    const SqueezingReport rep = squeezing_constants(path, cfg, c, 10.0, 4, 20.0);
    for (double s : rep.c_h_samples) CHECK(std::abs(s - (1.0 + cs / cfg.nu)) <= 1e-12);
    CHECK(std::abs(rep.e_c_h - (1.0 + cs / cfg.nu)) <= 1e-12);
    CHECK(rep.c2_tilde == 1.0);
    CHECK(rep.dim_bound > 0.0);
}

TEST_CASE("absorbing radii with noise") {
    ModelConfig cfg = desk_config(0.3);
    const AttractorConstants c = fixed_constants(0.116, 0.384);
    cfg.alpha = alpha_zero(cfg, c);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const NoisePath path = sample_path(seed, dt, -60.0, 0.0, cfg.sigma);
        const AbsorbingRadii r = absorbing_radii(path, cfg, c, 60.0);
        for (double v : r.r1_values) {
            CHECK(std::isfinite(v));
            CHECK(v >= 1.0);
        }
        CHECK(r.r2 >= r.r1_values.front() / cfg.nu);
        CHECK(r.r3 >= r.r2);
        CHECK(r.alpha_used == cfg.alpha);
    }
}

TEST_CASE("R1 tail estimate bounds the truncation change") {
    ModelConfig cfg = desk_config();
    const AttractorConstants c = fixed_constants(0.116, 0.384);
    cfg.alpha = alpha_zero(cfg, c);
    for (std::uint64_t seed : {4u, 5u, 6u}) {
        const NoisePath path = sample_path(seed, dt, -40.0, 0.0, cfg.sigma);
        const R1Result shallow = radius_r1(path, cfg, c, 0.0, 3.0);
        const R1Result deep = radius_r1(path, cfg, c, 0.0, 6.0);
        CHECK(shallow.tail_estimate > 0.0);
        CHECK(std::abs(deep.value - shallow.value) <= shallow.tail_estimate + 1e-14);
    }
}

TEST_CASE("R1 grows with the noise amplitude") {
    ModelConfig cfg = desk_config();
    ModelConfig loud = cfg;
    for (auto& s : loud.sigma) s *= 2.0;
    const AttractorConstants c = fixed_constants(0.116, 0.384);
    cfg.alpha = loud.alpha = alpha_zero(loud, c);
    const NoisePath quiet_path = sample_path(7, dt, -50.0, 0.0, cfg.sigma);
    const NoisePath loud_path = sample_path(7, dt, -50.0, 0.0, loud.sigma);
    for (double t : {-1.0, -0.5, 0.0})
        CHECK(radius_r1(loud_path, loud, c, t, 50.0).value >= radius_r1(quiet_path, cfg, c, t, 50.0).value);
}

TEST_CASE("persistently positive exponent is an error") {
    ModelConfig cfg = desk_config();
    for (auto& s : cfg.sigma) s *= 40.0;
    cfg.alpha = 0.0;
    const NoisePath path = sample_path(8, dt, -50.0, 0.0, cfg.sigma);
    CHECK_THROWS_AS(radius_r1(path, cfg, fixed_constants(1.0, 1.0), 0.0, 50.0), std::domain_error);
}

TEST_CASE("V-norm of the flow part") {
    const ShellState z = ShellState::unit(4, 1);
    const CoupledState u(2.0 * z, z);
    CHECK(v_norm_sq(u, z, 1.0) == doctest::Approx(4.0));
}

TEST_CASE("ball sampling") {
    const auto a = sample_ball(8, 50, 2.5, 9);
    const auto b = sample_ball(8, 50, 2.5, 9);
    CHECK(a == b);
    for (const auto& x : a) CHECK(norm_h(x) <= 2.5);
    CHECK(sample_ball(8, 50, 2.5, 10) != a);
}

TEST_CASE("Hausdorff semi-distance") {
    const CoupledState zero(4);
    const CoupledState e1(ShellState::unit(4, 1), ShellState(4));
    CHECK(hausdorff_semidistance(cloud_of({zero, e1}), cloud_of({zero})) == 1.0);
    CHECK(hausdorff_semidistance(cloud_of({zero}), cloud_of({zero, e1})) == 0.0);
    CHECK_THROWS_AS(hausdorff_semidistance(cloud_of({}), cloud_of({zero})), std::invalid_argument);

    std::mt19937_64 rng(10);
    const CoupledState x = random_point(rng);
    const CoupledState y = random_point(rng);
    CHECK(hausdorff_semidistance(cloud_of({x}), cloud_of({y})) == norm_h(x - y));

    for (int t = 0; t < 20; ++t) {
        std::vector<CoupledState> pa, pb, pc;
        for (int i = 0; i < 6; ++i) {
            pa.push_back(random_point(rng));
            pb.push_back(random_point(rng));
            pc.push_back(random_point(rng));
        }
        const auto a = cloud_of(pa), b = cloud_of(pb), c = cloud_of(pc);
        CHECK(hausdorff_semidistance(a, a) == 0.0);
        std::vector<CoupledState> sub(pb.begin(), pb.begin() + 3);
        CHECK(hausdorff_semidistance(cloud_of(sub), b) == 0.0);
        CHECK(hausdorff_semidistance(a, c) <= hausdorff_semidistance(a, b) + hausdorff_semidistance(b, c) + 1e-15);
        std::vector<CoupledState> shuffled = pb;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        CHECK(hausdorff_semidistance(a, cloud_of(shuffled)) == hausdorff_semidistance(a, b));
        CHECK(hausdorff_semidistance(cloud_of(shuffled), a) == hausdorff_semidistance(b, a));
    }
}

TEST_CASE("pullback clouds") {
    SolverSettings s;
    s.dt = dt;
    SUBCASE("decay without noise") {
        const ModelConfig cfg = quiet_config();
        const double t_pb = 2.0;
        const NoisePath path = sample_path(11, dt, -t_pb, 0.0, cfg.sigma);
        const auto initial = sample_ball(16, 8, 1e-3, 11);
        const PullbackCloud cloud = pullback_cloud(path, cfg, initial, t_pb, s);
        const double k1 = wavenumber(1, cfg.k0);
        const double bound = std::exp(-cfg.nu * k1 * k1 * t_pb * (1.0 - 1e-3)) * cloud_diameter(cloud_of(initial));
        CHECK(cloud_diameter(cloud) <= bound);
        CHECK(cloud.members == 8);
        CHECK(cloud.pullback_time == t_pb);
    }
    SUBCASE("singleton") {
        const PullbackCloud one = pullback_cloud(12, 0.2, desk_config(), 1, 4.0, 1.0, s);
        CHECK(one.points.size() == 1);
        CHECK(cloud_diameter(one) == 0.0);
        CHECK(cloud_resolution(one) == 0.0);
        CHECK(one.lambda == 0.2);
    }
    SUBCASE("contraction under longer pullback") {
        const ModelConfig cfg = desk_config(0.1);
        double last = 1e300;
        for (double t_pb : {1.0, 2.0, 4.0}) {
            const double d = cloud_diameter(pullback_cloud(13, 0.1, cfg, 8, t_pb, 2.0, s));
            CHECK(d <= last + 1e-8);
            last = d;
        }
    }
    SUBCASE("member blow-up names the member") {
        const ModelConfig cfg = quiet_config();
        const NoisePath path = sample_path(14, 0.125, -4.0, 0.0, cfg.sigma);
        std::vector<CoupledState> initial(3, CoupledState(16));
        for (std::size_t i = 0; i < 16; ++i) initial[2].u[i] = Complex(1e160, 1e160);
        SolverSettings coarse;
        coarse.dt = 0.125;
        try {
            pullback_cloud(path, cfg, initial, 4.0, coarse);
            FAIL("expected a blow-up");
        } catch (const MemberBlowUp& e) {
            CHECK(e.member() == 2);
        }
    }
}

TEST_CASE("cloud results do not depend on the worker count") {
    SolverSettings s;
    s.dt = dt;
    const ModelConfig cfg = desk_config(0.3);
    setenv("SHELLFLOW_THREADS", "1", 1);
    const PullbackCloud serial = pullback_cloud(15, 0.3, cfg, 6, 2.0, 1.0, s);
    setenv("SHELLFLOW_THREADS", "4", 1);
    const PullbackCloud threaded = pullback_cloud(15, 0.3, cfg, 6, 2.0, 1.0, s);
    unsetenv("SHELLFLOW_THREADS");
    CHECK(serial.points == threaded.points);
}

TEST_CASE("pullback cloud is carried onto the cloud of the shifted path") {
    SolverSettings s;
    s.dt = dt;
    ModelConfig cfg = desk_config(0.2);
    const double t_pb = 20.0;
    const NoisePath path = sample_path(16, dt, -t_pb - 1.0, 1.0, cfg.sigma);
    const auto initial = sample_ball(16, 6, 1.0, 16);
    const PullbackCloud now = pullback_cloud(path, cfg, initial, t_pb, s);

    SolverSettings fwd = s;
    fwd.t0 = 0.0;
    fwd.t1 = 1.0;
    fwd.z_start = OUStart::pathwise;
    fwd.store_every = 1u << 20;
    PullbackCloud carried = now;
    for (auto& x : carried.points) x = solve_flow(x, path, fwd, cfg).final_state();

    const PullbackCloud later = pullback_cloud(shift_theta(path, 1.0), cfg, initial, t_pb, s);
    const double tol = std::max(cloud_resolution(later), 1e-10);
    CHECK(hausdorff_semidistance(carried, later) <= tol);
    CHECK(hausdorff_semidistance(later, carried) <= tol);
}

TEST_CASE("semicontinuity curve on a single-lambda grid") {
    SolverSettings s;
    s.dt = dt;
    const ModelConfig cfg = desk_config();
    const NoisePath path = sample_path(17, dt, -2.0, 0.0, cfg.sigma);
    const auto res = upper_semicontinuity_curve(path, {0.0}, 0.0, cfg, sample_ball(16, 4, 1.0, 17), 2.0, s);
    REQUIRE(res.rows.size() == 1);
    CHECK(res.rows[0].d_forward == 0.0);
    CHECK(res.rows[0].d_backward == 0.0);
    CHECK(res.clouds.size() == 1);
}

TEST_CASE("dimension bound") {
    const DimensionBound hand = dimension_bound(1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0);
    CHECK(hand.n == 1);
    CHECK(hand.bound == doctest::Approx(std::log(2.0)));
    std::size_t last = 0;
    for (double e : {1.0, 10.0, 100.0, 1e4, 1e8}) {
        const std::size_t n = dimension_bound(e, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0).n;
        CHECK(n >= last);
        last = n;
    }
    CHECK(last > 20);
    for (double e : {3.0, 50.0, 1e3})
        CHECK(dimension_bound(e, 2.0, 2.0, 0.5, 1.0, 1.0, 1.0).n <= dimension_bound(e, 2.0, 1.0, 0.5, 1.0, 1.0, 1.0).n);
    const DimensionBound big = dimension_bound(1e4, 1.0, 1.0, 1.0, 1.0, 1.0, 2.0);
    const double nn = static_cast<double>(big.n);
    CHECK(big.bound == doctest::Approx(2.0 * nn * std::log(nn)));
}

TEST_CASE("squeezing rates are monotone in the mode count") {
    const ModelConfig cfg = quiet_config();
    const NoisePath path = sample_path(18, dt, -5.0, 1.0, cfg.sigma);
    const AttractorConstants c = fixed_constants(0.1, 0.4);
    double mu = 0.0, delta = 1e300;
    for (std::size_t n = 1; n <= 8; ++n) {
        const SqueezingReport r = squeezing_constants(path, cfg, c, 1.0, n, 5.0);
        CHECK(r.mu > mu);
        CHECK(r.delta_sq < delta);
        mu = r.mu;
        delta = r.delta_sq;
    }
}

TEST_CASE("squeezing inequalities") {
    SolverSettings s;
    s.dt = dt;
    const AttractorConstants c = fixed_constants(0.116, 0.384);
    SUBCASE("identical pair") {
        ModelConfig cfg = desk_config();
        cfg.alpha = alpha_zero(cfg, c);
        const NoisePath path = sample_path(19, dt, -20.0, 2.0, cfg.sigma);
        const auto pts = sample_ball(16, 2, 0.5, 19);
        const SqueezingCheck chk = verify_squeezing(path, cfg, c, {{pts[0], pts[0]}}, 6, 2.0, s, 20.0);
        CHECK(chk.max_ratio_low == 0.0);
        CHECK(chk.max_ratio_high == 0.0);
        CHECK(chk.passed);
    }
    SUBCASE("offset in a single high shell stays out of the projection") {
        const ModelConfig cfg = quiet_config();
        const NoisePath path = sample_path(20, dt, -20.0, 2.0, cfg.sigma);
        const CoupledState zero(16);
        const CoupledState high(1e-3 * ShellState::unit(16, 10), ShellState(16));
        const SqueezingCheck chk = verify_squeezing(path, cfg, c, {{zero, high}}, 6, 2.0, s, 20.0);
        CHECK(chk.max_ratio_low == 0.0);
        CHECK(chk.passed);
    }
    SUBCASE("random attractor pairs") {
        ModelConfig cfg = desk_config(0.3);
        cfg.alpha = alpha_zero(cfg, c);
        const NoisePath path = sample_path(21, dt, -40.0, 2.0, cfg.sigma);
        const PullbackCloud cloud = pullback_cloud(path, cfg, sample_ball(16, 6, 1.0, 21), 2.0, s);
        std::vector<std::pair<CoupledState, CoupledState>> pairs;
        for (std::size_t i = 0; i + 1 < cloud.points.size(); i += 2)
            pairs.emplace_back(cloud.points[i], cloud.points[i + 1]);
        const SqueezingCheck chk = verify_squeezing(path, cfg, c, pairs, 6, 2.0, s, 40.0);
        CHECK(chk.pairs == pairs.size());
        CHECK(chk.max_ratio_low <= 1.0 + 1e-6);
        CHECK(chk.max_ratio_high <= 1.0 + 1e-6);
        CHECK(chk.passed);
    }
}
