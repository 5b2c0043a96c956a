#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "blm/bc.hpp"
#include "blm/mesh.hpp"
#include "blm/verify.hpp"

using namespace blm;

TEST_CASE("monotonicity: identical fields give zero on both sides") {
    const Mesh mesh = unit_square_mesh(3);
    ModelParams params = ModelParams::from_reynolds(400.0, 10.0, MixingSpec::l1());
    const MixingField mixing = fill_mixing(mesh, params);

    const auto& qb = QuadBasis::get();
    const Field u = interpolate_velocity(mesh, [](double x, double y) {
        return Vec2{x * y, x - y * y};
    });
    double lhs = 0.0, rhs = 0.0;
    const auto scales = quad_scales(mesh);
    for (int t = 0; t < mesh.n_triangles(); ++t)
        for (int q = 0; q < qb.rule.size(); ++q) {
            const std::size_t k = static_cast<std::size_t>(t) * qb.rule.size() + q;
            const double cu = curl2d(mesh, u, t, qb.rule.xi[q], qb.rule.eta[q]);
            lhs += scales[k] * mixing.l2_qp[k] * (std::abs(cu) * cu - std::abs(cu) * cu) * 0.0;
            rhs += scales[k] * mixing.l2_qp[k] * 0.0;
        }
    CHECK(lhs == 0.0);
    CHECK(rhs == 0.0);
}

TEST_CASE("monotonicity: opposite constant curls sit at the sharp constant") {
    // curl(u) = 1 and curl(u') = -1 everywhere: the pointwise ratio
    // (|a|a - |b|b)(a - b) / |a - b|^3 equals exactly 1/2.
    const Mesh mesh = unit_square_mesh(3);
    ModelParams params;
    params.mixing = MixingSpec::constant(0.3);
    const MixingField mixing = fill_mixing(mesh, params);

    const Field u =
        interpolate_velocity(mesh, [](double x, double y) { return Vec2{-0.5 * y, 0.5 * x}; });
    Field v = u;
    for (double& c : v.coef) c = -c;

    const auto& qb = QuadBasis::get();
    const auto scales = quad_scales(mesh);
    double lhs = 0.0, rhs = 0.0;
    for (int t = 0; t < mesh.n_triangles(); ++t)
        for (int q = 0; q < qb.rule.size(); ++q) {
            const std::size_t k = static_cast<std::size_t>(t) * qb.rule.size() + q;
            const double a = curl2d(mesh, u, t, qb.rule.xi[q], qb.rule.eta[q]);
            const double b = curl2d(mesh, v, t, qb.rule.xi[q], qb.rule.eta[q]);
            lhs += scales[k] * mixing.l2_qp[k] * (std::abs(a) * a - std::abs(b) * b) * (a - b);
            rhs += scales[k] * mixing.l2_qp[k] * std::pow(std::abs(a - b), 3.0);
        }
    CHECK(lhs == Catch::Approx(0.5 * rhs).epsilon(1e-12));
    CHECK(lhs == Catch::Approx(4.0 * 0.09).epsilon(1e-12));  // 4 l^2 |Omega|
}

TEST_CASE("monotonicity holds for seeded random pairs") {
    const Mesh mesh = generate_channel_mesh(Geometry::channel_with_obstacle(), 0.45, 2.0);
    ModelParams params = ModelParams::from_reynolds(400.0, 10.0, MixingSpec::l1());
    const MixingField mixing = fill_mixing(mesh, params);
    const MonotonicityReport rep = check_monotonicity(mesh, mixing, 200, 777);
    CHECK(rep.ok());
    CHECK(rep.violations == 0);
    CHECK(rep.min_ratio >= 0.5 - 1e-6);
    CHECK(rep.trials == 200);
    CHECK_THROWS_AS(check_monotonicity(mesh, mixing, 0, 1), Error);
}

TEST_CASE("energy audit: zero flow has zero residual") {
    const Mesh mesh = unit_square_mesh(3);
    ModelParams params = ModelParams::from_reynolds(100.0, 10.0, MixingSpec::l1());
    SolverConfig cfg;
    cfg.dt = 0.05;
    cfg.t_end = 0.25;
    const RunResult r = run(mesh, params, cfg, homogeneous_bc(mesh));
    for (const auto& rec : r.audit) {
        CHECK(rec.residual == 0.0);
        CHECK(rec.ke == 0.0);
    }
    CHECK(max_relative_audit_residual(r.audit) == 0.0);
}

TEST_CASE("energy audit residual tracks the nonlinear tolerance") {
    const Mesh mesh = unit_square_mesh(6);
    ModelParams params = ModelParams::from_reynolds(200.0, 10.0, MixingSpec::l1());
    const std::vector<double> load = assemble_load(
        mesh, [](double x, double y) { return Vec2{std::sin(3 * y) + 1.0, std::cos(2 * x)}; });

    const auto residual_at = [&](double tol) {
        SolverConfig cfg;
        cfg.dt = 0.01;
        cfg.t_end = 0.5;
        cfg.picard_tol = tol;
        const RunResult r =
            run(mesh, params, cfg, homogeneous_bc(mesh), [load](double) { return load; });
        return max_relative_audit_residual(r.audit);
    };

    const double loose = residual_at(1e-6);
    const double tight = residual_at(1e-9);
    CHECK(loose <= 1e-4);   // bounded linearly by the tolerance
    CHECK(tight <= 1e-7);
    CHECK(tight <= loose);
}

TEST_CASE("energy audit on the boundary-driven benchmark reports inflow work") {
    const Mesh mesh = generate_channel_mesh(Geometry::channel_with_obstacle(), 0.45, 2.0);
    ModelParams params = ModelParams::from_reynolds(100.0, 10.0, MixingSpec::l1());
    SolverConfig cfg;
    cfg.dt = 0.02;
    cfg.t_end = 0.2;
    const RunResult r = run(mesh, params, cfg, benchmark_bc(mesh));
    bool some_power = false;
    for (const auto& rec : r.audit)
        if (std::abs(rec.power_in) > 1e-6) some_power = true;
    CHECK(some_power);
    // the balance includes the boundary reaction work, so it closes here too
    CHECK(max_relative_audit_residual(r.audit) <= 1e-7);
}

TEST_CASE("stokes convergence study reaches the expected orders") {
    const ConvergenceStudy study = stokes_convergence_study(3);
    CAPTURE(study.velocity_error, study.pressure_error);
    CHECK(study.velocity_slope >= 2.7);
    CHECK(study.pressure_slope >= 1.7);
    // errors decrease monotonically
    for (std::size_t i = 1; i < study.velocity_error.size(); ++i) {
        CHECK(study.velocity_error[i] < study.velocity_error[i - 1]);
        CHECK(study.pressure_error[i] < study.pressure_error[i - 1]);
    }
}

TEST_CASE("convergence orders are stable across structured and graded meshes") {
    // slopes over the last three of four levels, past the pre-asymptotic range
    const auto tail_slopes = [](const ConvergenceStudy& s) {
        const std::vector<double> h(s.h.begin() + 1, s.h.end());
        const std::vector<double> ev(s.velocity_error.begin() + 1, s.velocity_error.end());
        const std::vector<double> ep(s.pressure_error.begin() + 1, s.pressure_error.end());
        return std::pair{detail::ls_slope(h, ev), detail::ls_slope(h, ep)};
    };
    const auto [sv, sp] = tail_slopes(stokes_convergence_study(4, false));
    const auto [gv, gp] = tail_slopes(stokes_convergence_study(4, true));
    CAPTURE(sv, sp, gv, gp);
    CHECK(std::abs(sv - gv) <= 0.2);
    CHECK(std::abs(sp - gp) <= 0.2);
    CHECK(gv >= 2.7);
    CHECK(gp >= 1.7);
}

TEST_CASE("temporal order: halving dt divides the error by about four") {
    const TemporalStudy linear = temporal_order_study(0.1, 2.0, false);
    CAPTURE(linear.error_coarse, linear.error_fine);
    CHECK(linear.ratio >= 3.6);
    CHECK(linear.ratio <= 4.4);

    const TemporalStudy nonlinear = temporal_order_study(0.1, 2.0, true);
    CAPTURE(nonlinear.error_coarse, nonlinear.error_fine);
    CHECK(nonlinear.ratio >= 3.4);
}
