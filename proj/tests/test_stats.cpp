#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "blm/bc.hpp"
#include "blm/mesh.hpp"
#include "blm/stats.hpp"
#include "blm/stepper.hpp"

using namespace blm;

namespace {

MixingField mixing_for(const Mesh& mesh, ModelParams& params) { return fill_mixing(mesh, params); }

DissipationSeries series_from(const std::vector<std::pair<double, double>>& t_eps) {
    DissipationSeries s;
    for (const auto& [t, eps] : t_eps) {
        DissipationSample smp;
        smp.t = t;
        smp.eps0 = eps;
        smp.epsM = 0.0;
        s.samples.push_back(smp);
    }
    return s;
}

}  // namespace

TEST_CASE("dissipation rates on canonical fields") {
    const Mesh mesh = unit_square_mesh(3);
    ModelParams params;
    params.nu = 0.01;
    params.beta = 10.0;
    params.mixing = MixingSpec::constant(0.1);
    const MixingField mixing = mixing_for(mesh, params);

    const Field zero = Field::velocity(mesh);
    const auto [z0, zm] = dissipation_rates(mesh, zero, params, mixing);
    CHECK(z0 == 0.0);
    CHECK(zm == 0.0);

    // u = (y,0): |grad u|^2 = 1, |curl u| = 1
    const Field shear = interpolate_velocity(mesh, [](double, double y) { return Vec2{y, 0.0}; });
    const auto [s0, sm] = dissipation_rates(mesh, shear, params, mixing);
    CHECK(s0 == Catch::Approx(0.01).epsilon(1e-12));
    CHECK(sm == Catch::Approx(0.01).epsilon(1e-12));

    // u = (-y,x): |grad u|^2 = 2, |curl u|^3 = 8
    const Field rot = interpolate_velocity(mesh, [](double x, double y) { return Vec2{-y, x}; });
    const auto [r0, rm] = dissipation_rates(mesh, rot, params, mixing);
    CHECK(r0 == Catch::Approx(0.02).epsilon(1e-12));
    CHECK(rm == Catch::Approx(0.08).epsilon(1e-12));
}

TEST_CASE("kinetic energies") {
    const Mesh mesh = unit_square_mesh(3);
    ModelParams params;
    params.nu = 0.01;
    params.beta = 10.0;
    params.mixing = MixingSpec::constant(0.1);
    const MixingField mixing = mixing_for(mesh, params);

    const Field shear = interpolate_velocity(mesh, [](double, double y) { return Vec2{y, 0.0}; });
    // ke = (int y^2 + 100 * 0.01 * int 1) / 2 = (1/3 + 1)/2
    CHECK(kinetic_energy(mesh, shear, params, mixing) == Catch::Approx(2.0 / 3.0).epsilon(1e-12));

    const auto [ke, mke] = kinetic_energies(mesh, shear, shear, 0.01, params, mixing);
    CHECK(ke == Catch::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(mke == 0.0);  // steady state

    ModelParams nobeta = params;
    nobeta.beta = 0.0;
    CHECK(kinetic_energy(mesh, shear, nobeta, mixing) ==
          Catch::Approx(0.5 / 3.0).epsilon(1e-12));

    CHECK_THROWS_AS(kinetic_energies(mesh, shear, shear, 0.0, params, mixing), Error);
    CHECK_THROWS_AS(kinetic_energies(mesh, shear, shear, -1.0, params, mixing), Error);
}

TEST_CASE("time averaging") {
    SECTION("constant series") {
        const auto s = series_from({{0, 3.5}, {1, 3.5}, {2, 3.5}, {3, 3.5}});
        CHECK(time_average(s, 0.0) == Catch::Approx(3.5).epsilon(1e-15));
    }
    SECTION("linear series averages to the midpoint value") {
        const auto s = series_from({{0, 1.0}, {0.5, 2.0}, {1.0, 3.0}, {1.5, 4.0}, {2.0, 5.0}});
        CHECK(time_average(s, 0.0) == Catch::Approx(3.0).epsilon(1e-14));
    }
    SECTION("burn-in selects the tail window") {
        // constant c1 before t = 1, constant c2 from t = 1 on
        const auto s = series_from({{0, 7.0}, {0.5, 7.0}, {1.0, 2.0}, {1.5, 2.0}, {2.0, 2.0}});
        CHECK(time_average(s, 0.5) == Catch::Approx(2.0).epsilon(1e-14));
    }
    SECTION("windows too small are rejected") {
        const auto one = series_from({{0, 1.0}});
        CHECK_THROWS_AS(time_average(one, 0.0), Error);
        const auto two = series_from({{0, 1.0}, {1, 2.0}});
        CHECK_THROWS_AS(time_average(two, 0.9), Error);
    }
    SECTION("trapezoid additivity over concatenated windows") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> unif(0.0, 2.0);
        std::vector<std::pair<double, double>> pts;
        for (int i = 0; i <= 10; ++i) pts.emplace_back(0.25 * i, unif(rng));
        const auto whole = series_from(pts);
        const auto left = series_from({pts.begin(), pts.begin() + 5});
        const auto right = series_from({pts.begin() + 4, pts.end()});
        const double t0 = pts.front().first, tm = pts[4].first, t1 = pts.back().first;
        const double combined =
            (time_average(left, 0.0) * (tm - t0) + time_average(right, 0.0) * (t1 - tm)) /
            (t1 - t0);
        CHECK(time_average(whole, 0.0) == Catch::Approx(combined).epsilon(1e-13));
    }
}

TEST_CASE("flow scales") {
    const Mesh mesh = unit_square_mesh(4);

    SECTION("boundary-driven case: F = 0 degenerates L to the reference length") {
        DissipationSeries s;
        for (int i = 0; i <= 4; ++i) {
            DissipationSample smp;
            smp.t = i * 0.5;
            smp.u_sq = 1.0;  // ||u||^2 = |Omega|
            s.samples.push_back(smp);
        }
        const Scales sc = compute_scales(mesh, nullptr, s, 0.01);
        CHECK(sc.F == 0.0);
        CHECK(sc.degenerate_L);
        CHECK(sc.L == 1.0);
        CHECK(sc.U == Catch::Approx(1.0).epsilon(1e-14));
        CHECK(sc.Re == Catch::Approx(100.0).epsilon(1e-12));
        CHECK(sc.l_area_sqrt == Catch::Approx(1.0).epsilon(1e-14));
    }

    SECTION("polynomial body force against exact integrals") {
        // f = (x^2, xy): ||f||^2 = 14/45, ||grad f||^2 = 2, ||curl f||_L3^3 = 1/4
        const Field f =
            interpolate_velocity(mesh, [](double x, double y) { return Vec2{x * x, x * y}; });
        DissipationSeries s;
        for (int i = 0; i <= 2; ++i) {
            DissipationSample smp;
            smp.t = i;
            smp.u_sq = 4.0;
            s.samples.push_back(smp);
        }
        const Scales sc = compute_scales(mesh, &f, s, 0.5);
        const double F = std::sqrt(14.0 / 45.0);
        CHECK(sc.F == Catch::Approx(F).epsilon(1e-10));
        const double L_expected = std::min({1.0, F / std::sqrt(2.0), F / std::cbrt(0.25)});
        CHECK(sc.L == Catch::Approx(L_expected).epsilon(1e-10));
        CHECK(sc.U == Catch::Approx(2.0).epsilon(1e-12));
        CHECK_FALSE(sc.degenerate_L);
        CHECK(sc.Re == Catch::Approx(sc.U * sc.L / 0.5).epsilon(1e-12));
    }
}

TEST_CASE("dissipation fit") {
    SECTION("exact recovery of 1 + 5/Re") {
        std::vector<std::pair<double, double>> pts;
        for (double re : {100.0, 500.0, 1000.0, 2000.0}) pts.emplace_back(re, 1.0 + 5.0 / re);
        const FitResult fit = fit_dissipation(pts, 0.5, 5.0);
        CHECK(fit.a == Catch::Approx(1.0).epsilon(1e-12));
        CHECK(fit.b == Catch::Approx(5.0).epsilon(1e-12));
        CHECK(fit.rms_residual <= 1e-13);
        CHECK(fit.points_used == 4);
    }
    SECTION("two points interpolate exactly") {
        const FitResult fit = fit_dissipation({{100.0, 2.0}, {400.0, 1.25}});
        CHECK(2.0 == Catch::Approx(fit.a + fit.b / 100.0).epsilon(1e-12));
        CHECK(1.25 == Catch::Approx(fit.a + fit.b / 400.0).epsilon(1e-12));
        CHECK(fit.rms_residual <= 1e-13);
    }
    SECTION("perturbed points match the explicit normal-equations oracle") {
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> unif(-0.05, 0.05);
        std::vector<std::pair<double, double>> pts;
        for (double re : {100.0, 300.0, 700.0, 1200.0, 2000.0})
            pts.emplace_back(re, 0.8 + 4.0 / re + unif(rng));
        const FitResult fit = fit_dissipation(pts);
        // explicit 2x2 inverse of the normal equations
        double n = 0, sx = 0, sxx = 0, sy = 0, sxy = 0;
        for (const auto& [re, eps] : pts) {
            const double x = 1.0 / re;
            n += 1;
            sx += x;
            sxx += x * x;
            sy += eps;
            sxy += x * eps;
        }
        const double det = n * sxx - sx * sx;
        CHECK(fit.a == Catch::Approx((sxx * sy - sx * sxy) / det).margin(1e-12));
        CHECK(fit.b == Catch::Approx((n * sxy - sx * sy) / det).margin(1e-12));
    }
    SECTION("fit is invariant under point reordering") {
        std::vector<std::pair<double, double>> pts{
            {100, 1.1}, {500, 0.9}, {1500, 0.85}, {900, 0.88}};
        const FitResult f1 = fit_dissipation(pts);
        std::reverse(pts.begin(), pts.end());
        const FitResult f2 = fit_dissipation(pts);
        CHECK(f1.a == Catch::Approx(f2.a).epsilon(1e-13));
        CHECK(f1.b == Catch::Approx(f2.b).epsilon(1e-13));
    }
    SECTION("degenerate designs are rejected") {
        CHECK_THROWS_AS(fit_dissipation({{100.0, 1.0}}), Error);
        CHECK_THROWS_AS(fit_dissipation({{100.0, 1.0}, {100.0, 2.0}}), Error);
    }
}

TEST_CASE("dissipation bound diagnostic") {
    const BoundDiagnostic d = theorem_bound(1.0, 1.0, 1.0, 1.0, 1.0);
    CHECK(d.bound == Catch::Approx(7.0 / 3.0).epsilon(1e-14));
    CHECK(d.ratio == Catch::Approx(3.0 / 7.0).epsilon(1e-14));

    // vanishing viscosity and mixing length: bound tends to U^3/L
    const double U = 1.7, L = 0.8;
    const BoundDiagnostic lim = theorem_bound(1.0, U, L, 1e12, 1e-9);
    CHECK(lim.bound == Catch::Approx(U * U * U / L).epsilon(1e-9));

    // cubic homogeneity in U
    const BoundDiagnostic b1 = theorem_bound(1.0, U, L, 500.0, 0.1);
    const BoundDiagnostic b2 = theorem_bound(1.0, 2.0 * U, L, 500.0, 0.1);
    CHECK(b2.bound == Catch::Approx(8.0 * b1.bound).epsilon(1e-13));
}

TEST_CASE("recorded series properties on a forced run") {
    const Mesh mesh = unit_square_mesh(5);
    ModelParams params = ModelParams::from_reynolds(100.0, 10.0, MixingSpec::l1());
    SolverConfig cfg;
    cfg.dt = 0.02;
    cfg.t_end = 0.5;
    const std::vector<double> load = assemble_load(
        mesh, [](double x, double y) { return Vec2{std::sin(3 * y) + x, std::cos(2 * x)}; });
    const RunResult result =
        run(mesh, params, cfg, homogeneous_bc(mesh), [load](double) { return load; });

    double prev_t = -1.0;
    for (const auto& s : result.series.samples) {
        CHECK(s.t > prev_t);  // strictly increasing time
        prev_t = s.t;
        CHECK(s.eps0 >= 0.0);
        CHECK(s.epsM >= 0.0);
        CHECK(s.ke >= 0.0);
    }

    // power balance over the audited steps: mean dissipation cannot exceed
    // mean input power plus the energy drift and the residual budget
    double mean_eps = 0, mean_power = 0, mean_mke = 0, budget = 0;
    for (const auto& r : result.audit) {
        mean_eps += r.eps0 + r.epsM;
        mean_power += r.power_in;
        mean_mke += r.mke;
        budget += std::abs(r.residual);
    }
    const double n = static_cast<double>(result.audit.size());
    mean_eps /= n;
    mean_power /= n;
    mean_mke /= n;
    budget = budget / n + 1e-12;
    CHECK(mean_eps <= mean_power + std::abs(mean_mke) + budget);
}
