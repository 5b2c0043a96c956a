#pragma once

#include <cstdint>
#include <ostream>
#include <random>
#include <vector>

#include "blm/stepper.hpp"

namespace blm {

// ---------------------------------------------------------------------------
// Strong monotonicity of the eddy-viscosity operator
// ---------------------------------------------------------------------------
//
// For scalar curls a, b the pointwise ratio (|a|a - |b|b)(a - b) / |a - b|^3
// attains its minimum 1/2 at a = -b, so with the l^2 weight carried along,
//
//   ( l^2 |curl u| curl u - l^2 |curl u'| curl u', curl (u - u') )
//       >= 1/2 * int l^2 |curl (u - u')|^3 .
//
// The checker evaluates both sides by quadrature for seeded random P2 pairs.

struct MonotonicityReport {
    int trials = 0;
    int violations = 0;
    double min_ratio = std::numeric_limits<double>::infinity();  // LHS / RHS
    double most_negative_lhs = 0.0;
    std::uint64_t first_bad_seed = 0;
    bool ok() const { return violations == 0; }
};

inline MonotonicityReport check_monotonicity(const Mesh& mesh, const MixingField& mixing,
                                             int trials, std::uint64_t seed) {
    if (trials < 1) throw Error("check_monotonicity: trials must be at least 1");
    const auto& qb = QuadBasis::get();
    const int nq = qb.rule.size();
    const std::vector<double> scale_qp = quad_scales(mesh);

    MonotonicityReport rep;
    rep.trials = trials;
    Field u{SpaceKind::VelocityP2, std::vector<double>(2 * mesh.n_p2_nodes())};
    Field v = u;
    for (int trial = 0; trial < trials; ++trial) {
        const std::uint64_t trial_seed = seed + static_cast<std::uint64_t>(trial);
        std::mt19937_64 rng(trial_seed);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        for (double& c : u.coef) c = unif(rng);
        for (double& c : v.coef) c = unif(rng);

        double lhs = 0.0, rhs = 0.0;
        for (int t = 0; t < mesh.n_triangles(); ++t)
            for (int q = 0; q < nq; ++q) {
                const std::size_t k = static_cast<std::size_t>(t) * nq + q;
                const double cu = curl2d(mesh, u, t, qb.rule.xi[q], qb.rule.eta[q]);
                const double cv = curl2d(mesh, v, t, qb.rule.xi[q], qb.rule.eta[q]);
                const double w = scale_qp[k] * mixing.l2_qp[k];
                lhs += w * (std::abs(cu) * cu - std::abs(cv) * cv) * (cu - cv);
                const double d = std::abs(cu - cv);
                rhs += w * d * d * d;
            }

        const double neg_tol = -1e-13 * std::max(1.0, rhs);
        const bool nonneg_ok = lhs >= neg_tol;
        const bool quant_ok = lhs >= (0.5 - 1e-6) * rhs;
        if (rhs > 0.0) rep.min_ratio = std::min(rep.min_ratio, lhs / rhs);
        rep.most_negative_lhs = std::min(rep.most_negative_lhs, lhs);
        if (!nonneg_ok || !quant_ok) {
            if (rep.violations == 0) rep.first_bad_seed = trial_seed;
            ++rep.violations;
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Energy audit reduction
// ---------------------------------------------------------------------------

// Largest per-step energy-balance residual relative to the magnitude of the
// balance terms (floored at 1).
inline double max_relative_audit_residual(const std::vector<EnergyAuditRecord>& records) {
    double worst = 0.0;
    for (const auto& r : records) {
        const double scale =
            std::max(1.0, std::abs(r.mke) + std::abs(r.eps0) + std::abs(r.epsM) +
                              std::abs(r.power_in));
        worst = std::max(worst, std::abs(r.residual) / scale);
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Discretization order studies
// ---------------------------------------------------------------------------

struct ConvergenceStudy {
    std::vector<double> h;
    std::vector<double> velocity_error;
    std::vector<double> pressure_error;
    double velocity_slope = 0.0;
    double pressure_slope = 0.0;
};

namespace detail {

inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const int n = static_cast<int>(x.size());
    double xm = 0.0, ym = 0.0;
    for (int i = 0; i < n; ++i) {
        xm += std::log(x[i]);
        ym += std::log(y[i]);
    }
    xm /= n;
    ym /= n;
    double sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < n; ++i) {
        const double dx = std::log(x[i]) - xm;
        sxx += dx * dx;
        sxy += dx * (std::log(y[i]) - ym);
    }
    return sxy / sxx;
}

// L2 errors of a Stokes solve against an analytic solution; the pressure is
// compared after removing the mean from both sides.
template <class VelFn, class PreFn, class ForceFn>
std::pair<double, double> stokes_errors(const Mesh& mesh, double nu, VelFn&& u_exact,
                                        PreFn&& p_exact, ForceFn&& force) {
    ModelParams params;
    params.nu = nu;
    params.mixing = MixingSpec::constant(0.0);
    SolverConfig cfg;
    BoundaryConditions bc = dirichlet_everywhere(mesh, u_exact);
    std::vector<double> load = assemble_load(mesh, force);
    Stepper stepper(mesh, params, cfg, bc, [load](double) { return load; });
    StepperState st = stepper.initial_condition();

    const auto& qb = QuadBasis::get();
    double vel_err = 0.0, area = 0.0, ph_mean = 0.0, pe_mean = 0.0;
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const ElementGeom geom = ElementGeom::of(mesh, t);
        for (int q = 0; q < qb.rule.size(); ++q) {
            const double wq = qb.rule.w[q] * geom.detJ;
            const Vec2 p = geom.to_physical(qb.rule.xi[q], qb.rule.eta[q]);
            const Vec2 uh = velocity_at(mesh, st.u_now, t, qb.rule.xi[q], qb.rule.eta[q]);
            const Vec2 ue = u_exact(p.x, p.y);
            vel_err += wq * (sq(uh.x - ue.x) + sq(uh.y - ue.y));
            ph_mean += wq * pressure_at(mesh, st.p_now, t, qb.rule.xi[q], qb.rule.eta[q]);
            pe_mean += wq * p_exact(p.x, p.y);
            area += wq;
        }
    }
    ph_mean /= area;
    pe_mean /= area;
    double p_err = 0.0;
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const ElementGeom geom = ElementGeom::of(mesh, t);
        for (int q = 0; q < qb.rule.size(); ++q) {
            const double wq = qb.rule.w[q] * geom.detJ;
            const Vec2 p = geom.to_physical(qb.rule.xi[q], qb.rule.eta[q]);
            const double ph = pressure_at(mesh, st.p_now, t, qb.rule.xi[q], qb.rule.eta[q]);
            p_err += wq * sq((ph - ph_mean) - (p_exact(p.x, p.y) - pe_mean));
        }
    }
    return {std::sqrt(vel_err), std::sqrt(p_err)};
}

}  // namespace detail

// Taylor-Hood convergence against a smooth manufactured Stokes solution on
// the unit square (optionally with a graded hole). Expected orders: 3 for the
// velocity, 2 for the pressure.
inline ConvergenceStudy stokes_convergence_study(int levels, bool graded = false) {
    if (levels < 2) throw Error("stokes_convergence_study: need at least 2 levels");
    const double pi = 3.14159265358979323846;
    const double nu = 1.0;
    const auto u_exact = [&](double x, double y) {
        return Vec2{std::sin(pi * x) * std::cos(pi * y), -std::cos(pi * x) * std::sin(pi * y)};
    };
    const auto p_exact = [&](double x, double y) { return std::cos(pi * x) * std::sin(pi * y); };
    const auto force = [&](double x, double y) {
        const Vec2 u = u_exact(x, y);
        return Vec2{2.0 * nu * pi * pi * u.x - pi * std::sin(pi * x) * std::sin(pi * y),
                    2.0 * nu * pi * pi * u.y + pi * std::cos(pi * x) * std::cos(pi * y)};
    };

    // The graded family refines one fixed graded base mesh uniformly, so the
    // element shapes (and thus the error constants) are identical across
    // levels and the observed order is clean.
    Mesh mesh;
    if (!graded) {
        mesh = unit_square_mesh(8);
    } else {
        Geometry geom = Geometry::channel_only({0.0, 0.0}, {1.0, 1.0});
        geom.has_obstacle = true;
        geom.obstacle_min = {0.4, 0.45};
        geom.obstacle_max = {0.5, 0.55};
        mesh = generate_channel_mesh(geom, 0.3, 2.0);
    }

    ConvergenceStudy study;
    for (int lvl = 0; lvl < levels; ++lvl) {
        if (lvl > 0) mesh = uniform_refine(mesh);
        double h = 0.0;
        for (double hw : mesh.elem_width) h = std::max(h, hw);
        const auto [ev, ep] = detail::stokes_errors(mesh, nu, u_exact, p_exact, force);
        study.h.push_back(h);
        study.velocity_error.push_back(ev);
        study.pressure_error.push_back(ep);
    }
    study.velocity_slope = detail::ls_slope(study.h, study.velocity_error);
    study.pressure_slope = detail::ls_slope(study.h, study.pressure_error);
    return study;
}

struct TemporalStudy {
    double error_coarse = 0.0;
    double error_fine = 0.0;
    double ratio = 0.0;
};

// Time-accuracy of the stepper on a forced problem whose semidiscrete
// solution is g(t) U_s exactly: the forcing is manufactured from the
// assembled operators applied to a fixed divergence-free snapshot U_s, so the
// measured terminal error is purely the time discretization error. With
// nonlinear = false the convection and eddy terms are switched off (the
// backscatter mass term stays on); with true the full model is exercised.
inline TemporalStudy temporal_order_study(double dt, double t_end, bool nonlinear = false) {
    const Mesh mesh = unit_square_mesh(6);
    ModelParams params;
    params.nu = 0.1;
    params.beta = 2.0;
    params.mixing = MixingSpec::constant(0.3);

    // Divergence-free snapshot with zero boundary values: a Stokes solution.
    const BoundaryConditions bc = homogeneous_bc(mesh);
    Field u_s, p_s;
    {
        SolverConfig cfg;
        std::vector<double> load = assemble_load(mesh, [](double x, double y) {
            return Vec2{std::sin(3.0 * x) + y, std::cos(2.0 * y) * x};
        });
        Stepper stokes(mesh, params, cfg, bc, [load](double) { return load; });
        StepperState st = stokes.initial_condition();
        u_s = st.u_now;
        p_s = st.p_now;
    }

    MixingField mixing = [&] {
        ModelParams tmp = params;
        return fill_mixing(mesh, tmp);
    }();
    const CsrMatrix mass = assemble_mass(mesh);
    const CsrMatrix stiff = assemble_stiffness(mesh);
    const CsrMatrix curl_l2 = assemble_weighted_curlcurl(mesh, mixing.l2_qp);
    const CsrMatrix bdiv = assemble_divergence(mesh);

    std::vector<double> mf_u = mass.apply(u_s.coef);
    axpy(params.beta * params.beta, curl_l2.apply(u_s.coef), mf_u);
    const std::vector<double> k_u = stiff.apply(u_s.coef);
    const std::vector<double> bt_p = bdiv.apply_transpose(p_s.coef);
    std::vector<double> c_u(u_s.coef.size(), 0.0), a_u(u_s.coef.size(), 0.0);
    if (nonlinear) {
        c_u = assemble_convection_skew(mesh, u_s).apply(u_s.coef);
        const std::vector<double> curl_us = curl_at_quadrature(mesh, u_s);
        std::vector<double> w(curl_us.size());
        for (std::size_t k = 0; k < w.size(); ++k)
            w[k] = mixing.l2_qp[k] * std::abs(curl_us[k]);
        a_u = assemble_weighted_curlcurl(mesh, w).apply(u_s.coef);
    }

    const auto load_at = [&](double t) {
        const double g = std::sin(t), gp = std::cos(t);
        std::vector<double> f(mf_u.size());
        for (std::size_t i = 0; i < f.size(); ++i) {
            f[i] = gp * mf_u[i] + params.nu * g * k_u[i] - g * bt_p[i];
            if (nonlinear) f[i] += g * g * c_u[i] + g * std::abs(g) * a_u[i];
        }
        return f;
    };

    const auto terminal_error = [&](double step_dt) {
        SolverConfig cfg;
        cfg.dt = step_dt;
        cfg.t_end = t_end;
        cfg.picard_tol = 1e-12;
        cfg.picard_max = 100;
        cfg.include_convection = nonlinear;
        cfg.include_eddy = nonlinear;
        Stepper stepper(mesh, params, cfg, bc, load_at);
        StepperState st;
        st.u_now = st.u_prev = Field::velocity(mesh);
        st.p_now = Field::pressure(mesh);
        const int n = cfg.step_count();
        for (int i = 0; i < n; ++i) stepper.advance(st);
        const double g = std::sin(st.t);
        Field diff = st.u_now;
        for (std::size_t i = 0; i < diff.coef.size(); ++i) diff.coef[i] -= g * u_s.coef[i];
        return std::sqrt(integrate_velocity_l2sq(mesh, diff));
    };

    TemporalStudy study;
    study.error_coarse = terminal_error(dt);
    study.error_fine = terminal_error(0.5 * dt);
    study.ratio = study.error_coarse / study.error_fine;
    return study;
}

}  // namespace blm
