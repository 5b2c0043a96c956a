#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "blm/assembly.hpp"
#include "blm/bc.hpp"
#include "blm/linear_solver.hpp"
#include "blm/model.hpp"
#include "blm/stats.hpp"

namespace blm {

struct SolverConfig {
    double dt = 0.01;
    double t_end = 50.0;
    double picard_tol = 1e-9;  // absolute L2 norm of the velocity increment
    int picard_max = 50;
    double linear_tol = 1e-10;  // relative residual of each saddle-point solve
    // Test toggles for manufactured linear problems.
    bool include_convection = true;
    bool include_eddy = true;

    void validate() const {
        if (!(dt > 0.0)) throw Error("solver config: dt must be positive");
        if (!(t_end >= 0.0)) throw Error("solver config: t_end must be nonnegative");
        if (!(picard_tol > 0.0)) throw Error("solver config: picard_tol must be positive");
        if (picard_max < 1) throw Error("solver config: picard_max must be at least 1");
        if (!(linear_tol > 0.0)) throw Error("solver config: linear_tol must be positive");
    }

    int step_count() const { return static_cast<int>(std::ceil(t_end / dt - 1e-9)); }
};

// Terms of the discrete energy balance over one accepted step, all per unit
// area: mke + eps0 + epsM - power_in = residual, where the residual collects
// the Picard linearization error and the linear solver tolerance.
struct EnergyAuditRecord {
    int step = 0;
    double t = 0.0;
    double ke = 0.0;        // energy of the new state
    double mke = 0.0;       // (ke_new - ke_old) / dt
    double eps0 = 0.0;      // nu ||grad u_mid||^2 / |Omega|
    double epsM = 0.0;      // int l^2 |curl u_mid|^3 / |Omega|
    double power_in = 0.0;  // body force plus boundary reaction work on u_mid
    double residual = 0.0;
};

struct StepperState {
    Field u_now, u_prev;
    Field p_now;
    double t = 0.0;
    int step_index = 0;
    int picard_iters_last = 0;
    EnergyAuditRecord last_audit;
};

// Assembled load vector as a function of time; an empty function means f = 0.
using LoadFn = std::function<std::vector<double>(double)>;

// Crank-Nicolson time stepping of the backscatter model with Picard
// linearization. One step solves, for x = u^{n+1} and midpoint
// u_mid = (u^n + x)/2,
//
//   (M + beta^2 A(l^2)) (x - u^n)/dt
//     + C(w) u_mid + nu K u_mid + A(l^2 |curl w|) u_mid - B^T p = f(t_mid)
//   B x = 0
//
// with the transporting field w and the eddy coefficient |curl w| frozen at
// the previous Picard iterate of u_mid. The mass-like block M + beta^2 A(l^2)
// is symmetric positive definite for any beta, and the skew form of C keeps
// the convective term out of the energy balance.
class Stepper {
public:
    Stepper(const Mesh& mesh, const ModelParams& params, const SolverConfig& cfg,
            BoundaryConditions bc, LoadFn load = {})
        : mesh_(mesh), params_(params), cfg_(cfg), bc_(std::move(bc)), load_(std::move(load)) {
        cfg_.validate();
        mixing_ = fill_mixing(mesh_, params_);
        area_ = mesh_.area();
        n_vel_ = 2 * mesh_.n_p2_nodes();
        n_pre_ = mesh_.n_vertices();

        // Velocity-block pattern shared by every velocity operator: the
        // curl-curl coupling spans all component pairs, a superset of the
        // component-diagonal mass/stiffness/convection entries.
        {
            PatternBuilder builder(n_vel_, n_vel_);
            kernels::weighted_curlcurl(mesh_, mixing_.l2_qp,
                                       [&](int i, int j, double) { builder.add(i, j); });
            vel_pat_ = builder.build();
        }
        mass_ = CsrMatrix(vel_pat_);
        kernels::mass(mesh_, [&](int i, int j, double v) { mass_.add(i, j, v); });
        stiff_ = CsrMatrix(vel_pat_);
        kernels::stiffness(mesh_, [&](int i, int j, double v) { stiff_.add(i, j, v); });
        curl_l2_ = CsrMatrix(vel_pat_);
        kernels::weighted_curlcurl(mesh_, mixing_.l2_qp,
                                   [&](int i, int j, double v) { curl_l2_.add(i, j, v); });
        mass_full_ = CsrMatrix(vel_pat_);
        for (int k = 0; k < vel_pat_->nnz(); ++k)
            mass_full_.val[k] = mass_.val[k] + params_.beta * params_.beta * curl_l2_.val[k];
        conv_ = CsrMatrix(vel_pat_);
        eddy_ = CsrMatrix(vel_pat_);
        bdiv_ = assemble_divergence(mesh_);

        // Saddle-point pattern: velocity block, both divergence couplings,
        // and the pressure diagonal (for the gauge pin).
        {
            PatternBuilder builder(n_vel_ + n_pre_, n_vel_ + n_pre_);
            for (int i = 0; i < n_vel_; ++i)
                for (int k = vel_pat_->row_ptr[i]; k < vel_pat_->row_ptr[i + 1]; ++k)
                    builder.add(i, vel_pat_->col_idx[k]);
            const auto& bp = *bdiv_.pattern;
            for (int r = 0; r < n_pre_; ++r)
                for (int k = bp.row_ptr[r]; k < bp.row_ptr[r + 1]; ++k) {
                    builder.add(n_vel_ + r, bp.col_idx[k]);
                    builder.add(bp.col_idx[k], n_vel_ + r);
                }
            for (int r = 0; r < n_pre_; ++r) builder.add(n_vel_ + r, n_vel_ + r);
            sys_ = CsrMatrix(builder.build());
        }
        map_vel_.resize(vel_pat_->nnz());
        for (int i = 0; i < n_vel_; ++i)
            for (int k = vel_pat_->row_ptr[i]; k < vel_pat_->row_ptr[i + 1]; ++k)
                map_vel_[k] = sys_.pattern->find(i, vel_pat_->col_idx[k]);
        {
            const auto& bp = *bdiv_.pattern;
            map_b_.resize(bp.nnz());
            map_bt_.resize(bp.nnz());
            for (int r = 0; r < n_pre_; ++r)
                for (int k = bp.row_ptr[r]; k < bp.row_ptr[r + 1]; ++k) {
                    map_b_[k] = sys_.pattern->find(n_vel_ + r, bp.col_idx[k]);
                    map_bt_[k] = sys_.pattern->find(bp.col_idx[k], n_vel_ + r);
                }
        }

        // Replay tables: the kernels visit entries in a fixed order, so the
        // per-iteration reassembly can write straight into the value arrays.
        kernels::convection_skew(mesh_, Field::velocity(mesh_), [&](int i, int j, double) {
            conv_scatter_.push_back(vel_pat_->find(i, j));
        });
        kernels::weighted_curlcurl(mesh_, mixing_.l2_qp, [&](int i, int j, double) {
            eddy_scatter_.push_back(vel_pat_->find(i, j));
        });

        sys_dirichlet_ = bc_.dofs;
        sys_dirichlet_values_ = bc_.values;
        if (bc_.pin_pressure) {
            sys_dirichlet_.push_back(n_vel_);  // pressure dof 0
            sys_dirichlet_values_.push_back(0.0);
        }
    }

    const ModelParams& params() const { return params_; }
    const MixingField& mixing() const { return mixing_; }
    const BoundaryConditions& boundary() const { return bc_; }
    int n_velocity_dofs() const { return n_vel_; }

    // Steady Stokes solution with the run's boundary conditions and load.
    StepperState initial_condition() {
        std::vector<double> rhs = load_ ? load_(0.0) : std::vector<double>(n_vel_, 0.0);
        rhs.resize(n_vel_ + n_pre_, 0.0);

        sys_.set_zero();
        for (int k = 0; k < vel_pat_->nnz(); ++k)
            sys_.val[map_vel_[k]] = params_.nu * stiff_.val[k];
        fill_divergence_blocks();
        apply_dirichlet(sys_, rhs, sys_dirichlet_, sys_dirichlet_values_);

        lu_.factorize(sys_);
        have_lu_ = true;
        std::vector<double> x = lu_.solve(rhs);
        check_linear_residual(rhs, x);

        StepperState st;
        st.u_now = Field{SpaceKind::VelocityP2, {x.begin(), x.begin() + n_vel_}};
        enforce_bc(st.u_now.coef);
        st.u_prev = st.u_now;
        st.p_now = Field{SpaceKind::PressureP1, {x.begin() + n_vel_, x.end()}};
        if (!all_finite(st.u_now.coef)) throw BlowupError("non-finite initial state", 0);
        return st;
    }

    void advance(StepperState& st) {
        const double dt = cfg_.dt;
        const double inv_dt = 1.0 / dt;
        const std::vector<double>& un = st.u_now.coef;
        const std::vector<double> f_mid =
            load_ ? load_(st.t + 0.5 * dt) : std::vector<double>(n_vel_, 0.0);
        const std::vector<double> mf_un = mass_full_.apply(un);

        // Extrapolated predictor for u^{n+1}.
        std::vector<double> x(un.size());
        if (st.step_index == 0) x = un;
        else
            for (std::size_t i = 0; i < x.size(); ++i)
                x[i] = 1.5 * un[i] - 0.5 * st.u_prev.coef[i];

        Field w_mid = Field::velocity(mesh_);
        std::vector<double> p, rhs, diff(x.size());
        double inc = std::numeric_limits<double>::infinity();
        int iters = 0;
        bool converged = false;
        while (iters < cfg_.picard_max) {
            ++iters;
            for (std::size_t i = 0; i < x.size(); ++i) w_mid.coef[i] = 0.5 * (un[i] + x[i]);
            refresh_nonlinear(w_mid);

            rhs.assign(n_vel_ + n_pre_, 0.0);
            const std::vector<double> k_un = stiff_.apply(un);
            const std::vector<double> c_un = conv_.apply(un);
            const std::vector<double> e_un = eddy_.apply(un);
            for (int i = 0; i < n_vel_; ++i)
                rhs[i] = f_mid[i] + inv_dt * mf_un[i] -
                         0.5 * (params_.nu * k_un[i] + c_un[i] + e_un[i]);

            fill_system(inv_dt);
            apply_dirichlet(sys_, rhs, sys_dirichlet_, sys_dirichlet_values_);
            std::vector<double> sol = solve_reusing_factorization(rhs);
            if (!all_finite(sol))
                throw BlowupError("non-finite coefficients in Picard iteration", st.step_index + 1);
            check_linear_residual(rhs, sol);
            for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = sol[i] - x[i];
            std::copy(sol.begin(), sol.begin() + n_vel_, x.begin());
            enforce_bc(x);
            p.assign(sol.begin() + n_vel_, sol.end());
            inc = std::sqrt(std::max(0.0, mass_partial_quadform(diff)));
            if (inc <= cfg_.picard_tol) {
                converged = true;
                break;
            }
        }
        if (!converged) throw PicardError(iters, inc, st.step_index + 1);

        st.last_audit = audit(st, x, p, f_mid, inv_dt);
        st.u_prev = std::move(st.u_now);
        st.u_now = Field{SpaceKind::VelocityP2, std::move(x)};
        st.p_now.kind = SpaceKind::PressureP1;
        st.p_now.coef = std::move(p);
        st.t += dt;
        ++st.step_index;
        st.picard_iters_last = iters;
    }

private:
    void refresh_nonlinear(const Field& w_mid) {
        conv_.set_zero();
        if (cfg_.include_convection) {
            std::size_t pos = 0;
            kernels::convection_skew(mesh_, w_mid, [&](int, int, double v) {
                conv_.val[conv_scatter_[pos++]] += v;
            });
        }
        eddy_.set_zero();
        if (cfg_.include_eddy) {
            const std::vector<double> curl_w = curl_at_quadrature(mesh_, w_mid);
            eddy_weight_.resize(curl_w.size());
            for (std::size_t k = 0; k < curl_w.size(); ++k)
                eddy_weight_[k] = mixing_.l2_qp[k] * std::abs(curl_w[k]);
            std::size_t pos = 0;
            kernels::weighted_curlcurl(mesh_, eddy_weight_, [&](int, int, double v) {
                eddy_.val[eddy_scatter_[pos++]] += v;
            });
        }
    }

    void fill_system(double inv_dt) {
        sys_.set_zero();
        for (int k = 0; k < vel_pat_->nnz(); ++k)
            sys_.val[map_vel_[k]] =
                inv_dt * mass_full_.val[k] +
                0.5 * (params_.nu * stiff_.val[k] + conv_.val[k] + eddy_.val[k]);
        fill_divergence_blocks();
    }

    void fill_divergence_blocks() {
        for (int k = 0; k < bdiv_.pattern->nnz(); ++k) {
            sys_.val[map_b_[k]] = bdiv_.val[k];
            sys_.val[map_bt_[k]] = -bdiv_.val[k];
        }
    }

    // Successive Picard (and successive step) matrices differ only mildly,
    // so the previous LU factorization usually still works as a solver via
    // iterative refinement against the current matrix; refactorize only when
    // refinement stalls. The residual contract is checked against the true
    // matrix either way.
    std::vector<double> solve_reusing_factorization(const std::vector<double>& rhs) {
        const double target = cfg_.linear_tol * 0.5 * std::max(norm2(rhs), 1e-300);
        if (have_lu_) {
            std::vector<double> x = lu_.solve(rhs);
            for (int sweep = 0; sweep < 8 && all_finite(x); ++sweep) {
                std::vector<double> r = sys_.apply(x);
                for (std::size_t i = 0; i < r.size(); ++i) r[i] = rhs[i] - r[i];
                if (!all_finite(r)) break;
                if (norm2(r) <= target) return x;
                const std::vector<double> dx = lu_.solve(r);
                if (!all_finite(dx)) break;
                for (std::size_t i = 0; i < x.size(); ++i) x[i] += dx[i];
            }
        }
        lu_.factorize(sys_);
        have_lu_ = true;
        return lu_.solve(rhs);
    }

    void check_linear_residual(const std::vector<double>& rhs, const std::vector<double>& x) const {
        std::vector<double> r = sys_.apply(x);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = rhs[i] - r[i];
        const double rel = norm2(r) / std::max(norm2(rhs), 1e-300);
        if (!(rel <= cfg_.linear_tol))
            throw Error("saddle-point solve: relative residual " + format_double(rel) +
                        " exceeds " + format_double(cfg_.linear_tol));
    }

    void enforce_bc(std::vector<double>& u) const {
        for (std::size_t k = 0; k < bc_.dofs.size(); ++k) u[bc_.dofs[k]] = bc_.values[k];
    }

    // L2 norm squared of a velocity increment.
    double mass_partial_quadform(const std::vector<double>& d) const {
        const auto& rp = vel_pat_->row_ptr;
        const auto& ci = vel_pat_->col_idx;
        double s = 0.0;
        for (int i = 0; i < n_vel_; ++i) {
            double row = 0.0;
            for (int k = rp[i]; k < rp[i + 1]; ++k) row += mass_.val[k] * d[ci[k]];
            s += d[i] * row;
        }
        return s;
    }

    EnergyAuditRecord audit(const StepperState& st, const std::vector<double>& x,
                            const std::vector<double>& p, const std::vector<double>& f_mid,
                            double inv_dt) const {
        const std::vector<double>& un = st.u_now.coef;
        std::vector<double> u_mid(x.size()), du(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            u_mid[i] = 0.5 * (un[i] + x[i]);
            du[i] = x[i] - un[i];
        }
        const double e_old = mass_full_.quadratic_form(un, un);
        const double e_new = mass_full_.quadratic_form(x, x);

        EnergyAuditRecord rec;
        rec.step = st.step_index + 1;
        rec.t = st.t + cfg_.dt;
        rec.ke = 0.5 * e_new / area_;
        rec.mke = 0.5 * (e_new - e_old) * inv_dt / area_;
        rec.eps0 = params_.nu * stiff_.quadratic_form(u_mid, u_mid) / area_;
        const Field u_mid_field{SpaceKind::VelocityP2, u_mid};
        rec.epsM = integrate_weighted_curl_pow(mesh_, u_mid_field, mixing_.l2_qp, 3.0) / area_;

        // Residual of the unconstrained momentum equation; at Dirichlet dofs
        // it equals minus the boundary reaction force.
        std::vector<double> r = mass_full_.apply(du);
        for (double& v : r) v *= inv_dt;
        const std::vector<double> k_m = stiff_.apply(u_mid);
        const std::vector<double> c_m = conv_.apply(u_mid);
        const std::vector<double> e_m = eddy_.apply(u_mid);
        const std::vector<double> btp = bdiv_.apply_transpose(p);
        for (int i = 0; i < n_vel_; ++i)
            r[i] += params_.nu * k_m[i] + c_m[i] + e_m[i] - btp[i] - f_mid[i];

        double boundary_work = 0.0;
        for (int d : bc_.dofs) boundary_work += u_mid[d] * r[d];
        rec.power_in = (dot(f_mid, u_mid) + boundary_work) / area_;
        rec.residual = rec.mke + rec.eps0 + rec.epsM - rec.power_in;
        return rec;
    }

    const Mesh& mesh_;
    ModelParams params_;
    SolverConfig cfg_;
    BoundaryConditions bc_;
    LoadFn load_;
    MixingField mixing_;
    double area_ = 0.0;
    int n_vel_ = 0, n_pre_ = 0;

    std::shared_ptr<const CsrPattern> vel_pat_;
    CsrMatrix mass_, stiff_, curl_l2_, mass_full_;  // fixed over the run
    CsrMatrix conv_, eddy_;                         // refreshed each Picard iteration
    CsrMatrix bdiv_;
    CsrMatrix sys_;
    std::vector<int> map_vel_, map_b_, map_bt_;
    std::vector<int> conv_scatter_, eddy_scatter_;
    std::vector<double> eddy_weight_;
    std::vector<int> sys_dirichlet_;
    std::vector<double> sys_dirichlet_values_;
    DirectSolver lu_;
    bool have_lu_ = false;
};

struct RunResult {
    DissipationSeries series;
    std::vector<EnergyAuditRecord> audit;
    StepperState final_state;
    ModelParams params;  // with the derived mixing-length extremes filled in
};

// Full time integration with per-step statistics and energy audit.
inline RunResult run(const Mesh& mesh, const ModelParams& params, const SolverConfig& cfg,
                     const BoundaryConditions& bc, LoadFn load = {},
                     const std::function<void(const StepperState&)>& probe = {},
                     const std::string& mesh_id = "") {
    Stepper stepper(mesh, params, cfg, bc, std::move(load));
    const MixingField& mixing = stepper.mixing();
    const double area = mesh.area();

    RunResult result;
    result.params = stepper.params();
    result.series.reynolds = stepper.params().reynolds;
    result.series.mixing = stepper.params().mixing.name();
    result.series.mesh_id = mesh_id;
    result.series.dt = cfg.dt;

    StepperState st = stepper.initial_condition();
    const auto sample = [&](const StepperState& s, double mke, double power) {
        DissipationSample smp;
        smp.t = s.t;
        const auto [e0, em] = dissipation_rates(mesh, s.u_now, stepper.params(), mixing);
        smp.eps0 = e0;
        smp.epsM = em;
        smp.ke = kinetic_energy(mesh, s.u_now, stepper.params(), mixing);
        smp.mke = mke;
        smp.power_in = power;
        smp.u_sq = integrate_velocity_l2sq(mesh, s.u_now) / area;
        result.series.samples.push_back(smp);
    };
    sample(st, 0.0, 0.0);

    const int n_steps = cfg.step_count();
    for (int i = 0; i < n_steps; ++i) {
        stepper.advance(st);
        result.audit.push_back(st.last_audit);
        sample(st, st.last_audit.mke, st.last_audit.power_in);
        if (probe) probe(st);
    }
    result.final_state = std::move(st);
    return result;
}

}  // namespace blm
