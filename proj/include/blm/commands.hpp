#pragma once

#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>
#include <vector>

#include "blm/config.hpp"
#include "blm/csvio.hpp"
#include "blm/mesh_io.hpp"
#include "blm/svg.hpp"
#include "blm/verify.hpp"

namespace blm {

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    out << text;
}

template <class WriteFn>
void write_with(const std::filesystem::path& path, WriteFn&& fn) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    fn(out);
}

inline void write_run_artifacts(const std::filesystem::path& dir, const Mesh& mesh,
                                const RunResult& result) {
    std::filesystem::create_directories(dir);
    write_with(dir / "stats.csv", [&](std::ostream& o) { write_stats_csv(o, result.series); });
    write_with(dir / "energy_audit.csv", [&](std::ostream& o) { write_audit_csv(o, result.audit); });
    write_with(dir / "final_u.txt", [&](std::ostream& o) { save_field(o, result.final_state.u_now); });
    write_with(dir / "final_p.txt", [&](std::ostream& o) { save_field(o, result.final_state.p_now); });
    write_with(dir / "mesh.txt", [&](std::ostream& o) { save_mesh(mesh, o); });
}

}  // namespace detail

inline int cmd_mesh(const RunConfig& cfg, const std::string& out_dir, std::ostream& log) {
    const Mesh mesh = generate_channel_mesh(cfg.geometry, cfg.mesh_h, cfg.refine);
    std::filesystem::create_directories(out_dir);
    detail::write_with(std::filesystem::path(out_dir) / "mesh.txt",
                       [&](std::ostream& o) { save_mesh(mesh, o); });
    log << "mesh: " << mesh.n_vertices() << " vertices, " << mesh.n_triangles() << " triangles, "
        << 2 * mesh.n_p2_nodes() << " velocity dofs, area " << format_double(mesh.area()) << "\n";
    return 0;
}

inline int cmd_run(const RunConfig& cfg, const std::string& out_dir, std::ostream& log) {
    const Mesh mesh = generate_channel_mesh(cfg.geometry, cfg.mesh_h, cfg.refine);
    const BoundaryConditions bc = benchmark_bc(mesh);
    const RunResult result =
        run(mesh, cfg.params(), cfg.solver(), bc, {}, {}, cfg.mesh_id());
    detail::write_run_artifacts(out_dir, mesh, result);
    const double eps_avg = time_average(result.series, cfg.burn_in);
    log << "run: Re = " << format_double(cfg.reynolds) << ", steps = "
        << result.audit.size() << ", <eps> = " << format_double(eps_avg) << "\n";
    return 0;
}

inline int cmd_sweep(const RunConfig& cfg, const std::string& out_dir, int threads,
                     std::ostream& log) {
    if (cfg.sweep.empty()) throw Error("sweep: config must provide a nonempty sweep list");
    const Mesh mesh = generate_channel_mesh(cfg.geometry, cfg.mesh_h, cfg.refine);

    const int n = static_cast<int>(cfg.sweep.size());
    std::vector<SweepRow> rows(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<int> next{0};
    std::mutex log_mutex;

    const auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                const double re = cfg.sweep[i];
                const BoundaryConditions bc = benchmark_bc(mesh);
                const RunResult result =
                    run(mesh, cfg.params_for(re), cfg.solver(), bc, {}, {}, cfg.mesh_id());
                const double eps_avg = time_average(result.series, cfg.burn_in);
                const Scales sc =
                    compute_scales(mesh, nullptr, result.series, result.params.nu, cfg.burn_in);
                const BoundDiagnostic bd =
                    theorem_bound(eps_avg, sc.U, sc.L, sc.Re, result.params.ell_max);
                rows[i] = {re, eps_avg, sc.U, bd.bound, bd.ratio};
                detail::write_run_artifacts(
                    std::filesystem::path(out_dir) / ("Re_" + format_double(re)), mesh, result);
                std::lock_guard<std::mutex> lock(log_mutex);
                log << "sweep: Re = " << format_double(re) << " done, <eps> = "
                    << format_double(eps_avg) << "\n";
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };

    const int n_workers = std::max(1, std::min(threads, n));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (const auto& err : errors)
        if (err) std::rethrow_exception(err);

    std::filesystem::create_directories(out_dir);
    detail::write_with(std::filesystem::path(out_dir) / "sweep.csv",
                       [&](std::ostream& o) { write_sweep_csv(o, rows); });
    return 0;
}

inline int cmd_fit(const std::string& out_dir, std::ostream& log) {
    const std::filesystem::path sweep_path = std::filesystem::path(out_dir) / "sweep.csv";
    std::ifstream in(sweep_path);
    if (!in) throw Error("fit: cannot open '" + sweep_path.string() + "'");
    const CsvTable table = read_csv(in);
    const int c_re = table.column("Re"), c_eps = table.column("eps_avg");
    std::vector<std::pair<double, double>> points;
    for (const auto& row : table.rows) points.emplace_back(row[c_re], row[c_eps]);
    const FitResult fit = fit_dissipation(points);
    const std::string line = "a=" + format_double(fit.a) + " b=" + format_double(fit.b) +
                             " rms=" + format_double(fit.rms_residual);
    detail::write_file(std::filesystem::path(out_dir) / "fit.txt", line + "\n");
    log << line << "\n";
    return 0;
}

inline int cmd_plot(const std::string& out_dir, std::ostream& log) {
    std::vector<Panel> panels;
    {
        const std::filesystem::path stats_path = std::filesystem::path(out_dir) / "stats.csv";
        std::ifstream in(stats_path);
        if (!in) throw Error("plot: cannot open '" + stats_path.string() + "'");
        const CsvTable table = read_csv(in);
        const int c_t = table.column("t"), c_eps = table.column("eps");
        XYSeries eps;
        eps.label = "eps(t)";
        for (const auto& row : table.rows) eps.points.emplace_back(row[c_t], row[c_eps]);
        Panel p;
        p.title = "energy dissipation rate";
        p.xlabel = "t";
        p.ylabel = "eps";
        p.series.push_back(std::move(eps));
        panels.push_back(std::move(p));
    }
    const std::filesystem::path sweep_path = std::filesystem::path(out_dir) / "sweep.csv";
    if (std::ifstream in(sweep_path); in) {
        const CsvTable table = read_csv(in);
        const int c_re = table.column("Re"), c_eps = table.column("eps_avg");
        Panel p;
        p.title = "time-averaged dissipation vs Re";
        p.xlabel = "Re";
        p.ylabel = "<eps>";
        XYSeries pts;
        pts.label = "<eps>";
        pts.markers_only = true;
        pts.color = "#d6562b";
        std::vector<std::pair<double, double>> fit_points;
        for (const auto& row : table.rows) {
            pts.points.emplace_back(row[c_re], row[c_eps]);
            fit_points.emplace_back(row[c_re], row[c_eps]);
        }
        if (fit_points.size() >= 2) {
            const FitResult fit = fit_dissipation(fit_points);
            double lo = fit_points.front().first, hi = lo;
            for (const auto& [re, _] : fit_points) {
                lo = std::min(lo, re);
                hi = std::max(hi, re);
            }
            XYSeries curve;
            curve.label = "a + b/Re fit";
            for (int k = 0; k <= 100; ++k) {
                const double re = lo + (hi - lo) * k / 100.0;
                curve.points.emplace_back(re, fit.a + fit.b / re);
            }
            p.series.push_back(std::move(curve));
        }
        p.series.push_back(std::move(pts));
        panels.push_back(std::move(p));
    }
    const std::string svg = render_svg(panels);
    detail::write_file(std::filesystem::path(out_dir) / "plot.svg", svg);
    log << "plot: wrote " << (std::filesystem::path(out_dir) / "plot.svg").string() << "\n";
    return 0;
}

inline int cmd_verify(std::uint64_t seed, std::ostream& log) {
    int failures = 0;
    const auto report = [&](bool ok, const std::string& text) {
        log << (ok ? "[PASS] " : "[FAIL] ") << text << "\n";
        if (!ok) ++failures;
    };

    {
        const Mesh mesh = generate_channel_mesh(Geometry::channel_with_obstacle(), 0.3, 2.0);
        ModelParams params = ModelParams::from_reynolds(400.0, 10.0, MixingSpec::l1());
        const MixingField mixing = fill_mixing(mesh, params);
        const MonotonicityReport rep = check_monotonicity(mesh, mixing, 1000, seed);
        report(rep.ok(), "strong monotonicity: " + std::to_string(rep.trials) + " trials, " +
                             std::to_string(rep.violations) +
                             " violations, min LHS/RHS = " + format_double(rep.min_ratio));
    }
    {
        const Mesh mesh = unit_square_mesh(8);
        ModelParams params = ModelParams::from_reynolds(100.0, 10.0, MixingSpec::l1());
        SolverConfig cfg;
        cfg.dt = 0.01;
        cfg.t_end = 1.0;
        const std::vector<double> load = assemble_load(mesh, [](double x, double y) {
            return Vec2{std::sin(3.1 * y) + x, std::cos(2.2 * x)};
        });
        const RunResult result = run(mesh, params, cfg, homogeneous_bc(mesh),
                                     [load](double) { return load; });
        const double worst = max_relative_audit_residual(result.audit);
        report(worst <= 1e-7, "energy audit: max relative residual = " + format_double(worst) +
                                  " (limit 1e-07)");
    }
    {
        const ConvergenceStudy study = stokes_convergence_study(3);
        report(study.velocity_slope >= 2.7,
               "velocity convergence: slope = " + format_double(study.velocity_slope) +
                   " (limit 2.7)");
        report(study.pressure_slope >= 1.7,
               "pressure convergence: slope = " + format_double(study.pressure_slope) +
                   " (limit 1.7)");
    }
    {
        const TemporalStudy study = temporal_order_study(0.1, 2.0);
        report(study.ratio >= 3.6,
               "temporal order: dt-halving error ratio = " + format_double(study.ratio) +
                   " (limit 3.6)");
    }
    return failures == 0 ? 0 : 1;
}

}  // namespace blm
