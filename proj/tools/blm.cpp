// Command-line driver: mesh generation, single runs, Reynolds sweeps,
// dissipation fitting, verification checks, and SVG plots.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "blm/commands.hpp"

namespace {

blm::RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw blm::Error("cannot open config file '" + path + "'");
    return blm::parse_config(in);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"backscatter Baldwin-Lomax channel-flow solver"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    int threads = 1;
    std::uint64_t seed = 20240901;

    const auto add_common = [&](CLI::App* sub, bool needs_config) {
        auto* opt = sub->add_option("--config", config_path, "path to a key = value config file");
        if (needs_config) opt->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--threads", threads, "worker threads for sweeps");
        sub->add_option("--seed", seed, "seed for randomized checks");
    };

    add_common(app.add_subcommand("mesh", "generate the benchmark mesh"), true);
    add_common(app.add_subcommand("run", "single simulation run"), true);
    add_common(app.add_subcommand("sweep", "run every Reynolds number in the sweep list"), true);
    add_common(app.add_subcommand("fit", "fit a + b/Re to sweep.csv"), false);
    add_common(app.add_subcommand("verify", "run the analytical property checks"), false);
    add_common(app.add_subcommand("plot", "render stats/sweep results as SVG"), false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("mesh"))
            return blm::cmd_mesh(load_config(config_path), out_dir, std::cout);
        if (app.got_subcommand("run"))
            return blm::cmd_run(load_config(config_path), out_dir, std::cout);
        if (app.got_subcommand("sweep"))
            return blm::cmd_sweep(load_config(config_path), out_dir, threads, std::cout);
        if (app.got_subcommand("fit")) return blm::cmd_fit(out_dir, std::cout);
        if (app.got_subcommand("verify")) return blm::cmd_verify(seed, std::cout);
        if (app.got_subcommand("plot")) return blm::cmd_plot(out_dir, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
