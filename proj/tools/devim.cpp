// devim -- build, smooth and analyze developable isometric immersions from
// INI job configs. See README.md for the config grammar and output formats.
#include <devim/cli.hpp>

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    CLI::App app{"developable isometric immersions: construction, smoothing, analysis"};
    app.require_subcommand(1);

    std::string config_path, outdir;
    int threads = 1;
    unsigned seed = 0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "job config file")->required();
        cmd->add_option("--out", outdir, "output directory")->required();
        cmd->add_option("--threads", threads, "worker threads (default 1)");
        cmd->add_option("--seed", seed, "seed for Monte Carlo volume estimates");
    };

    CLI::App* build = app.add_subcommand("build", "integrate frames and validate");
    CLI::App* smooth = app.add_subcommand("smooth", "run the smoothing schedule");
    CLI::App* analyze = app.add_subcommand("analyze", "analyze lattice samples");
    add_common(build);
    add_common(smooth);
    add_common(analyze);

    CLI11_PARSE(app, argc, argv);

    if (const char* env = std::getenv("DEVIM_THREADS")) threads = std::atoi(env);
    devim::worker_count() = std::max(1, threads);

    try {
        devim::Config cfg = devim::Config::parse_file(config_path);
        if (build->parsed()) return devim::run_build(cfg, outdir, std::cerr);
        if (smooth->parsed()) return devim::run_smooth(cfg, outdir, std::cerr, seed);
        if (analyze->parsed()) return devim::run_analyze(cfg, outdir, std::cerr);
    } catch (const devim::Error& e) {
        std::cerr << e.what() << "\n";
        return devim::exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    return 1;
}
