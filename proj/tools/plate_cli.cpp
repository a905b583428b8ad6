#include "commands.hpp"

#include "plate/common.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <thread>

int main(int argc, char** argv) {
    using namespace plate::cli;
    CLI::App app{"Spectral-Galerkin simulator for the nonlinearly damped extensible plate"};
    app.require_subcommand(1);
    app.fallthrough();

    Options opt;
    opt.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    std::uint64_t seed = 0;
    app.add_option("--config", opt.config, "configuration file");
    app.add_option("--out", opt.out, "output directory");
    app.add_option("--threads", opt.threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_flag("--plots", opt.plots, "write SVG plots");
    app.add_flag("--overwrite", opt.overwrite, "reuse a non-empty output directory");
    auto* seed_opt = app.add_option("--seed", seed, "override the configured seed");

    for (const char* name : {"simulate", "sweep", "pairs", "dimension", "stationary", "selftest"})
        app.add_subcommand(name);
    auto* barrier = app.add_subcommand("barrier");
    barrier->add_flag("--toy", opt.toy, "solve the documented toy sigma equation");

    CLI11_PARSE(app, argc, argv);
    if (*seed_opt) opt.seed = seed;

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        return run_command(name, opt, std::cout);
    } catch (const plate::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kConfig;
    } catch (const plate::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumerical;
    }
}
