#include "claricov/cli.hpp"
#include "claricov/common.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace claricov;

int main(int argc, char** argv) {
    CLI::App app{"clarity-driven multi-agent coverage simulator"};
    app.set_version_flag("--version", cli::kVersion);
    app.require_subcommand(1);

    cli::FitArgs fit_args;
    std::string fit_family = "matern12";
    auto* fit = app.add_subcommand("fit", "fit kernel hyperparameters from grid snapshots");
    fit->add_option("data", fit_args.data_path, "input csv (t,x_km,y_km,value)")->required();
    fit->add_option("--out", fit_args.out_dir, "output directory")->required();
    fit->add_option("--family", fit_family, "kernel family: matern12 | se");
    fit->add_option("--bins", fit_args.n_bins, "variogram lag bins");
    fit->add_option("--max-lag", fit_args.max_lag, "max lag km (0 = half bbox diagonal)");
    fit->add_option("--noise-var", fit_args.noise_var, "measurement noise variance R");
    fit->add_flag("--force", fit_args.force, "overwrite existing outputs");

    cli::RunArgs run_args;
    std::string run_controller;
    int run_agents = -1;
    std::int64_t run_seed = -1;
    auto* run = app.add_subcommand("run", "execute a coverage scenario");
    run->add_option("--config", run_args.config_path, "scenario config file")->required();
    run->add_option("--out", run_args.out_dir, "output directory")->required();
    run->add_option("--controller", run_controller, "override policy: direct | indirect");
    run->add_option("--agents", run_agents, "override fleet size");
    run->add_option("--seed", run_seed, "override RNG seed");
    run->add_flag("--force", run_args.force, "overwrite existing outputs");

    cli::ReportArgs report_args;
    auto* report = app.add_subcommand("report", "summarize finished runs");
    report->add_option("runs", report_args.run_dirs, "run directories")->required();
    report->add_option("--out", report_args.out_dir, "output directory")->required();
    report->add_flag("--force", report_args.force, "overwrite existing outputs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return cli::kExitUsage;
    }

    try {
        if (fit->parsed()) {
            fit_args.family = kernel_family_from_name(fit_family);
            return cli::run_fit(fit_args, std::cout);
        }
        if (run->parsed()) {
            if (!run_controller.empty()) {
                if (run_controller == "direct")
                    run_args.controller = CoveragePolicy::Direct;
                else if (run_controller == "indirect")
                    run_args.controller = CoveragePolicy::Indirect;
                else
                    throw ConfigError("--controller must be 'direct' or 'indirect'");
            }
            if (run_agents >= 0) run_args.agents = run_agents;
            if (run_seed >= 0) run_args.seed = static_cast<std::uint64_t>(run_seed);
            return cli::run_run(run_args, std::cout);
        }
        if (report->parsed()) return cli::run_report(report_args, std::cout);
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return cli::kExitNumericalError;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return cli::kExitDataError;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return cli::kExitDataError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::kExitNumericalError;
    }
    return cli::kExitUsage;
}
