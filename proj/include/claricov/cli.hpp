#pragma once

#include "claricov/kernels.hpp"
#include "claricov/sim.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace claricov::cli {

inline constexpr const char* kVersion = "claricov 0.1.0";

// Exit codes shared by all commands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitDataError = 2;
inline constexpr int kExitNumericalError = 3;

struct FitArgs {
    std::filesystem::path data_path;
    std::filesystem::path out_dir;
    KernelFamily family = KernelFamily::Matern12;
    int n_bins = 20;
    double max_lag = 0.0;    ///< km; 0 -> half the sample bounding-box diagonal
    double noise_var = 0.25; ///< R is supplied, not fitted
    bool force = false;
};

/// fit: ingest `t,x_km,y_km,value` snapshots, build the variogram, fit the
/// kernel, estimate per-point temporal variance. Writes variogram.csv,
/// fitted.ini and sigma_t.csv into out_dir.
int run_fit(const FitArgs& args, std::ostream& log);

struct RunArgs {
    std::filesystem::path config_path;
    std::filesystem::path out_dir;
    std::optional<CoveragePolicy> controller;
    std::optional<int> agents;
    std::optional<std::uint64_t> seed;
    bool force = false;
};

/// run: execute the scenario and write metrics.csv, trajectories.csv,
/// measurements.csv, controls.csv, snapshot series, config.ini and the run
/// manifest into out_dir.
int run_run(const RunArgs& args, std::ostream& log);

struct ReportArgs {
    std::vector<std::filesystem::path> run_dirs;
    std::filesystem::path out_dir;
    bool force = false;
};

/// report: aggregate finished runs into deficit-vs-time curves and a
/// comparison table; prints soft cross-run checks.
int run_report(const ReportArgs& args, std::ostream& log);

/// Writes the outputs of a finished run (exposed for run_run and tests).
void write_run_outputs(const RunResult& result, const std::filesystem::path& out_dir);

/// Refuses to reuse a non-empty output directory unless force is set.
void prepare_out_dir(const std::filesystem::path& out_dir, bool force);

} // namespace claricov::cli
