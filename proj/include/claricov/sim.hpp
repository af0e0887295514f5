#pragma once

#include "claricov/clarity.hpp"
#include "claricov/config.hpp"
#include "claricov/control.hpp"
#include "claricov/ngpkf.hpp"
#include "claricov/rng.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace claricov {

/// Synthetic spatiotemporal field: a GP draw at t = 0 evolved by independent
/// per-point Gaussian increments of variance sigma_t^2(p) dt, one independent
/// field per output component. Lives on its own (refined) grid so the filter
/// never estimates on the exact generating points.
struct GroundTruth {
    GridSpec grid;
    double dt = 0.0;
    std::uint64_t seed = 0;
    KernelParams kernel;
    /// fields[component][step] in grid ordering; step 0 is the initial draw.
    std::vector<std::vector<Eigen::VectorXd>> fields;

    int components() const { return static_cast<int>(fields.size()); }
    int steps() const { return fields.empty() ? 0 : static_cast<int>(fields[0].size()) - 1; }

    /// Bilinear interpolation of the stored field; positions within the
    /// half-cell boundary margin use edge values.
    double value_at(int component, int step, const Vec2& p) const;
};

GroundTruth generate_ground_truth(const ScenarioConfig& config, std::uint64_t seed);

/// Samples the truth at the given positions and perturbs each value with
/// independent N(0, noise_var) noise. Throws DataError for positions outside
/// the domain.
MeasurementBatch measure(const GroundTruth& truth, int component, int step,
                         std::span<const Vec2> positions, double noise_var,
                         RandomStream& rng, const DomainBox& domain);

/// Single-integrator step x' = x + u dt, clamped to the domain box.
Vec2 step_dynamics(const Vec2& x, const Vec2& u, double dt, const DomainBox& domain);

/// Per-point Wiener intensities on a grid: the configured constant, or
/// nearest-sample lookup from the configured per-point file.
Eigen::VectorXd load_rate_field(const ScenarioConfig& config, const GridSpec& grid);

struct StepMetrics {
    double t = 0.0;
    double mean_clarity_deficit = 0.0;
    double rmse_x = 0.0;
    double rmse_y = 0.0;
};

struct TrajectoryRecord {
    double t = 0.0;
    int agent = 0;
    Vec2 position{0.0, 0.0}; ///< km, before applying u
    Vec2 u_mps{0.0, 0.0};
    bool fallback = false;
};

struct MeasurementRecord {
    double t = 0.0;
    int agent = 0;
    Vec2 position{0.0, 0.0};
    int component = 0;
    double value = 0.0;
};

struct ClaritySnapshot {
    double t = 0.0;
    ClarityMap map;
};

struct FieldSnapshot2 {
    double t = 0.0;
    std::vector<Eigen::VectorXd> truth;    ///< per component, truth grid
    std::vector<Eigen::VectorXd> est_mean; ///< per component, filter grid
    std::vector<Eigen::VectorXd> est_var;  ///< per component, filter grid
};

struct RunResult {
    ScenarioConfig config;
    GridSpec grid;
    GridSpec truth_grid;
    std::vector<StepMetrics> metrics;
    std::vector<TrajectoryRecord> trajectories;
    std::vector<MeasurementRecord> measurements;
    std::vector<ClaritySnapshot> clarity_snapshots;
    std::vector<FieldSnapshot2> field_snapshots;
    ClarityMap final_clarity;
    std::vector<FilterState> final_states;   ///< per component
    std::vector<Vec2> final_positions;       ///< per agent
    std::vector<double> distance_traveled;   ///< km per agent, whole mission
};

/// Executes the full mission loop: measure -> predict/correct (central
/// assimilation) -> clarity map -> per-agent control -> dynamics -> log.
/// Deterministic for a fixed config and seed.
RunResult run_scenario(const ScenarioConfig& config);

} // namespace claricov
