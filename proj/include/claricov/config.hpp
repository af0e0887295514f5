#pragma once

#include "claricov/common.hpp"
#include "claricov/control.hpp"
#include "claricov/grid.hpp"
#include "claricov/kernels.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace claricov {

/// Full description of one simulated mission. Parsed from / serialized to a
/// flat sectioned key-value file; parse(serialize(c)) == c.
struct ScenarioConfig {
    // [domain]
    double len_x = 3.0; ///< km
    double len_y = 1.5; ///< km

    // [grid]
    double grid_spacing = 0.1; ///< km

    // [kernel]
    KernelParams kernel{KernelFamily::Matern12, 3.49, 0.944, 0.25};

    // [process]
    double prior_mean = 0.0;
    double sigma_t_sq = 1e-4;      ///< (field units)^2 per s, used when file empty
    std::string sigma_t_sq_file;   ///< per-point rates: columns x_km,y_km,sigma_t_sq

    // [fleet]
    int agents = 3;
    double u_max_mps = 30.0;
    std::vector<Vec2> start_positions; ///< empty -> evenly spaced on south edge

    // [controller]
    CoveragePolicy policy = CoveragePolicy::Direct;
    int modes = 16;
    double tau_max = 3600.0;   ///< s
    double eps_gradient = 0.0; ///< 0 -> auto threshold

    // [targets]
    double q_target = 0.8;

    // [sim]
    double dt = 5.0;        ///< s
    double horizon = 600.0; ///< s; multiple of dt
    std::uint64_t seed = 1;
    int truth_refine = 2;   ///< ground-truth grid refinement factor
    int snapshot_every = 12; ///< steps between field snapshots; 0 = final only
    int components = 2;      ///< independent field components (wind x/y)

    double u_max_kms() const { return u_max_mps / 1000.0; }
    int steps() const { return static_cast<int>(std::lround(horizon / dt)); }
    GridSpec filter_grid() const { return GridSpec::cell_centered(len_x, len_y, grid_spacing); }
    DomainBox domain() const { return {{0.0, 0.0}, {len_x, len_y}}; }

    /// Start positions with the south-edge default applied.
    std::vector<Vec2> resolved_starts() const;

    void validate() const; ///< throws ConfigError
};

ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const ScenarioConfig& config);

} // namespace claricov
