#include "claricov/sim.hpp"

#include "claricov/csv.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>

namespace claricov {

namespace {

const char* truth_stream_name(int component) {
    return component == 0 ? "truth-x" : "truth-y";
}

double bilinear(const GridSpec& grid, const Eigen::VectorXd& values, const Vec2& p) {
    const auto axis = [](double coord, double origin, double spacing, int n) {
        double f = (coord - origin) / spacing;
        f = std::clamp(f, 0.0, static_cast<double>(n - 1));
        int i0 = std::min(static_cast<int>(f), n - 2);
        if (n == 1) i0 = 0;
        const double frac = n == 1 ? 0.0 : std::clamp(f - i0, 0.0, 1.0);
        return std::pair<int, double>{i0, frac};
    };
    const auto [ix, tx] = axis(p.x(), grid.origin.x(), grid.spacing, grid.nx);
    const auto [iy, ty] = axis(p.y(), grid.origin.y(), grid.spacing, grid.ny);
    const int ix1 = std::min(ix + 1, grid.nx - 1);
    const int iy1 = std::min(iy + 1, grid.ny - 1);
    const double v00 = values[grid.index(ix, iy)];
    const double v10 = values[grid.index(ix1, iy)];
    const double v01 = values[grid.index(ix, iy1)];
    const double v11 = values[grid.index(ix1, iy1)];
    return (1.0 - tx) * (1.0 - ty) * v00 + tx * (1.0 - ty) * v10 +
           (1.0 - tx) * ty * v01 + tx * ty * v11;
}

Eigen::VectorXd rates_on_grid(const ScenarioConfig& config, const GridSpec& grid);

} // namespace

double GroundTruth::value_at(int component, int step, const Vec2& p) const {
    return bilinear(grid, fields.at(static_cast<std::size_t>(component))
                              .at(static_cast<std::size_t>(step)), p);
}

GroundTruth generate_ground_truth(const ScenarioConfig& config, std::uint64_t seed) {
    GroundTruth truth;
    truth.grid = GridSpec::cell_centered(config.len_x, config.len_y,
                                         config.grid_spacing / config.truth_refine);
    truth.dt = config.dt;
    truth.seed = seed;
    truth.kernel = config.kernel;

    const auto points = truth.grid.points();
    const Eigen::Index g = truth.grid.count();

    Eigen::MatrixXd kmat = kernel_matrix(config.kernel, points, points);
    kmat.diagonal().array() += 1e-9 * config.kernel.variance();
    const Eigen::LLT<Eigen::MatrixXd> llt(kmat);
    if (llt.info() != Eigen::Success)
        throw NumericalError("generate_ground_truth: prior Cholesky failed");
    const Eigen::MatrixXd chol_l = llt.matrixL();

    const Eigen::VectorXd rates = rates_on_grid(config, truth.grid);
    const Eigen::VectorXd inc_std = (rates.array() * config.dt).sqrt();
    const int steps = config.steps();

    truth.fields.resize(static_cast<std::size_t>(config.components));
    for (int comp = 0; comp < config.components; ++comp) {
        RandomStream rng(seed, truth_stream_name(comp));
        Eigen::VectorXd z(g);
        for (Eigen::Index i = 0; i < g; ++i) z[i] = rng.gaussian();

        auto& series = truth.fields[static_cast<std::size_t>(comp)];
        series.reserve(static_cast<std::size_t>(steps) + 1);
        series.push_back(Eigen::VectorXd::Constant(g, config.prior_mean) + chol_l * z);
        for (int k = 1; k <= steps; ++k) {
            Eigen::VectorXd next = series.back();
            for (Eigen::Index i = 0; i < g; ++i)
                next[i] += inc_std[i] * rng.gaussian();
            series.push_back(std::move(next));
        }
    }
    return truth;
}

MeasurementBatch measure(const GroundTruth& truth, int component, int step,
                         std::span<const Vec2> positions, double noise_var,
                         RandomStream& rng, const DomainBox& domain) {
    if (noise_var < 0.0) throw std::invalid_argument("measure: negative noise variance");
    MeasurementBatch batch;
    batch.t = step * truth.dt;
    batch.positions.assign(positions.begin(), positions.end());
    batch.values.resize(static_cast<Eigen::Index>(positions.size()));
    batch.noise_var =
        Eigen::VectorXd::Constant(static_cast<Eigen::Index>(positions.size()), noise_var);
    const double noise_std = std::sqrt(noise_var);
    for (std::size_t i = 0; i < positions.size(); ++i) {
        if (!domain.contains(positions[i]))
            throw DataError("measure: position outside domain");
        batch.values[static_cast<Eigen::Index>(i)] =
            truth.value_at(component, step, positions[i]) + noise_std * rng.gaussian();
    }
    return batch;
}

Vec2 step_dynamics(const Vec2& x, const Vec2& u, double dt, const DomainBox& domain) {
    return domain.clamp(x + u * dt);
}

namespace {

Eigen::VectorXd rates_on_grid(const ScenarioConfig& config, const GridSpec& grid) {
    const Eigen::Index g = grid.count();
    if (config.sigma_t_sq_file.empty())
        return Eigen::VectorXd::Constant(g, config.sigma_t_sq);

    const csv::Table table = csv::read(config.sigma_t_sq_file);
    const std::size_t cx = table.column("x_km");
    const std::size_t cy = table.column("y_km");
    const std::size_t cv = table.column("sigma_t_sq");
    if (table.rows.empty())
        throw DataError("sigma_t_sq_file has no data rows: " + config.sigma_t_sq_file);

    std::vector<Vec2> pts(table.rows.size());
    std::vector<double> vals(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        pts[r] = {table.number(r, cx), table.number(r, cy)};
        vals[r] = table.number(r, cv);
        if (vals[r] < 0.0)
            throw DataError("sigma_t_sq_file: negative rate at row " + std::to_string(r + 2));
    }

    Eigen::VectorXd rates(g);
    for (Eigen::Index i = 0; i < g; ++i) {
        const Vec2 p = grid.point(static_cast<int>(i));
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::max();
        for (std::size_t r = 0; r < pts.size(); ++r) {
            const double d = (pts[r] - p).squaredNorm();
            if (d < best_d) {
                best_d = d;
                best = r;
            }
        }
        rates[i] = vals[best];
    }
    return rates;
}

ClarityMap effective_clarity(const std::vector<FilterState>& states, const GridSpec& grid,
                             const Eigen::VectorXd& q_target) {
    ClarityMap map = clarity_map_from_filter(states.front(), grid, q_target);
    for (std::size_t c = 1; c < states.size(); ++c) {
        const ClarityMap other = clarity_map_from_filter(states[c], grid, q_target);
        // conservative aggregation: worst component governs the deficit
        map.q = map.q.cwiseMin(other.q);
    }
    return map;
}

double rmse_against_truth(const FilterState& state, const GridSpec& grid,
                          const GroundTruth& truth, int component, int step) {
    double acc = 0.0;
    const Eigen::Index g = grid.count();
    for (Eigen::Index i = 0; i < g; ++i) {
        const double tv = truth.value_at(component, step, grid.point(static_cast<int>(i)));
        const double e = state.mean[i] - tv;
        acc += e * e;
    }
    return std::sqrt(acc / static_cast<double>(g));
}

} // namespace

Eigen::VectorXd load_rate_field(const ScenarioConfig& config, const GridSpec& grid) {
    return rates_on_grid(config, grid);
}

RunResult run_scenario(const ScenarioConfig& config) {
    config.validate();

    RunResult result;
    result.config = config;
    result.grid = config.filter_grid();
    const DomainBox domain = config.domain();
    const Eigen::Index g = result.grid.count();
    const Eigen::VectorXd q_target = Eigen::VectorXd::Constant(g, config.q_target);
    const Eigen::VectorXd rates = load_rate_field(config, result.grid);

    const GroundTruth truth = generate_ground_truth(config, config.seed);
    result.truth_grid = truth.grid;

    const Ngpkf filter(result.grid, config.kernel, domain);
    std::vector<FilterState> states(static_cast<std::size_t>(config.components),
                                    filter.init_prior(config.prior_mean, 0.0));

    std::vector<Vec2> positions = config.resolved_starts();
    const int n_agents = config.agents;
    result.distance_traveled.assign(static_cast<std::size_t>(n_agents), 0.0);

    ControllerConfig cc;
    cc.policy = config.policy;
    cc.modes = config.modes;
    cc.u_max = config.u_max_kms();
    cc.sample_dt = config.dt;
    cc.tau_max = config.tau_max;
    cc.eps_gradient = config.eps_gradient;
    CoverageController controller(cc, config.kernel, result.grid, config.len_x,
                                  config.len_y, rates, std::max(n_agents, 1));

    RandomStream noise_rng(config.seed, "measurement-noise");

    const int steps = config.steps();
    const auto snapshot_due = [&](int k) {
        if (k == steps) return true;
        return config.snapshot_every > 0 && k % config.snapshot_every == 0;
    };

    const auto log_metrics = [&](int k, const ClarityMap& clarity) {
        StepMetrics m;
        m.t = k * config.dt;
        m.mean_clarity_deficit = mean_clarity_deficit(clarity);
        m.rmse_x = rmse_against_truth(states[0], result.grid, truth, 0, k);
        m.rmse_y = states.size() > 1
                       ? rmse_against_truth(states[1], result.grid, truth, 1, k)
                       : 0.0;
        result.metrics.push_back(m);
    };

    const auto log_snapshot = [&](int k, const ClarityMap& clarity) {
        result.clarity_snapshots.push_back({k * config.dt, clarity});
        FieldSnapshot2 f;
        f.t = k * config.dt;
        for (int c = 0; c < config.components; ++c) {
            f.truth.push_back(truth.fields[static_cast<std::size_t>(c)]
                                           [static_cast<std::size_t>(k)]);
            f.est_mean.push_back(states[static_cast<std::size_t>(c)].mean);
            f.est_var.push_back(states[static_cast<std::size_t>(c)].variance_diag());
        }
        result.field_snapshots.push_back(std::move(f));
    };

    ClarityMap clarity = effective_clarity(states, result.grid, q_target);
    log_metrics(0, clarity);
    if (snapshot_due(0) && steps > 0) log_snapshot(0, clarity);

    for (int k = 1; k <= steps; ++k) {
        const double t = k * config.dt;

        for (auto& state : states) state = filter.predict(state, config.dt, rates);

        if (n_agents > 0) {
            for (int c = 0; c < config.components; ++c) {
                const MeasurementBatch batch = measure(truth, c, k, positions,
                                                       config.kernel.noise_var,
                                                       noise_rng, domain);
                for (int i = 0; i < n_agents; ++i)
                    result.measurements.push_back(
                        {t, i, positions[static_cast<std::size_t>(i)], c,
                         batch.values[i]});
                states[static_cast<std::size_t>(c)] =
                    filter.correct(states[static_cast<std::size_t>(c)], batch);
            }
        }

        clarity = effective_clarity(states, result.grid, q_target);

        if (n_agents > 0) {
            controller.record_visits(positions, config.dt);
            const auto decisions = fleet_step(controller, clarity, t, positions);
            for (int i = 0; i < n_agents; ++i) {
                const auto ui = static_cast<std::size_t>(i);
                result.trajectories.push_back({t, i, positions[ui],
                                               decisions[ui].u * 1000.0,
                                               decisions[ui].fallback});
                const Vec2 moved = step_dynamics(positions[ui], decisions[ui].u,
                                                 config.dt, domain);
                result.distance_traveled[ui] += (moved - positions[ui]).norm();
                positions[ui] = moved;
            }
        }

        log_metrics(k, clarity);
        if (snapshot_due(k)) log_snapshot(k, clarity);
    }

    result.final_clarity = clarity;
    result.final_states = std::move(states);
    result.final_positions = std::move(positions);
    return result;
}

} // namespace claricov
