#include <claricov/sim.hpp>

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "test_util.hpp"

using namespace claricov;

namespace {

ScenarioConfig mini_config() {
    ScenarioConfig c;
    c.len_x = 1.5;
    c.len_y = 0.75;
    c.grid_spacing = 0.15;
    c.kernel = {KernelFamily::Matern12, 3.49, 0.944, 0.25};
    c.sigma_t_sq = 1e-4;
    c.agents = 2;
    c.u_max_mps = 30.0;
    c.policy = CoveragePolicy::Direct;
    c.modes = 8;
    c.q_target = 0.8;
    c.dt = 5.0;
    c.horizon = 120.0;
    c.seed = 7;
    c.truth_refine = 2;
    c.snapshot_every = 0;
    c.components = 2;
    return c;
}

} // namespace

TEST_CASE("generate_ground_truth") {
    SUBCASE("zero process noise freezes the field") {
        ScenarioConfig c = mini_config();
        c.sigma_t_sq = 0.0;
        c.horizon = 50.0;
        c.dt = 5.0;
        const GroundTruth truth = generate_ground_truth(c, 42);
        REQUIRE(truth.steps() == 10);
        for (int k = 1; k <= truth.steps(); ++k)
            CHECK((truth.fields[0][static_cast<std::size_t>(k)] -
                   truth.fields[0][0]).cwiseAbs().maxCoeff() == 0.0);
    }

    SUBCASE("one-step increments have the configured variance") {
        ScenarioConfig c = mini_config();
        c.len_x = 2.0;
        c.len_y = 1.0;
        c.grid_spacing = 0.1;
        c.truth_refine = 1;
        c.sigma_t_sq = 0.05;
        c.dt = 4.0;
        c.horizon = 200.0; // 50 steps x 200 points = 1e4 increments
        c.components = 1;
        const GroundTruth truth = generate_ground_truth(c, 11);
        double acc = 0.0;
        std::size_t n = 0;
        for (int k = 1; k <= truth.steps(); ++k) {
            const Eigen::VectorXd diff = truth.fields[0][static_cast<std::size_t>(k)] -
                                         truth.fields[0][static_cast<std::size_t>(k - 1)];
            acc += diff.squaredNorm();
            n += static_cast<std::size_t>(diff.size());
        }
        const double sample_var = acc / static_cast<double>(n);
        CHECK(sample_var == doctest::Approx(0.05 * 4.0).epsilon(0.05));
    }

    SUBCASE("components are independent draws") {
        const GroundTruth truth = generate_ground_truth(mini_config(), 9);
        REQUIRE(truth.components() == 2);
        CHECK((truth.fields[0][0] - truth.fields[1][0]).cwiseAbs().maxCoeff() > 1e-6);
    }

    SUBCASE("initial draw carries the generating kernel's spatial structure") {
        ScenarioConfig c = mini_config();
        c.len_x = 3.0;
        c.len_y = 1.5;
        c.grid_spacing = 0.1;
        c.truth_refine = 1;
        c.kernel = {KernelFamily::Matern12, 1.0, 0.3, 0.25};
        c.components = 1;
        c.horizon = 0.0;
        const GroundTruth truth = generate_ground_truth(c, 3);
        std::vector<Sample> s;
        const auto pts = truth.grid.points();
        for (std::size_t i = 0; i < pts.size(); ++i)
            s.push_back({pts[i], truth.fields[0][0][static_cast<Eigen::Index>(i)]});
        const Variogram vg = empirical_variogram(s, 15, 1.5);
        const KernelFit fit = fit_kernel(vg, KernelFamily::Matern12);
        // single realization: generous confidence bounds
        CHECK(fit.params.sigma == doctest::Approx(1.0).epsilon(0.5));
        CHECK(fit.params.length_scale == doctest::Approx(0.3).epsilon(0.5));
    }
}

TEST_CASE("measure") {
    ScenarioConfig c = mini_config();
    c.components = 1;
    c.horizon = 10.0;
    const GroundTruth truth = generate_ground_truth(c, 5);
    const DomainBox domain = c.domain();

    SUBCASE("noise-free sampling at a truth grid node is exact") {
        RandomStream rng(1, "measure");
        const Vec2 node = truth.grid.point(17);
        const MeasurementBatch b =
            measure(truth, 0, 1, std::vector<Vec2>{node}, 0.0, rng, domain);
        CHECK(b.values[0] == truth.fields[0][1][17]);
    }

    SUBCASE("bilinear interpolation reproduces bilinear fields exactly") {
        GroundTruth flat = truth;
        for (auto& series : flat.fields)
            for (auto& f : series)
                for (int i = 0; i < flat.grid.count(); ++i) {
                    const Vec2 p = flat.grid.point(i);
                    f[i] = 2.0 + 3.0 * p.x() - p.y() + 0.5 * p.x() * p.y();
                }
        RandomStream rng(2, "measure");
        const Vec2 p{0.62137, 0.31411}; // interior, off-node
        const MeasurementBatch b =
            measure(flat, 0, 0, std::vector<Vec2>{p}, 0.0, rng, domain);
        CHECK(b.values[0] ==
              doctest::Approx(2.0 + 3.0 * p.x() - p.y() + 0.5 * p.x() * p.y())
                  .epsilon(1e-12));
    }

    SUBCASE("noise variance matches R") {
        RandomStream rng(3, "measure");
        const Vec2 node = truth.grid.point(5);
        const double truth_val = truth.fields[0][0][5];
        double acc = 0.0;
        const int n = 10000;
        for (int i = 0; i < n; ++i) {
            const MeasurementBatch b =
                measure(truth, 0, 0, std::vector<Vec2>{node}, 0.25, rng, domain);
            const double e = b.values[0] - truth_val;
            acc += e * e;
        }
        CHECK(acc / n == doctest::Approx(0.25).epsilon(0.05));
    }

    SUBCASE("positions outside the domain are rejected") {
        RandomStream rng(4, "measure");
        CHECK_THROWS_AS((void)measure(truth, 0, 0, std::vector<Vec2>{{9.0, 0.1}}, 0.25,
                                      rng, domain),
                        DataError);
    }
}

TEST_CASE("step_dynamics") {
    const DomainBox box{{0.0, 0.0}, {3.0, 1.5}};
    CHECK(step_dynamics({1.0, 0.5}, {0.0, 0.0}, 5.0, box) == Vec2{1.0, 0.5});

    // top speed 30 m/s for 5 s moves 150 m east
    const Vec2 moved = step_dynamics({1.0, 0.5}, {0.03, 0.0}, 5.0, box);
    CHECK(moved.x() == doctest::Approx(1.15).epsilon(1e-12));
    CHECK(moved.y() == 0.5);

    const Vec2 clamped = step_dynamics({2.95, 0.1}, {0.03, -0.03}, 5.0, box);
    CHECK(clamped.x() == 3.0);
    CHECK(clamped.y() == 0.0);
}

TEST_CASE("run_scenario basics") {
    SUBCASE("zero horizon gives prior-only metrics and empty logs") {
        ScenarioConfig c = mini_config();
        c.horizon = 0.0;
        const RunResult r = run_scenario(c);
        REQUIRE(r.metrics.size() == 1);
        CHECK(r.metrics[0].t == 0.0);
        CHECK(r.trajectories.empty());
        CHECK(r.measurements.empty());
        // prior clarity of the default wind kernel against the 0.8 target
        const double prior_q = 1.0 / (1.0 + c.kernel.variance());
        CHECK(r.metrics[0].mean_clarity_deficit ==
              doctest::Approx(0.8 - prior_q).epsilon(1e-6));
    }

    SUBCASE("both controllers reduce the deficit on a mini scenario") {
        for (const auto policy : {CoveragePolicy::Direct, CoveragePolicy::Indirect}) {
            ScenarioConfig c = mini_config();
            c.policy = policy;
            const RunResult r = run_scenario(c);
            const double d0 = r.metrics.front().mean_clarity_deficit;
            const double d1 = r.metrics.back().mean_clarity_deficit;
            CHECK(d1 < d0);
            // reconstruction sanity: beat the prior RMS deviation
            CHECK(r.metrics.back().rmse_x < c.kernel.sigma);
            CHECK(r.metrics.back().rmse_y < c.kernel.sigma);
        }
    }

    SUBCASE("per-agent distance matches the trajectory log") {
        ScenarioConfig c = mini_config();
        const RunResult r = run_scenario(c);
        REQUIRE(r.distance_traveled.size() == 2);
        REQUIRE(r.final_positions.size() == 2);
        for (int agent = 0; agent < 2; ++agent) {
            std::vector<Vec2> path;
            for (const auto& rec : r.trajectories)
                if (rec.agent == agent) path.push_back(rec.position);
            path.push_back(r.final_positions[static_cast<std::size_t>(agent)]);
            double total = 0.0;
            for (std::size_t k = 1; k < path.size(); ++k)
                total += (path[k] - path[k - 1]).norm();
            CHECK(r.distance_traveled[static_cast<std::size_t>(agent)] ==
                  doctest::Approx(total).epsilon(1e-12));
            // never faster than the speed limit allows
            CHECK(r.distance_traveled[static_cast<std::size_t>(agent)] <=
                  c.u_max_kms() * c.horizon + 1e-9);
        }
    }

    SUBCASE("agents never leave the domain") {
        ScenarioConfig c = mini_config();
        c.horizon = 300.0;
        const RunResult r = run_scenario(c);
        const DomainBox box = c.domain();
        for (const auto& rec : r.trajectories) CHECK(box.contains(rec.position));
    }

    SUBCASE("deterministic: identical config and seed give identical logs") {
        const ScenarioConfig c = mini_config();
        const RunResult a = run_scenario(c);
        const RunResult b = run_scenario(c);
        REQUIRE(a.metrics.size() == b.metrics.size());
        for (std::size_t i = 0; i < a.metrics.size(); ++i) {
            CHECK(a.metrics[i].mean_clarity_deficit == b.metrics[i].mean_clarity_deficit);
            CHECK(a.metrics[i].rmse_x == b.metrics[i].rmse_x);
            CHECK(a.metrics[i].rmse_y == b.metrics[i].rmse_y);
        }
        REQUIRE(a.trajectories.size() == b.trajectories.size());
        for (std::size_t i = 0; i < a.trajectories.size(); ++i) {
            CHECK(a.trajectories[i].position == b.trajectories[i].position);
            CHECK(a.trajectories[i].u_mps == b.trajectories[i].u_mps);
        }
    }

    SUBCASE("decay only: without measurements the deficit never decreases") {
        ScenarioConfig c = mini_config();
        c.agents = 0;
        c.horizon = 100.0;
        c.sigma_t_sq = 5e-3;
        const RunResult r = run_scenario(c);
        REQUIRE(r.metrics.size() == 21);
        for (std::size_t k = 1; k < r.metrics.size(); ++k)
            CHECK(r.metrics[k].mean_clarity_deficit >=
                  r.metrics[k - 1].mean_clarity_deficit);
        CHECK(r.trajectories.empty());
    }

    SUBCASE("W = 0 with measurements: per-point clarity never decreases") {
        ScenarioConfig c = mini_config();
        c.sigma_t_sq = 0.0;
        c.snapshot_every = 1;
        c.horizon = 60.0;
        const RunResult r = run_scenario(c);
        REQUIRE(r.clarity_snapshots.size() >= 2);
        for (std::size_t s = 1; s < r.clarity_snapshots.size(); ++s) {
            const auto& prev = r.clarity_snapshots[s - 1].map.q;
            const auto& cur = r.clarity_snapshots[s].map.q;
            for (Eigen::Index i = 0; i < cur.size(); ++i)
                CHECK(cur[i] >= prev[i] - 1e-12);
        }
    }

    SUBCASE("deficit stays within [0,1] and is logged every step") {
        const ScenarioConfig c = mini_config();
        const RunResult r = run_scenario(c);
        REQUIRE(r.metrics.size() == static_cast<std::size_t>(c.steps()) + 1);
        for (const auto& m : r.metrics) {
            CHECK(m.mean_clarity_deficit >= 0.0);
            CHECK(m.mean_clarity_deficit <= 1.0);
        }
    }
}

TEST_CASE("ground truth lives on a refined grid") {
    ScenarioConfig c = mini_config();
    c.truth_refine = 2;
    const GroundTruth truth = generate_ground_truth(c, 1);
    const GridSpec filter = c.filter_grid();
    CHECK(truth.grid.nx == 2 * filter.nx);
    CHECK(truth.grid.ny == 2 * filter.ny);
    CHECK(truth.grid.spacing == doctest::Approx(filter.spacing / 2.0).epsilon(1e-15));
}

TEST_CASE("early-mission deficit falls over every two-minute window") {
    // desk-scale scenario, pre-saturation: any 120 s window must show strict
    // improvement for both controllers
    for (const auto policy : {CoveragePolicy::Direct, CoveragePolicy::Indirect}) {
        ScenarioConfig c;
        c.len_x = 3.0;
        c.len_y = 1.5;
        c.grid_spacing = 0.1;
        c.agents = 3;
        c.policy = policy;
        c.q_target = 0.8;
        c.dt = 5.0;
        c.horizon = 360.0;
        c.seed = 42;
        c.snapshot_every = 0;
        const RunResult r = run_scenario(c);
        const int window = 24; // 120 s of 5 s steps
        for (std::size_t k = 0; k + window < r.metrics.size(); k += 6)
            CHECK(r.metrics[k + window].mean_clarity_deficit <
                  r.metrics[k].mean_clarity_deficit);
    }
}

TEST_CASE("load_rate_field nearest-sample lookup") {
    ScenarioConfig c = mini_config();
    const GridSpec grid = c.filter_grid();

    SUBCASE("constant fallback") {
        const Eigen::VectorXd r = load_rate_field(c, grid);
        CHECK(r.size() == grid.count());
        CHECK(r.minCoeff() == c.sigma_t_sq);
        CHECK(r.maxCoeff() == c.sigma_t_sq);
    }

    SUBCASE("per-point file with nearest-sample lookup") {
        namespace fs = std::filesystem;
        const fs::path path = fs::temp_directory_path() / "claricov-tests" / "rates.csv";
        fs::create_directories(path.parent_path());
        // two samples splitting the domain west/east
        std::ofstream(path) << "x_km,y_km,sigma_t_sq\n0.0,0.4,0.001\n1.5,0.4,0.009\n";
        c.sigma_t_sq_file = path.string();
        const Eigen::VectorXd r = load_rate_field(c, grid);
        CHECK(r[grid.index(0, 2)] == 0.001);
        CHECK(r[grid.index(grid.nx - 1, 2)] == 0.009);

        std::ofstream(path) << "x_km,y_km,sigma_t_sq\n0.0,0.0,-1.0\n";
        CHECK_THROWS_AS((void)load_rate_field(c, grid), DataError);
    }
}
