#include <claricov/control.hpp>
#include <claricov/rng.hpp>

#include <doctest.h>

#include <chrono>
#include <cmath>
#include <numbers>

#include "test_util.hpp"

using namespace claricov;

namespace {

const KernelParams kParams{KernelFamily::Matern12, 3.49, 0.944, 0.25};
const double kDt = 5.0;

ClarityMap make_map(const GridSpec& grid, double q_value, double q_target) {
    ClarityMap map;
    map.grid = grid;
    map.q = Eigen::VectorXd::Constant(grid.count(), q_value);
    map.q_target = Eigen::VectorXd::Constant(grid.count(), q_target);
    return map;
}

// Test-side sensing rate with the same composite-distance regularization the
// gradient path uses for the Matern kernel.
double sensing_reg(const KernelParams& p, const Vec2& x, const Vec2& pt, double dt,
                   double delta_sq) {
    const double k0 = p.variance();
    const double d2 = (x - pt).squaredNorm();
    double k;
    if (p.family == KernelFamily::Matern12)
        k = k0 * std::exp(-std::sqrt(d2 + delta_sq) / p.length_scale);
    else
        k = k0 * std::exp(-0.5 * d2 / (p.length_scale * p.length_scale));
    const double c = k / k0;
    const double v = k0 * (1.0 - c * c) + p.noise_var;
    return c * c * dt / v;
}

// Independent oracle: the scalar potential whose spatial gradient is L(t,x),
// evaluated mode by mode with direct quadrature loops.
double direct_potential(const ClarityMap& map, const CosineBasis& basis,
                        const Eigen::MatrixXd& lam, const KernelParams& params,
                        double dt, const Vec2& x, double delta_sq) {
    const SpectralCoeffs dq = [&] {
        SpectralCoeffs d = basis.transform(map.q_target);
        d.c -= basis.transform(map.q).c;
        return d;
    }();
    const double area = basis.cell_area();
    double acc = 0.0;
    for (int l1 = 0; l1 <= basis.k1(); ++l1)
        for (int l2 = 0; l2 <= basis.k2(); ++l2) {
            double b_integral = 0.0;
            for (int i = 0; i < map.grid.count(); ++i) {
                const Vec2 p = map.grid.point(i);
                const double a = 1.0 - map.q[i];
                b_integral += area * a * a * sensing_reg(params, x, p, dt, delta_sq) *
                              basis.eval(l1, l2, p);
            }
            acc += lam(l1, l2) * dq.c(l1, l2) * b_integral;
        }
    return acc;
}

} // namespace

TEST_CASE("direct gradient") {
    const GridSpec grid = GridSpec::cell_centered(2.0, 2.0, 0.1);
    const CosineBasis basis(grid, 2.0, 2.0, 8, 8);
    const Eigen::MatrixXd lam = sobolev_weights(8, 8);

    SUBCASE("zero when clarity equals the target everywhere") {
        const ClarityMap map = make_map(grid, 0.8, 0.8);
        const DirectField field = build_direct_field(map, basis, lam, kParams, kDt);
        const Eigen::RowVector2d l_row = direct_gradient(field, {0.7, 1.1});
        CHECK(l_row.norm() == 0.0);
    }

    SUBCASE("vanishes by symmetry for a radial deficit centered on the robot") {
        const Vec2 center{1.0, 1.0};
        ClarityMap map = make_map(grid, 0.5, 0.8);
        for (int i = 0; i < grid.count(); ++i) {
            const double r = (grid.point(i) - center).norm();
            map.q[i] = 0.75 - 0.5 * std::exp(-r * r);
        }
        const DirectField field = build_direct_field(map, basis, lam, kParams, kDt);
        const double sym = direct_gradient(field, center).norm();

        ClarityMap lopsided = map;
        lopsided.q[grid.index(2, 10)] = 0.05;
        const DirectField field2 = build_direct_field(lopsided, basis, lam, kParams, kDt);
        const double asym = direct_gradient(field2, center).norm();

        CHECK(sym < 1e-6);
        CHECK(asym > 100.0 * sym);
    }

    SUBCASE("points toward an isolated clarity hole") {
        ClarityMap map = make_map(grid, 0.8, 0.8);
        const Vec2 x{0.6, 1.05};
        map.q[grid.index(14, 10)] = 0.1; // hole east of x, same row
        const DirectField field = build_direct_field(map, basis, lam, kParams, kDt);
        const Eigen::RowVector2d l_row = direct_gradient(field, x);
        CHECK(l_row(0) > 0.0);
        CHECK(std::abs(l_row(0)) > 5.0 * std::abs(l_row(1)));
    }

    SUBCASE("matches finite differences of the spectral potential") {
        RandomStream rng(51, "direct-fd");
        for (const auto family :
             {KernelFamily::Matern12, KernelFamily::SquaredExponential}) {
            KernelParams params = kParams;
            params.family = family;
            ClarityMap map = make_map(grid, 0.3, 0.8);
            for (int i = 0; i < grid.count(); ++i)
                map.q[i] = 0.1 + 0.7 * rng.uniform();

            const DirectField field = build_direct_field(map, basis, lam, params, kDt);
            const double delta_sq = field.delta_sq; // (spacing/10)^2, Matern only
            const double used_delta_sq =
                family == KernelFamily::Matern12 ? delta_sq : 0.0;

            const Vec2 x{0.83, 1.37};
            const Eigen::RowVector2d l_row = direct_gradient(field, x);

            const double h = 1e-4;
            const auto phi = [&](const Vec2& xq) {
                return direct_potential(map, basis, lam, params, kDt, xq, used_delta_sq);
            };
            const double fdx = (phi({x.x() + h, x.y()}) - phi({x.x() - h, x.y()})) / (2 * h);
            const double fdy = (phi({x.x(), x.y() + h}) - phi({x.x(), x.y() - h})) / (2 * h);
            const double scale = std::max({std::abs(fdx), std::abs(fdy), 1e-9});
            CHECK(std::abs(l_row(0) - fdx) / scale < 1e-4);
            CHECK(std::abs(l_row(1) - fdy) / scale < 1e-4);
        }
    }
}

TEST_CASE("pi_direct") {
    const GridSpec grid = GridSpec::cell_centered(2.0, 1.0, 0.1);
    const CosineBasis basis(grid, 2.0, 1.0, 8, 8);
    const Eigen::MatrixXd lam = sobolev_weights(8, 8);
    const RobotModel model{0.03};
    const double eps = 1e-9 * 30.0 * kParams.variance();

    SUBCASE("saturates at u_max when the gradient is informative") {
        RandomStream rng(53, "pi-direct");
        ClarityMap map = make_map(grid, 0.3, 0.8);
        for (int i = 0; i < grid.count(); ++i) map.q[i] = 0.1 + 0.7 * rng.uniform();
        const DirectField field = build_direct_field(map, basis, lam, kParams, kDt);
        const ControlDecision d = pi_direct(field, map, {0.9, 0.4}, model, eps);
        CHECK(!d.fallback);
        CHECK(d.u.norm() == doctest::Approx(model.u_max).epsilon(1e-12));
    }

    SUBCASE("fallback steers at u_max toward the deficit argmax") {
        ClarityMap map = make_map(grid, 0.5, 0.8);
        const Vec2 x{1.05, 0.15};
        map.q[grid.index(10, 8)] = 0.05; // worst deficit due north of x
        const DirectField field = build_direct_field(map, basis, lam, kParams, kDt);
        // force the flat-gradient branch with an absurd threshold
        const ControlDecision d = pi_direct(field, map, x, model, 1e12);
        CHECK(d.fallback);
        CHECK(d.u.norm() == doctest::Approx(model.u_max).epsilon(1e-12));
        const Vec2 expect_dir = (grid.point(grid.index(10, 8)) - x).normalized();
        CHECK(d.u.normalized().dot(expect_dir) == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("fallback holds when the target is met everywhere") {
        const ClarityMap map = make_map(grid, 0.9, 0.8);
        const DirectField field = build_direct_field(map, basis, lam, kParams, kDt);
        const ControlDecision d = pi_direct(field, map, {1.0, 0.5}, model, 1e12);
        CHECK(d.fallback);
        CHECK(d.u.norm() == 0.0);
    }

    SUBCASE("the returned direction beats a 1-degree sweep") {
        RandomStream rng(59, "sweep");
        for (int rep = 0; rep < 10; ++rep) {
            ClarityMap map = make_map(grid, 0.3, 0.8);
            for (int i = 0; i < grid.count(); ++i) map.q[i] = 0.05 + 0.9 * rng.uniform();
            const DirectField field = build_direct_field(map, basis, lam, kParams, kDt);
            const Vec2 x{rng.uniform(0.1, 1.9), rng.uniform(0.1, 0.9)};
            const Eigen::RowVector2d l_row = direct_gradient(field, x);
            const ControlDecision d = pi_direct(field, map, x, model, eps);
            if (d.fallback) continue;
            const double best = l_row * d.u;
            for (int deg = 0; deg < 360; ++deg) {
                const double a = deg * std::numbers::pi / 180.0;
                const Vec2 v{model.u_max * std::cos(a), model.u_max * std::sin(a)};
                CHECK(l_row * v <= best + 1e-9 * std::abs(best));
            }
        }
    }
}

TEST_CASE("compute_tsd") {
    const GridSpec grid = GridSpec::cell_centered(2.0, 1.0, 0.1);
    const Eigen::VectorXd w = Eigen::VectorXd::Constant(grid.count(), 1e-3);
    const double area = grid.spacing * grid.spacing;

    SUBCASE("no deficit, no target time") {
        const ClarityMap map = make_map(grid, 0.8, 0.8);
        const Eigen::VectorXd tsd = compute_tsd(map, kParams, kDt, w, 3600.0);
        CHECK(tsd.cwiseAbs().maxCoeff() == 0.0);
    }

    SUBCASE("uniform deficit yields the uniform density") {
        const ClarityMap map = make_map(grid, 0.3, 0.8);
        const Eigen::VectorXd tsd = compute_tsd(map, kParams, kDt, w, 3600.0);
        for (int i = 0; i < grid.count(); ++i)
            CHECK(tsd[i] == doctest::Approx(1.0 / (2.0 * 1.0)).epsilon(1e-12));
        CHECK(tsd.sum() * area == doctest::Approx(1.0).epsilon(1e-9));
    }

    SUBCASE("lower clarity gets strictly more density") {
        ClarityMap map = make_map(grid, 0.5, 0.8);
        for (int i = 0; i < grid.count() / 2; ++i) map.q[i] = 0.2;
        const Eigen::VectorXd tsd = compute_tsd(map, kParams, kDt, w, 3600.0);
        CHECK(tsd[0] > tsd[grid.count() - 1]);
        CHECK(tsd.sum() * area == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(tsd.minCoeff() >= 0.0);
    }

    SUBCASE("unreachable targets clamp at tau_max") {
        // enormous decay rate makes q_inf < q_target
        const Eigen::VectorXd w_huge = Eigen::VectorXd::Constant(grid.count(), 1e9);
        ClarityMap map = make_map(grid, 0.1, 0.8);
        map.q[0] = 0.79; // reachable? no: q_inf ~ 0 for huge W, everything clamps
        const double tau_max = 120.0;
        const Eigen::VectorXd tsd = compute_tsd(map, kParams, kDt, w_huge, tau_max);
        // all points clamp to tau_max, so the density is uniform again
        for (int i = 0; i < grid.count(); ++i)
            CHECK(tsd[i] == doctest::Approx(1.0 / 2.0).epsilon(1e-12));
    }
}

TEST_CASE("trajectory accumulator") {
    const GridSpec grid = GridSpec::cell_centered(1.0, 1.0, 0.1);
    const CosineBasis basis(grid, 1.0, 1.0, 6, 6);

    SUBCASE("a parked robot reproduces the delta-distribution coefficients") {
        TrajectoryAccumulator acc(basis, 1);
        const Vec2 x{0.31, 0.62};
        for (int k = 0; k < 40; ++k) acc.record(std::vector<Vec2>{x}, 0.5);
        const SpectralCoeffs c = acc.empirical_coeffs();
        for (int l1 = 0; l1 <= 6; ++l1)
            for (int l2 = 0; l2 <= 6; ++l2)
                CHECK(c.c(l1, l2) ==
                      doctest::Approx(basis.eval(l1, l2, x)).epsilon(1e-12));
    }

    SUBCASE("multi-agent average over two parked robots") {
        TrajectoryAccumulator acc(basis, 2);
        const Vec2 a{0.2, 0.2}, b{0.8, 0.7};
        acc.record(std::vector<Vec2>{a, b}, 1.0);
        const SpectralCoeffs c = acc.empirical_coeffs();
        CHECK(c.c(2, 1) == doctest::Approx(0.5 * (basis.eval(2, 1, a) +
                                                  basis.eval(2, 1, b))).epsilon(1e-12));
    }
}

TEST_CASE("pi_indirect") {
    const GridSpec grid = GridSpec::cell_centered(1.0, 1.0, 0.05);
    const CosineBasis basis(grid, 1.0, 1.0, 8, 8);
    const Eigen::MatrixXd lam = sobolev_weights(8, 8);
    const RobotModel model{0.05};
    const double eps = 1e-9 * 50.0;

    SUBCASE("holds when the TSD is identically zero") {
        TrajectoryAccumulator acc(basis, 1);
        acc.record(std::vector<Vec2>{{0.4, 0.4}}, 1.0);
        SpectralCoeffs phi = basis.transform(Eigen::VectorXd::Zero(grid.count()));
        const ControlDecision d =
            pi_indirect(basis, lam, acc.scaled_mismatch(phi), {0.4, 0.4}, model, eps, true);
        CHECK(d.u.norm() == 0.0);
    }

    SUBCASE("saturates at u_max otherwise") {
        TrajectoryAccumulator acc(basis, 1);
        acc.record(std::vector<Vec2>{{0.2, 0.2}}, 5.0);
        const SpectralCoeffs phi =
            basis.transform(Eigen::VectorXd::Constant(grid.count(), 1.0));
        const ControlDecision d =
            pi_indirect(basis, lam, acc.scaled_mismatch(phi), {0.2, 0.2}, model, eps, false);
        CHECK(d.u.norm() == doctest::Approx(model.u_max).epsilon(1e-12));
    }

    SUBCASE("long run over a uniform TSD becomes ergodic") {
        // single agent chasing the uniform density; the Sobolev mismatch of
        // its visit distribution must fall by at least 10x
        TrajectoryAccumulator acc(basis, 1);
        const SpectralCoeffs phi =
            basis.transform(Eigen::VectorXd::Constant(grid.count(), 1.0));
        const DomainBox box{{0.0, 0.0}, {1.0, 1.0}};
        Vec2 x{0.52, 0.5};
        const double dt = 1.0;
        double start_metric = -1.0;
        for (int k = 0; k < 4000; ++k) {
            acc.record(std::vector<Vec2>{x}, dt);
            if (k == 20)
                start_metric = sobolev_distance_sq(acc.empirical_coeffs(), phi, lam);
            const ControlDecision d =
                pi_indirect(basis, lam, acc.scaled_mismatch(phi), x, model, eps, false);
            x = box.clamp(x + d.u * dt);
        }
        const double end_metric = sobolev_distance_sq(acc.empirical_coeffs(), phi, lam);
        CHECK(end_metric < 0.1 * start_metric);
        CHECK(end_metric < 0.05); // close to uniform in absolute terms too
    }
}

TEST_CASE("fleet_step") {
    const GridSpec grid = GridSpec::cell_centered(2.0, 1.0, 0.1);
    ControllerConfig cc;
    cc.policy = CoveragePolicy::Direct;
    cc.modes = 8;
    cc.u_max = 0.03;
    cc.sample_dt = kDt;
    const Eigen::VectorXd rates = Eigen::VectorXd::Constant(grid.count(), 1e-3);

    RandomStream rng(61, "fleet");
    ClarityMap map = make_map(grid, 0.3, 0.8);
    for (int i = 0; i < grid.count(); ++i) map.q[i] = 0.1 + 0.7 * rng.uniform();

    SUBCASE("single agent reduces to the single-robot policy") {
        CoverageController ctrl(cc, kParams, grid, 2.0, 1.0, rates, 1);
        const Vec2 x{0.5, 0.5};
        const auto decisions = fleet_step(ctrl, map, 0.0, std::vector<Vec2>{x});
        REQUIRE(decisions.size() == 1);
        const ControlDecision single = ctrl.control(x);
        CHECK(decisions[0].u == single.u);
    }

    SUBCASE("permuting agents permutes outputs") {
        CoverageController ctrl(cc, kParams, grid, 2.0, 1.0, rates, 3);
        const std::vector<Vec2> xs{{0.3, 0.2}, {1.1, 0.8}, {1.9, 0.4}};
        const std::vector<Vec2> rev{xs[2], xs[1], xs[0]};
        const auto a = fleet_step(ctrl, map, 0.0, xs);
        const auto b = fleet_step(ctrl, map, 0.0, rev);
        for (int i = 0; i < 3; ++i) {
            CHECK(a[static_cast<std::size_t>(i)].u ==
                  b[static_cast<std::size_t>(2 - i)].u);
        }
    }

    SUBCASE("cost scales at most linearly in fleet size") {
        using clock = std::chrono::steady_clock;
        CoverageController ctrl1(cc, kParams, grid, 2.0, 1.0, rates, 1);
        CoverageController ctrl10(cc, kParams, grid, 2.0, 1.0, rates, 10);
        std::vector<Vec2> one{{0.5, 0.5}};
        std::vector<Vec2> ten;
        for (int i = 0; i < 10; ++i) ten.push_back({0.1 + 0.18 * i, 0.5});

        const auto time_of = [&](CoverageController& c, const std::vector<Vec2>& xs) {
            double best = 1e300;
            for (int rep = 0; rep < 3; ++rep) {
                const auto t0 = clock::now();
                for (int it = 0; it < 5; ++it) (void)fleet_step(c, map, 0.0, xs);
                best = std::min(best,
                                std::chrono::duration<double>(clock::now() - t0).count());
            }
            return best;
        };
        const double t1 = time_of(ctrl1, one);
        const double t10 = time_of(ctrl10, ten);
        CHECK(t10 <= 2.0 * 10.0 * t1); // coarse 2x slack; no pairwise coupling
    }
}
