#include "claricov/control.hpp"

#include "claricov/simd.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace claricov {

const char* coverage_policy_name(CoveragePolicy policy) {
    return policy == CoveragePolicy::Direct ? "direct" : "indirect";
}

DirectField build_direct_field(const ClarityMap& map, const CosineBasis& basis,
                               const Eigen::MatrixXd& lambda,
                               const KernelParams& params, double sample_dt) {
    const Eigen::Index g = map.grid.count();

    const SpectralCoeffs q_hat = basis.transform(map.q);
    const SpectralCoeffs target_hat = basis.transform(map.q_target);
    SpectralCoeffs deficit = q_hat;
    deficit.c = target_hat.c - q_hat.c;

    DirectField field;
    field.params = params;
    field.sample_dt = sample_dt;
    const double delta = map.grid.spacing / 10.0;
    field.delta_sq = delta * delta;

    const Eigen::VectorXd psi = basis.inverse_transform(deficit, &lambda);
    const double area = basis.cell_area();
    field.weight.resize(g);
    for (Eigen::Index i = 0; i < g; ++i) {
        const double a = 1.0 - map.q[i];
        field.weight[i] = area * a * a * psi[i];
    }

    field.px.resize(static_cast<std::size_t>(g));
    field.py.resize(static_cast<std::size_t>(g));
    for (Eigen::Index i = 0; i < g; ++i) {
        const Vec2 p = map.grid.point(static_cast<int>(i));
        field.px[static_cast<std::size_t>(i)] = p.x();
        field.py[static_cast<std::size_t>(i)] = p.y();
    }
    return field;
}

Eigen::RowVector2d direct_gradient(const DirectField& field, const Vec2& x) {
    const std::size_t g = field.px.size();
    const double k0 = field.params.variance();
    const double r_noise = field.params.noise_var;
    const double len = field.params.length_scale;
    const bool matern = field.params.family == KernelFamily::Matern12;
    // Matern needs the smooth-at-origin composite distance; SE is already
    // differentiable and uses the exact kernel.
    const double delta_sq = matern ? field.delta_sq : 0.0;

    std::vector<double> d2(g), krow(g);
    simd::squared_distances(x.x(), x.y(), field.px.data(), field.py.data(), d2.data(), g);
    if (matern)
        simd::kernel_row_matern12(d2.data(), k0, 1.0 / len, delta_sq, krow.data(), g);
    else
        simd::kernel_row_se(d2.data(), k0, 0.5 / (len * len), krow.data(), g);

    // dS/dx = 2 C dt (k0 + R) / V^2 * dC/dd * (x-p)/d, with the direction
    // factor absorbed so nothing divides by zero at x = p.
    double acc_x = 0.0, acc_y = 0.0;
    for (std::size_t i = 0; i < g; ++i) {
        const double c = krow[i] / k0;
        const double v = k0 * (1.0 - c * c) + r_noise;
        const double common = 2.0 * c * field.sample_dt * (k0 + r_noise) / (v * v);
        double coeff;
        if (matern) {
            const double d_reg = std::sqrt(d2[i] + delta_sq);
            coeff = -common * c / (len * d_reg);
        } else {
            coeff = -common * c / (len * len);
        }
        const double w = field.weight[static_cast<Eigen::Index>(i)] * coeff;
        acc_x += w * (x.x() - field.px[i]);
        acc_y += w * (x.y() - field.py[i]);
    }
    return {acc_x, acc_y};
}

ControlDecision pi_direct(const DirectField& field, const ClarityMap& map,
                          const Vec2& x, const RobotModel& model,
                          double eps_gradient) {
    const Eigen::RowVector2d l_row = direct_gradient(field, x);
    const double norm = l_row.norm();
    ControlDecision out;
    if (norm > eps_gradient) {
        // G = I for the single integrator, so u = u_max L^T / |L|
        out.u = model.u_max * l_row.transpose() / norm;
        return out;
    }

    // Flat gradient: steer toward the largest remaining clarity deficit.
    out.fallback = true;
    Eigen::Index best = -1;
    double best_deficit = 0.0;
    for (Eigen::Index i = 0; i < map.q.size(); ++i) {
        const double d = map.q_target[i] - map.q[i];
        if (d > best_deficit) {
            best_deficit = d;
            best = i;
        }
    }
    if (best < 0) return out; // target met everywhere: hold
    const Vec2 dir = map.grid.point(static_cast<int>(best)) - x;
    const double dist = dir.norm();
    if (dist > 1e-12) out.u = model.u_max * dir / dist;
    return out;
}

Eigen::VectorXd compute_tsd(const ClarityMap& map, const KernelParams& params,
                            double sample_dt, const Eigen::VectorXd& w_rates,
                            double tau_max) {
    const Eigen::Index g = map.grid.count();
    if (w_rates.size() != g) throw ConfigError("compute_tsd: rate vector size mismatch");
    // Robot parked on the point: C = 1, V = R.
    const double s_on_point = sample_dt / params.noise_var;

    Eigen::VectorXd tsd(g);
    double total = 0.0;
    for (Eigen::Index i = 0; i < g; ++i) {
        double tau = 0.0;
        if (map.q[i] < map.q_target[i]) {
            const ClarityDynParams dyn{s_on_point, w_rates[i], map.q[i]};
            tau = std::min(time_to_clarity_or_inf(dyn, map.q_target[i]), tau_max);
        }
        tsd[i] = tau;
        total += tau;
    }
    if (total <= 0.0) return tsd; // no deficit anywhere
    const double area = map.grid.spacing * map.grid.spacing;
    return tsd / (total * area);
}

TrajectoryAccumulator::TrajectoryAccumulator(const CosineBasis& basis, int n_agents)
    : basis_(&basis), n_agents_(n_agents) {
    accum_.k1 = basis.k1();
    accum_.k2 = basis.k2();
    accum_.len1 = basis.len1();
    accum_.len2 = basis.len2();
    accum_.c = Eigen::MatrixXd::Zero(basis.k1() + 1, basis.k2() + 1);
}

void TrajectoryAccumulator::record(std::span<const Vec2> positions, double dt) {
    // Separable outer product: per agent only k1+k2+2 cosine evaluations.
    const int k1 = accum_.k1, k2 = accum_.k2;
    Eigen::VectorXd cx(k1 + 1), cy(k2 + 1);
    for (const auto& p : positions) {
        for (int l1 = 0; l1 <= k1; ++l1) cx[l1] = basis_->axis_eval_x(l1, p.x());
        for (int l2 = 0; l2 <= k2; ++l2) cy[l2] = basis_->axis_eval_y(l2, p.y());
        accum_.c.noalias() += dt * cx * cy.transpose();
    }
    elapsed_ += dt;
}

SpectralCoeffs TrajectoryAccumulator::empirical_coeffs() const {
    SpectralCoeffs out = accum_;
    if (elapsed_ > 0.0) out.c /= (static_cast<double>(n_agents_) * elapsed_);
    return out;
}

SpectralCoeffs TrajectoryAccumulator::scaled_mismatch(const SpectralCoeffs& phi_hat) const {
    if (!accum_.same_index_set(phi_hat))
        throw ConfigError("scaled_mismatch: coefficient index sets differ");
    SpectralCoeffs out = accum_;
    out.c = accum_.c / static_cast<double>(n_agents_) - elapsed_ * phi_hat.c;
    return out;
}

ControlDecision pi_indirect(const CosineBasis& basis, const Eigen::MatrixXd& lambda,
                            const SpectralCoeffs& scaled_mismatch, const Vec2& x,
                            const RobotModel& model, double eps_gradient,
                            bool tsd_is_zero) {
    ControlDecision out;
    if (tsd_is_zero) return out; // target met: hold
    // Every mode gradient vanishes identically on the domain walls, so an
    // agent clamped exactly onto the boundary would read a zero normal
    // component forever. Evaluate the law a hair inside.
    const double inset_x = 1e-3 * basis.len1();
    const double inset_y = 1e-3 * basis.len2();
    const Vec2 xe{std::clamp(x.x(), inset_x, basis.len1() - inset_x),
                  std::clamp(x.y(), inset_y, basis.len2() - inset_y)};
    const Vec2 b = basis.synthesize_grad_at(scaled_mismatch, xe, &lambda);
    const double norm = b.norm();
    if (norm <= eps_gradient) return out;
    out.u = -model.u_max * b / norm;
    return out;
}

namespace {

double default_eps_gradient(const ControllerConfig& config, const KernelParams& params) {
    if (config.eps_gradient > 0.0) return config.eps_gradient;
    return 1e-9 * (config.u_max * 1000.0) * params.variance();
}

} // namespace

CoverageController::CoverageController(const ControllerConfig& config,
                                       const KernelParams& params, const GridSpec& grid,
                                       double domain_len1, double domain_len2,
                                       const Eigen::VectorXd& w_rates, int n_agents)
    : config_(config),
      params_(params),
      grid_(grid),
      w_rates_(w_rates),
      basis_(grid, domain_len1, domain_len2, config.modes, config.modes),
      lambda_(sobolev_weights(config.modes, config.modes)),
      model_{config.u_max},
      eps_gradient_(default_eps_gradient(config, params)),
      accumulator_(basis_, n_agents) {
    if (w_rates_.size() != grid_.count())
        throw ConfigError("CoverageController: rate vector size mismatch");
}

void CoverageController::begin_step(const ClarityMap& map, double /*t*/) {
    map_ = map;
    if (config_.policy == CoveragePolicy::Direct) {
        direct_field_ = build_direct_field(map, basis_, lambda_, params_, config_.sample_dt);
    } else {
        const Eigen::VectorXd density =
            compute_tsd(map, params_, config_.sample_dt, w_rates_, config_.tau_max);
        tsd_zero_ = density.isZero(0.0);
        phi_hat_ = basis_.transform(density);
        mismatch_ = accumulator_.scaled_mismatch(phi_hat_);
    }
    step_ready_ = true;
}

ControlDecision CoverageController::control(const Vec2& x) const {
    if (!step_ready_) throw ConfigError("CoverageController: begin_step not called");
    if (config_.policy == CoveragePolicy::Direct)
        return pi_direct(direct_field_, map_, x, model_, eps_gradient_);
    return pi_indirect(basis_, lambda_, mismatch_, x, model_, eps_gradient_, tsd_zero_);
}

void CoverageController::record_visits(std::span<const Vec2> positions, double dt) {
    accumulator_.record(positions, dt);
}

double CoverageController::ergodicity_metric() const {
    if (config_.policy != CoveragePolicy::Indirect || !step_ready_) return 0.0;
    return sobolev_distance_sq(accumulator_.empirical_coeffs(), phi_hat_, lambda_);
}

std::vector<ControlDecision> fleet_step(CoverageController& controller,
                                        const ClarityMap& map, double t,
                                        std::span<const Vec2> positions) {
    controller.begin_step(map, t);
    std::vector<ControlDecision> out;
    out.reserve(positions.size());
    for (const auto& x : positions) out.push_back(controller.control(x));
    return out;
}

} // namespace claricov
