#pragma once

#include "claricov/clarity.hpp"
#include "claricov/common.hpp"
#include "claricov/kernels.hpp"
#include "claricov/spectral.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace claricov {

enum class CoveragePolicy { Direct, Indirect };

const char* coverage_policy_name(CoveragePolicy policy);

/// Single-integrator robot: xdot = u, |u| <= u_max (km/s internally).
struct RobotModel {
    double u_max = 0.03;
};

/// One policy evaluation; `fallback` marks the direct method's global
/// waypoint escape (or a hold when there is nothing left to gain).
struct ControlDecision {
    Vec2 u{0.0, 0.0};
    bool fallback = false;
};

/// Precomputed per-step integrand for the direct controller. The spectral
/// sum L(t,x) = sum_l Lambda_l (qbar_l - q_l) Bhat_l(t,x) is evaluated with
/// the mode sum folded into a grid field first:
///   L(t,x) = sum_i area (1-q_i)^2 psi_i dS/dx(x, p_i),
///   psi_i = sum_l Lambda_l (qbar_l - q_l) b_l(p_i),
/// which is the same double sum reordered, at O(g) per robot instead of
/// O(g K^2).
struct DirectField {
    Eigen::VectorXd weight;  ///< area * (1-q_i)^2 * psi_i
    std::vector<double> px, py;
    KernelParams params;
    double sample_dt = 5.0;
    double delta_sq = 0.0;   ///< Matern gradient regularizer (spacing/10)^2
};

DirectField build_direct_field(const ClarityMap& map, const CosineBasis& basis,
                               const Eigen::MatrixXd& lambda,
                               const KernelParams& params, double sample_dt);

/// The clarity-ascent row vector L(t,x). Zero when clarity already matches
/// the target everywhere.
Eigen::RowVector2d direct_gradient(const DirectField& field, const Vec2& x);

/// Direct policy: u = u_max L^T / |L| when |L| exceeds eps_gradient;
/// otherwise steer at u_max toward the grid point with the largest clarity
/// deficit (global escape from flat-gradient regions), or hold if no deficit
/// remains.
ControlDecision pi_direct(const DirectField& field, const ClarityMap& map,
                          const Vec2& x, const RobotModel& model,
                          double eps_gradient);

/// Target spatial distribution from the clarity map: per grid point the time
/// tau needed to raise clarity from q_i to the target with a robot parked on
/// the point (S = dt/R), clamped to tau_max where the target is unreachable,
/// zero where the target is already met. The result is normalized to a
/// probability density over the domain (cell-area quadrature sums to 1);
/// the all-zero field is returned as-is when no deficit remains.
Eigen::VectorXd compute_tsd(const ClarityMap& map, const KernelParams& params,
                            double sample_dt, const Eigen::VectorXd& w_rates,
                            double tau_max);

/// Shared running record of where the fleet has been, kept in coefficient
/// space: accum_l = sum_agents integral b_l(x_i(t)) dt.
class TrajectoryAccumulator {
public:
    TrajectoryAccumulator(const CosineBasis& basis, int n_agents);

    void record(std::span<const Vec2> positions, double dt);

    /// Coefficients of the empirical time-average position distribution,
    /// accum / (N T); zero at T = 0.
    SpectralCoeffs empirical_coeffs() const;

    /// T-scaled mismatch s_l = accum_l / N - T phi_l, the quantity the
    /// spectral multiscale law steers down. Avoids the 0/0 at T = 0.
    SpectralCoeffs scaled_mismatch(const SpectralCoeffs& phi_hat) const;

    double elapsed() const { return elapsed_; }
    int agents() const { return n_agents_; }

private:
    const CosineBasis* basis_;
    int n_agents_;
    double elapsed_ = 0.0;
    SpectralCoeffs accum_;
};

/// Spectral multiscale (ergodic) feedback law: with s_l the scaled mismatch,
/// B(x) = sum_l Lambda_l s_l grad b_l(x) and u = -u_max B / |B|; holds when
/// |B| <= eps_gradient or the TSD is identically zero.
ControlDecision pi_indirect(const CosineBasis& basis, const Eigen::MatrixXd& lambda,
                            const SpectralCoeffs& scaled_mismatch, const Vec2& x,
                            const RobotModel& model, double eps_gradient,
                            bool tsd_is_zero);

/// Controller settings shared by both policies.
struct ControllerConfig {
    CoveragePolicy policy = CoveragePolicy::Direct;
    int modes = 16;          ///< max cosine index per axis
    double u_max = 0.03;     ///< km/s
    double sample_dt = 5.0;  ///< s; measurement period entering S
    double tau_max = 3600.0; ///< s; TSD clamp for unreachable targets
    double eps_gradient = 0.0; ///< 0 -> 1e-9 * u_max[m/s] * sigma^2
};

/// Per-mission controller: owns the basis, Sobolev weights and trajectory
/// accumulator, rebuilds the per-step context (psi field or TSD coefficients)
/// from the shared clarity map, and evaluates the policy per agent. Policy
/// evaluation is pure given the per-step context, so agents may be evaluated
/// concurrently; begin_step/record_visits belong to the single writer.
class CoverageController {
public:
    CoverageController(const ControllerConfig& config, const KernelParams& params,
                       const GridSpec& grid, double domain_len1, double domain_len2,
                       const Eigen::VectorXd& w_rates, int n_agents);

    /// Rebuild the step context from the shared clarity map at elapsed
    /// mission time t (s).
    void begin_step(const ClarityMap& map, double t);

    ControlDecision control(const Vec2& x) const;

    /// Feed the positions occupied over the last dt (indirect bookkeeping).
    void record_visits(std::span<const Vec2> positions, double dt);

    /// Sobolev ergodicity metric |c - phi|^2 of the visit record vs the
    /// current TSD (indirect policy only).
    double ergodicity_metric() const;

    const CosineBasis& basis() const { return basis_; }
    const Eigen::MatrixXd& lambda() const { return lambda_; }
    const ControllerConfig& config() const { return config_; }

private:
    ControllerConfig config_;
    KernelParams params_;
    GridSpec grid_;
    Eigen::VectorXd w_rates_;
    CosineBasis basis_;
    Eigen::MatrixXd lambda_;
    RobotModel model_;
    double eps_gradient_;

    // step context
    ClarityMap map_;
    DirectField direct_field_;
    SpectralCoeffs phi_hat_;
    SpectralCoeffs mismatch_;
    bool tsd_zero_ = true;
    bool step_ready_ = false;

    TrajectoryAccumulator accumulator_;
};

/// u_i = pi(t, x_i) for every agent against the shared step context.
std::vector<ControlDecision> fleet_step(CoverageController& controller,
                                        const ClarityMap& map, double t,
                                        std::span<const Vec2> positions);

} // namespace claricov
