#pragma once

#include "claricov/common.hpp"
#include "claricov/grid.hpp"
#include "claricov/kernels.hpp"

#include <Eigen/Core>

namespace claricov {

/// Clarity of a scalar Gaussian estimate: q = 1 / (1 + variance). q = 1 means
/// perfectly known, q = 0 means no information. Variance is in raw field
/// units squared; no normalization is applied, so clarity values are
/// unit-sensitive by construction.
double clarity_from_variance(double variance);

/// Inverse map: variance = (1 - q) / q.
double variance_from_clarity(double q);

/// Reinterpretation of a measurement taken at x_r as a measurement of the
/// field at p: y = C f(p) + v with v ~ N(0, V).
///   C = k(x_r, p) / k(p, p)
///   V = k(0) (1 - C^2) + R
struct SensingGain {
    double c = 0.0; ///< in [0, 1] for non-negative kernels
    double v = 0.0; ///< >= R
};

SensingGain sensing_gain(const KernelParams& params, const Vec2& x_r, const Vec2& p);

/// Rate coefficient S(x_r, p) = C^2 dt / V quantifying how fast a robot
/// sampling at x_r with period dt raises clarity at p. Uses the general C, V
/// above; for a kernel with k(0) != 1 this differs from the simplified
/// unit-variance shortcut (see tests).
double sensing_rate(const KernelParams& params, const Vec2& x_r, const Vec2& p,
                    double dt);

/// dq/dt = S (1-q)^2 - W q^2.
double clarity_rate(double q, double s, double w);

/// Parameters of the scalar clarity ODE at one grid point.
struct ClarityDynParams {
    double s = 0.0;  ///< sensing rate, 1/time
    double w = 0.0;  ///< process intensity sigma_t^2(p), 1/time
    double q0 = 0.0; ///< initial clarity in [0, 1]
};

/// Equilibrium clarity q_inf = g0 / (1 + g0), g0 = sqrt(S/W). Returns 1 for
/// W = 0, 0 for S = 0.
double clarity_equilibrium(double s, double w);

/// Closed-form solution of the clarity ODE at time t >= 0.
///
/// For S, W > 0:
///   q(t) = q_inf (1 + 2 g1 / (g2 + g3 exp(2 g0 W t)))
/// with g0 = sqrt(S/W), q_inf = g0/(1+g0), g1 = q_inf - q0, g2 = g1 (g0 - 1),
/// g3 = (g0 - 1) q0 - g0. Degenerate cases use the direct Riccati solutions:
/// S = 0: q = q0 / (1 + q0 W t); W = 0: q = 1 - (1-q0)/(1 + S (1-q0) t).
double clarity_closed_form(const ClarityDynParams& dyn, double t);

/// Time for clarity to rise from q0 to q_f under constant S, W. Requires
/// q0 <= q_f < q_inf; throws std::invalid_argument for q_f < q0 and
/// std::domain_error ("unreachable-target") for q_f >= q_inf.
double time_to_clarity(const ClarityDynParams& dyn, double q_f);

/// Non-throwing variant: returns +inf when the target is unreachable.
double time_to_clarity_or_inf(const ClarityDynParams& dyn, double q_f);

/// Per-grid-point clarity snapshot paired with the target clarity.
struct ClarityMap {
    GridSpec grid;
    Eigen::VectorXd q;        ///< current clarity, in [0, 1]
    Eigen::VectorXd q_target; ///< target clarity, in [0, 1)

    void validate() const;
};

/// Mean over grid points of max(0, q_target - q).
double mean_clarity_deficit(const ClarityMap& map);

} // namespace claricov
