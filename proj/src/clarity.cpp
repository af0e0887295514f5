#include "claricov/clarity.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace claricov {

double clarity_from_variance(double variance) {
    if (variance < 0.0) throw std::invalid_argument("clarity_from_variance: variance < 0");
    return 1.0 / (1.0 + variance);
}

double variance_from_clarity(double q) {
    if (!(q > 0.0) || q > 1.0)
        throw std::invalid_argument("variance_from_clarity: q must be in (0, 1]");
    return (1.0 - q) / q;
}

SensingGain sensing_gain(const KernelParams& params, const Vec2& x_r, const Vec2& p) {
    const double k0 = params.variance();
    const double kd = kernel_eval(params, (x_r - p).norm());
    SensingGain g;
    g.c = kd / k0;
    // V = k(0) - k(d)^2/k(0) + R written as k0 (1 - C^2) + R so that V == R
    // exactly at d = 0.
    g.v = k0 * (1.0 - g.c * g.c) + params.noise_var;
    return g;
}

double sensing_rate(const KernelParams& params, const Vec2& x_r, const Vec2& p,
                    double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("sensing_rate: dt must be > 0");
    const SensingGain g = sensing_gain(params, x_r, p);
    return g.c * g.c * dt / g.v;
}

double clarity_rate(double q, double s, double w) {
    const double a = 1.0 - q;
    return s * a * a - w * q * q;
}

double clarity_equilibrium(double s, double w) {
    if (s <= 0.0) return 0.0;
    if (w <= 0.0) return 1.0;
    const double g0 = std::sqrt(s / w);
    return g0 / (1.0 + g0);
}

double clarity_closed_form(const ClarityDynParams& dyn, double t) {
    if (t < 0.0) throw std::invalid_argument("clarity_closed_form: t < 0");
    const double s = dyn.s, w = dyn.w, q0 = dyn.q0;
    if (s < 0.0 || w < 0.0) throw std::invalid_argument("clarity_closed_form: negative rate");
    if (q0 < 0.0 || q0 > 1.0) throw std::invalid_argument("clarity_closed_form: q0 outside [0,1]");

    if (s == 0.0) {
        // pure decay: dq/dt = -W q^2
        return q0 / (1.0 + q0 * w * t);
    }
    if (w == 0.0) {
        // pure gain: dq/dt = S (1-q)^2
        const double a = 1.0 - q0;
        return 1.0 - a / (1.0 + s * a * t);
    }

    const double g0 = std::sqrt(s / w);
    const double q_inf = g0 / (1.0 + g0);
    const double g1 = q_inf - q0;
    const double g2 = g1 * (g0 - 1.0);
    const double g3 = (g0 - 1.0) * q0 - g0; // always < 0 for q0 in [0,1]
    const double expo = 2.0 * g0 * w * t;
    if (expo > 700.0) return q_inf; // exp overflow; solution has converged
    return q_inf * (1.0 + 2.0 * g1 / (g2 + g3 * std::exp(expo)));
}

double time_to_clarity_or_inf(const ClarityDynParams& dyn, double q_f) {
    const double s = dyn.s, w = dyn.w, q0 = dyn.q0;
    if (q_f < q0) throw std::invalid_argument("time_to_clarity: q_f below initial clarity");
    if (q_f == q0) return 0.0;
    const double q_inf = clarity_equilibrium(s, w);
    if (q_f >= q_inf) return std::numeric_limits<double>::infinity();

    if (w == 0.0) {
        // invert q = 1 - (1-q0)/(1 + S (1-q0) t)
        return (q_f - q0) / (s * (1.0 - q0) * (1.0 - q_f));
    }

    const double g0 = std::sqrt(s / w);
    const double g1 = q_inf - q0;
    const double g2 = g1 * (g0 - 1.0);
    const double g3 = (g0 - 1.0) * q0 - g0;
    const double num = 2.0 * g1 * q_inf + g2 * (q_inf - q_f);
    const double den = g3 * (q_f - q_inf);
    return std::log(num / den) / (2.0 * g0 * w);
}

double time_to_clarity(const ClarityDynParams& dyn, double q_f) {
    const double tau = time_to_clarity_or_inf(dyn, q_f);
    if (std::isinf(tau))
        throw std::domain_error("time_to_clarity: unreachable-target (q_f >= q_inf)");
    return tau;
}

void ClarityMap::validate() const {
    if (q.size() != grid.count() || q_target.size() != grid.count())
        throw ConfigError("ClarityMap: vector sizes do not match grid");
    for (Eigen::Index i = 0; i < q.size(); ++i) {
        if (!(q[i] >= 0.0 && q[i] <= 1.0))
            throw ConfigError("ClarityMap: clarity outside [0,1]");
        if (!(q_target[i] >= 0.0 && q_target[i] < 1.0))
            throw ConfigError("ClarityMap: target clarity outside [0,1)");
    }
}

double mean_clarity_deficit(const ClarityMap& map) {
    if (map.q.size() == 0) return 0.0;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < map.q.size(); ++i)
        acc += std::max(0.0, map.q_target[i] - map.q[i]);
    return acc / static_cast<double>(map.q.size());
}

} // namespace claricov
