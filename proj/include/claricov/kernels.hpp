#pragma once

#include "claricov/common.hpp"
#include "claricov/grid.hpp"

#include <Eigen/Core>
#include <span>
#include <string>
#include <vector>

namespace claricov {

enum class KernelFamily { Matern12, SquaredExponential };

const char* kernel_family_name(KernelFamily family);
KernelFamily kernel_family_from_name(const std::string& name);

/// Stationary isotropic spatial kernel hyperparameters plus the measurement
/// noise variance R. Units: sigma in field units (e.g. m/s), length_scale in
/// km, noise_var in field units squared.
struct KernelParams {
    KernelFamily family = KernelFamily::Matern12;
    double sigma = 1.0;
    double length_scale = 1.0;
    double noise_var = 0.0;

    double variance() const { return sigma * sigma; } ///< k(0)

    void validate() const; ///< throws ConfigError on non-positive sigma/length
};

/// k(d): Matern-1/2 is sigma^2 exp(-d/L), squared exponential is
/// sigma^2 exp(-d^2 / (2 L^2)).
double kernel_eval(const KernelParams& params, double distance);

/// Kernel matrix K(A,B) with entries k(|a_i - b_j|).
Eigen::MatrixXd kernel_matrix(const KernelParams& params,
                              std::span<const Vec2> a, std::span<const Vec2> b);

/// Fast path writing one kernel row k(|x - p_j|) for all j; uses the
/// dispatched SIMD backend. delta_sq regularizes the Matern distance
/// (needed only for gradients; pass 0 for exact evaluation).
void kernel_row(const KernelParams& params, const Vec2& x,
                const double* px, const double* py, double* out, std::size_t n,
                double delta_sq = 0.0);

/// Empirical (Matheron) semivariogram.
struct VariogramBin {
    double lag = 0.0;          ///< mean pair distance in the bin, km
    double semivariance = 0.0; ///< gamma(h)
    std::size_t pair_count = 0;
};

struct Variogram {
    std::vector<VariogramBin> bins; ///< strictly increasing lags; empty bins omitted
};

struct Sample {
    Vec2 position; ///< km
    double value = 0.0;
};

/// Method-of-moments estimator: bin b collects pairs with distance in
/// (b*w, (b+1)*w], gamma_b = sum (v_i - v_j)^2 / (2 N_b). Empty bins are
/// omitted. Throws DataError for fewer than 2 samples or max_lag <= 0.
Variogram empirical_variogram(std::span<const Sample> samples, int n_bins,
                              double max_lag);

/// Least-squares variogram fit result. `converged` is always true on normal
/// return; non-convergence raises FitError carrying the best iterate.
struct KernelFit {
    KernelParams params;      ///< fitted sigma / length_scale; noise_var left 0
    double residual = 0.0;    ///< weighted sum of squared bin residuals
    int evaluations = 0;
};

class FitError : public NumericalError {
public:
    FitError(const std::string& what, KernelFit best)
        : NumericalError(what), best_iterate(std::move(best)) {}
    KernelFit best_iterate;
};

/// Fits (sigma, L) to minimize sum_b w_b (gamma_b - gamma_model(h_b))^2 with
/// gamma_model(h) = sigma^2 (1 - k(h)/k(0)) and w_b = pair count. sigma^2 is
/// profiled out in closed form; L is found by bracketed scalar minimization
/// over log L. Throws DataError for < 3 bins, FitError for a flat variogram.
KernelFit fit_kernel(const Variogram& vg, KernelFamily family);

/// One time-stamped grid snapshot of the scalar field.
struct FieldSnapshot {
    double t = 0.0;          ///< s
    Eigen::VectorXd values;  ///< grid ordering of the associated GridSpec
};

/// Per-grid-point temporal variability estimates from consecutive snapshot
/// differences. `rate` is the Wiener intensity sigma_t^2 such that
/// Var[f(t+dt)-f(t)] = rate * dt (estimated as the sample variance of
/// dt-normalized increments); `literal_quotient_var` is the sample variance of
/// the raw difference quotients (f2-f1)/(t2-t1), units (field/time)^2.
struct TemporalVariance {
    Eigen::VectorXd rate;                 ///< (field units)^2 per second
    Eigen::VectorXd literal_quotient_var; ///< (field units per second)^2
};

/// Requires >= 3 snapshots with strictly increasing times and matching sizes.
TemporalVariance estimate_temporal_variance(std::span<const FieldSnapshot> snapshots);

} // namespace claricov
