#include "claricov/kernels.hpp"

#include "claricov/simd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace claricov {

const char* kernel_family_name(KernelFamily family) {
    switch (family) {
        case KernelFamily::Matern12: return "matern12";
        case KernelFamily::SquaredExponential: return "se";
    }
    return "unknown";
}

KernelFamily kernel_family_from_name(const std::string& name) {
    if (name == "matern12" || name == "matern-1/2" || name == "exponential")
        return KernelFamily::Matern12;
    if (name == "se" || name == "squared_exponential" || name == "rbf")
        return KernelFamily::SquaredExponential;
    throw ConfigError("unknown kernel family: '" + name + "'");
}

void KernelParams::validate() const {
    if (!(sigma > 0.0)) throw ConfigError("kernel sigma must be > 0");
    if (!(length_scale > 0.0)) throw ConfigError("kernel length_scale must be > 0");
    if (noise_var < 0.0) throw ConfigError("kernel noise_var must be >= 0");
}

double kernel_eval(const KernelParams& params, double distance) {
    const double s2 = params.variance();
    switch (params.family) {
        case KernelFamily::Matern12:
            return s2 * std::exp(-distance / params.length_scale);
        case KernelFamily::SquaredExponential: {
            const double r = distance / params.length_scale;
            return s2 * std::exp(-0.5 * r * r);
        }
    }
    return 0.0;
}

void kernel_row(const KernelParams& params, const Vec2& x,
                const double* px, const double* py, double* out, std::size_t n,
                double delta_sq) {
    simd::squared_distances(x.x(), x.y(), px, py, out, n);
    if (params.family == KernelFamily::Matern12) {
        simd::kernel_row_matern12(out, params.variance(), 1.0 / params.length_scale,
                                  delta_sq, out, n);
    } else {
        // delta regularization is a no-op for the already-smooth SE kernel
        simd::kernel_row_se(out, params.variance(),
                            0.5 / (params.length_scale * params.length_scale), out, n);
    }
}

Eigen::MatrixXd kernel_matrix(const KernelParams& params,
                              std::span<const Vec2> a, std::span<const Vec2> b) {
    const std::size_t rows = a.size();
    const std::size_t cols = b.size();
    std::vector<double> bx(cols), by(cols);
    for (std::size_t j = 0; j < cols; ++j) {
        bx[j] = b[j].x();
        by[j] = b[j].y();
    }
    Eigen::MatrixXd k(rows, cols);
    std::vector<double> row(cols);
    for (std::size_t i = 0; i < rows; ++i) {
        kernel_row(params, a[i], bx.data(), by.data(), row.data(), cols);
        for (std::size_t j = 0; j < cols; ++j) k(static_cast<Eigen::Index>(i),
                                                 static_cast<Eigen::Index>(j)) = row[j];
    }
    return k;
}

Variogram empirical_variogram(std::span<const Sample> samples, int n_bins,
                              double max_lag) {
    if (samples.size() < 2)
        throw DataError("empirical_variogram: need at least 2 samples");
    if (!(max_lag > 0.0)) throw DataError("empirical_variogram: max_lag must be > 0");
    if (n_bins < 1) throw DataError("empirical_variogram: n_bins must be >= 1");

    std::vector<double> sq_diff_sum(static_cast<std::size_t>(n_bins), 0.0);
    std::vector<double> lag_sum(static_cast<std::size_t>(n_bins), 0.0);
    std::vector<std::size_t> counts(static_cast<std::size_t>(n_bins), 0);

    const double bin_width = max_lag / n_bins;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        for (std::size_t j = i + 1; j < samples.size(); ++j) {
            const double h = (samples[i].position - samples[j].position).norm();
            if (h > max_lag) continue;
            int b = static_cast<int>(h / bin_width);
            if (b >= n_bins) b = n_bins - 1;
            const double dv = samples[i].value - samples[j].value;
            sq_diff_sum[static_cast<std::size_t>(b)] += dv * dv;
            lag_sum[static_cast<std::size_t>(b)] += h;
            counts[static_cast<std::size_t>(b)] += 1;
        }
    }

    Variogram vg;
    for (int b = 0; b < n_bins; ++b) {
        const auto ub = static_cast<std::size_t>(b);
        if (counts[ub] == 0) continue;
        VariogramBin bin;
        bin.lag = lag_sum[ub] / static_cast<double>(counts[ub]);
        bin.semivariance = sq_diff_sum[ub] / (2.0 * static_cast<double>(counts[ub]));
        bin.pair_count = counts[ub];
        vg.bins.push_back(bin);
    }
    return vg;
}

namespace {

// gamma_model(h; L) / sigma^2; the amplitude is profiled out of the fit.
double vg_shape(KernelFamily family, double h, double length) {
    if (family == KernelFamily::Matern12) return 1.0 - std::exp(-h / length);
    const double r = h / length;
    return 1.0 - std::exp(-0.5 * r * r);
}

struct ProfiledObjective {
    const Variogram& vg;
    KernelFamily family;
    mutable int evals = 0;

    // For fixed L the optimal sigma^2 is a weighted least-squares ratio.
    // Returns (residual, sigma_sq).
    std::pair<double, double> operator()(double log_length) const {
        ++evals;
        const double length = std::exp(log_length);
        double num = 0.0, den = 0.0;
        for (const auto& b : vg.bins) {
            const double s = vg_shape(family, b.lag, length);
            const double w = static_cast<double>(b.pair_count);
            num += w * b.semivariance * s;
            den += w * s * s;
        }
        const double sigma_sq = den > 0.0 ? std::max(num / den, 0.0) : 0.0;
        double res = 0.0;
        for (const auto& b : vg.bins) {
            const double r = b.semivariance - sigma_sq * vg_shape(family, b.lag, length);
            res += static_cast<double>(b.pair_count) * r * r;
        }
        return {res, sigma_sq};
    }
};

// Golden-section minimization on [lo, hi]; the objective is smooth and the
// bracket comes from a coarse multi-start scan.
double golden_minimize(const ProfiledObjective& f, double lo, double hi, int iters) {
    const double phi = 0.61803398874989484820;
    double a = lo, b = hi;
    double x1 = b - phi * (b - a);
    double x2 = a + phi * (b - a);
    double f1 = f(x1).first;
    double f2 = f(x2).first;
    for (int it = 0; it < iters; ++it) {
        if (f1 < f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1).first;
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2).first;
        }
    }
    return 0.5 * (a + b);
}

} // namespace

KernelFit fit_kernel(const Variogram& vg, KernelFamily family) {
    if (vg.bins.size() < 3) throw DataError("fit_kernel: need at least 3 variogram bins");

    double max_semi = 0.0, max_lag = 0.0, min_lag = std::numeric_limits<double>::max();
    for (const auto& b : vg.bins) {
        max_semi = std::max(max_semi, b.semivariance);
        max_lag = std::max(max_lag, b.lag);
        min_lag = std::min(min_lag, b.lag > 0.0 ? b.lag : min_lag);
    }
    if (!(max_semi > 0.0)) {
        KernelFit degenerate;
        degenerate.params.family = family;
        degenerate.params.sigma = 0.0;
        degenerate.params.length_scale = max_lag > 0.0 ? max_lag : 1.0;
        throw FitError("fit_kernel: flat variogram (all semivariances zero)", degenerate);
    }
    if (!(min_lag > 0.0) || !(min_lag < std::numeric_limits<double>::max()))
        min_lag = max_lag / 100.0;

    ProfiledObjective obj{vg, family};

    // Multi-start scan over log L, then golden-section refinement around the
    // best coarse candidate.
    const double lo = std::log(min_lag / 30.0);
    const double hi = std::log(max_lag * 30.0);
    const int scan_points = 120;
    double best_log_l = lo, best_res = std::numeric_limits<double>::max();
    for (int i = 0; i <= scan_points; ++i) {
        const double x = lo + (hi - lo) * i / scan_points;
        const double r = obj(x).first;
        if (r < best_res) {
            best_res = r;
            best_log_l = x;
        }
    }
    const double step = (hi - lo) / scan_points;
    const double refined =
        golden_minimize(obj, best_log_l - 2.0 * step, best_log_l + 2.0 * step, 90);

    const auto [residual, sigma_sq] = obj(refined);

    KernelFit fit;
    fit.params.family = family;
    fit.params.sigma = std::sqrt(sigma_sq);
    fit.params.length_scale = std::exp(refined);
    fit.residual = residual;
    fit.evaluations = obj.evals;
    if (!(fit.params.sigma > 0.0) || !std::isfinite(fit.params.length_scale))
        throw FitError("fit_kernel: degenerate optimum", fit);
    return fit;
}

TemporalVariance estimate_temporal_variance(std::span<const FieldSnapshot> snapshots) {
    if (snapshots.size() < 3)
        throw DataError("estimate_temporal_variance: need >= 3 snapshots (>= 2 increments)");
    const Eigen::Index g = snapshots[0].values.size();
    for (std::size_t k = 1; k < snapshots.size(); ++k) {
        if (snapshots[k].values.size() != g)
            throw DataError("estimate_temporal_variance: snapshot size mismatch");
        if (!(snapshots[k].t > snapshots[k - 1].t))
            throw DataError("estimate_temporal_variance: times must be strictly increasing");
    }

    const std::size_t m = snapshots.size() - 1; // increments
    Eigen::MatrixXd quotient(static_cast<Eigen::Index>(m), g);
    Eigen::MatrixXd normalized(static_cast<Eigen::Index>(m), g);
    for (std::size_t k = 0; k < m; ++k) {
        const double dt = snapshots[k + 1].t - snapshots[k].t;
        const Eigen::VectorXd diff = snapshots[k + 1].values - snapshots[k].values;
        quotient.row(static_cast<Eigen::Index>(k)) = (diff / dt).transpose();
        normalized.row(static_cast<Eigen::Index>(k)) = (diff / std::sqrt(dt)).transpose();
    }

    const auto column_variance = [m](const Eigen::MatrixXd& rows) {
        const Eigen::RowVectorXd mean = rows.colwise().mean();
        const Eigen::MatrixXd centered = rows.rowwise() - mean;
        return (centered.array().square().colwise().sum() /
                static_cast<double>(m - 1)).matrix().transpose().eval();
    };

    TemporalVariance out;
    out.rate = column_variance(normalized);
    out.literal_quotient_var = column_variance(quotient);
    return out;
}

} // namespace claricov
