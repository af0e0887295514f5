#pragma once

#include "claricov/clarity.hpp"
#include "claricov/common.hpp"
#include "claricov/grid.hpp"
#include "claricov/kernels.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <vector>

namespace claricov {

/// Grid-state Kalman filter estimate at one time. The covariance is carried
/// as an upper-triangular square root U with Sigma = U^T U, so it can never
/// lose symmetry or positive semidefiniteness through the filter updates.
struct FilterState {
    double t = 0.0;           ///< s
    Eigen::VectorXd mean;     ///< length g, field units
    Eigen::MatrixXd cov_sqrt; ///< g x g upper triangular

    Eigen::MatrixXd covariance() const { return cov_sqrt.transpose() * cov_sqrt; }

    /// Marginal variances Sigma_ii (squared column norms of the factor).
    Eigen::VectorXd variance_diag() const {
        return cov_sqrt.colwise().squaredNorm().transpose();
    }
};

/// One synchronized batch of point measurements (all robots, same timestamp).
struct MeasurementBatch {
    double t = 0.0;
    std::vector<Vec2> positions; ///< km, inside the mission domain
    Eigen::VectorXd values;      ///< field units
    Eigen::VectorXd noise_var;   ///< per-measurement R > 0

    static MeasurementBatch uniform_noise(double t, std::vector<Vec2> positions,
                                          Eigen::VectorXd values, double r);
};

/// Grid-based GP Kalman filter for a scalar spatiotemporal field whose time
/// evolution is a pure Wiener process (drift-free). Prediction inflates the
/// covariance by diag(sigma_t^2 dt); correction assimilates measurements
/// taken anywhere in the domain through the kernel-projected observation
/// matrix C = K_rg K_gg^{-1}, using QR-based square-root updates.
///
/// The prior covariance carries a jitter nugget eps = 1e-9 sigma^2 on the
/// diagonal (fine Matern grids are near-singular); the kernel evaluations
/// used for C, V and off-grid interpolation include the same nugget at
/// coincident points so that grid-point measurements reduce exactly to
/// selection rows.
///
/// FilterState is an immutable value: predict/correct are const and return
/// new states, so read-only queries on a given state are safe from any
/// thread while an assimilation sequence stays strictly ordered.
class Ngpkf {
public:
    /// `domain` bounds measurement positions; defaults to the grid bounding
    /// box expanded by half a cell (the cell-centered mission area).
    Ngpkf(const GridSpec& grid, const KernelParams& params);
    Ngpkf(const GridSpec& grid, const KernelParams& params, const DomainBox& domain);

    /// Prior N(mean0, K_gg + eps I) at time t0.
    FilterState init_prior(const Eigen::VectorXd& mean0, double t0 = 0.0) const;
    FilterState init_prior(double constant_mean = 0.0, double t0 = 0.0) const;

    /// Mean unchanged, Sigma += diag(rates * dt); rates are per-point Wiener
    /// intensities sigma_t^2(p_i) >= 0.
    FilterState predict(const FilterState& state, double dt,
                        const Eigen::VectorXd& rates) const;

    /// Square-root (Joseph-form QR) measurement update. The batch timestamp
    /// must equal the state time: predict first.
    FilterState correct(const FilterState& state, const MeasurementBatch& batch) const;

    /// Dense textbook update (Sigma - L S L^T). Test oracle for the
    /// square-root path; not used by the simulator.
    struct DenseUpdate {
        Eigen::VectorXd mean;
        Eigen::MatrixXd covariance;
    };
    DenseUpdate correct_dense_reference(const FilterState& state,
                                        const MeasurementBatch& batch) const;

    struct PointEstimate {
        double mean = 0.0;
        double variance = 0.0;
    };

    /// GP interpolation of the filtered state at an arbitrary domain point:
    /// mean = c^T m, var = k(0) - kg^T Kgg^{-1} kg + c^T Sigma c with
    /// c = Kgg^{-1} kg. Reduces to (m_i, Sigma_ii) at grid points. The
    /// weights are the zero-mean GP projection; a nonzero prior mean is
    /// attenuated off-grid along with the rest of the state.
    PointEstimate posterior_at(const FilterState& state, const Vec2& p) const;

    const GridSpec& grid() const { return grid_; }
    const KernelParams& params() const { return params_; }
    const DomainBox& domain() const { return domain_; }
    double jitter() const { return jitter_; }

private:
    /// Kernel row k(|x - p_j|) over the grid with the coincidence nugget.
    Eigen::VectorXd nugget_kernel_row(const Vec2& x) const;

    /// C (r x g), V (r x r) for a measurement batch.
    void observation_model(const MeasurementBatch& batch, Eigen::MatrixXd& c_mat,
                           Eigen::MatrixXd& v_mat) const;

    GridSpec grid_;
    KernelParams params_;
    DomainBox domain_;
    double jitter_ = 0.0;
    std::vector<double> gx_, gy_; ///< grid coordinates, SIMD-friendly layout
    Eigen::LLT<Eigen::MatrixXd> kgg_llt_; ///< Cholesky of K_gg + eps I (cached)
};

/// Per-point clarity of a filter state: q_i = 1 / (1 + Sigma_ii).
ClarityMap clarity_map_from_filter(const FilterState& state, const GridSpec& grid,
                                   const Eigen::VectorXd& q_target);

} // namespace claricov
