#pragma once

#include "claricov/common.hpp"
#include "claricov/grid.hpp"

#include <Eigen/Core>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <vector>

namespace claricov {

/// Row-contiguous storage for the cosine tables consumed by the SIMD kernels.
using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Coefficients of a field in the 2-D cosine basis over [0,L1] x [0,L2].
/// c(l1, l2) holds the coefficient of basis index (l1, l2), l1 in [0, K1],
/// l2 in [0, K2].
struct SpectralCoeffs {
    int k1 = 0;
    int k2 = 0;
    double len1 = 1.0;
    double len2 = 1.0;
    Eigen::MatrixXd c; ///< (k1+1) x (k2+1)

    bool same_index_set(const SpectralCoeffs& other) const {
        return k1 == other.k1 && k2 == other.k2 && len1 == other.len1 &&
               len2 == other.len2;
    }
};

/// Sobolev weights Lambda_l = (1 + |l|^2)^(-(d+1)/2) over the same index
/// layout as SpectralCoeffs::c. Non-increasing along each axis.
Eigen::MatrixXd sobolev_weights(int k1, int k2, int dim = 2);

/// Orthonormal cosine basis on [0,L1] x [0,L2]:
///   b_l(p) = cos(pi l1 p1 / L1) cos(pi l2 p2 / L2) / sqrt(h_{l1} h_{l2}),
/// h_0 = L, h_{l>0} = L/2 per axis, so integral of b_l b_m over the domain is
/// the Kronecker delta. All basis functions have zero normal derivative at
/// the domain boundary.
///
/// Transforms use cell-area midpoint quadrature on a cell-centered grid; on
/// such a grid the discretized basis is exactly orthogonal for indices below
/// the grid band (DCT-II structure), so transform followed by
/// inverse_transform reproduces band-limited fields to round-off.
class CosineBasis {
public:
    CosineBasis(double len1, double len2, int k1, int k2);

    /// Precompute per-grid-point tables enabling the fast separable paths.
    CosineBasis(const GridSpec& grid, double len1, double len2, int k1, int k2);

    double eval(int l1, int l2, const Vec2& p) const;
    Vec2 grad(int l1, int l2, const Vec2& p) const;

    /// Per-axis factors: b_l(p) = axis_eval_x(l1, p.x()) * axis_eval_y(l2, p.y()).
    double axis_eval_x(int l1, double x) const {
        return axis_norm(l1, len1_) * std::cos(std::numbers::pi * l1 * x / len1_);
    }
    double axis_eval_y(int l2, double y) const {
        return axis_norm(l2, len2_) * std::cos(std::numbers::pi * l2 * y / len2_);
    }

    /// Analysis: coefficients of a grid field (field in grid row-major order).
    SpectralCoeffs transform(const Eigen::VectorXd& field) const;

    /// Synthesis onto the grid: field_i = sum_l c_l b_l(p_i). If `weights` is
    /// non-null each coefficient is scaled by the matching weight first.
    Eigen::VectorXd inverse_transform(const SpectralCoeffs& coeffs,
                                      const Eigen::MatrixXd* weights = nullptr) const;

    /// Evaluate sum_l c_l b_l(p) (optionally weighted) at one point.
    double synthesize_at(const SpectralCoeffs& coeffs, const Vec2& p,
                         const Eigen::MatrixXd* weights = nullptr) const;

    /// Evaluate the gradient of the weighted synthesis at one point.
    Vec2 synthesize_grad_at(const SpectralCoeffs& coeffs, const Vec2& p,
                            const Eigen::MatrixXd* weights = nullptr) const;

    int k1() const { return k1_; }
    int k2() const { return k2_; }
    double len1() const { return len1_; }
    double len2() const { return len2_; }
    const GridSpec& grid() const { return grid_; }
    double cell_area() const { return grid_.spacing * grid_.spacing; }

private:
    double axis_norm(int l, double len) const { ///< 1/sqrt(h_l)
        return l == 0 ? 1.0 / std::sqrt(len) : std::sqrt(2.0 / len);
    }

    double len1_, len2_;
    int k1_, k2_;
    GridSpec grid_{};
    bool has_grid_ = false;
    // cos tables for the separable grid paths: cos_x_(l1, ix) carries the
    // 1/sqrt(h_{l1}) normalizer, cos_y_(l2, iy) carries 1/sqrt(h_{l2}).
    RowMajorMatrix cos_x_, cos_y_;
};

/// Weighted squared Sobolev distance sum_l Lambda_l (a_l - b_l)^2.
/// Throws ConfigError on index-set mismatch.
double sobolev_distance_sq(const SpectralCoeffs& a, const SpectralCoeffs& b,
                           const Eigen::MatrixXd& lambda);

/// Keep the n_keep coefficients with the largest Lambda_l c_l^2 energy, zero
/// the rest. Ties break toward lexicographically smaller (l1, l2).
SpectralCoeffs truncate(const SpectralCoeffs& coeffs, const Eigen::MatrixXd& lambda,
                        int n_keep);

/// Coefficient table export, columns l1,l2,value,lambda.
void write_coeffs_csv(const std::filesystem::path& path, const SpectralCoeffs& coeffs,
                      const Eigen::MatrixXd& lambda);

} // namespace claricov
