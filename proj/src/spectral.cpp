#include "claricov/spectral.hpp"

#include "claricov/csv.hpp"
#include "claricov/simd.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

namespace claricov {

Eigen::MatrixXd sobolev_weights(int k1, int k2, int dim) {
    Eigen::MatrixXd lambda(k1 + 1, k2 + 1);
    const double expo = -(static_cast<double>(dim) + 1.0) / 2.0;
    for (int l1 = 0; l1 <= k1; ++l1)
        for (int l2 = 0; l2 <= k2; ++l2)
            lambda(l1, l2) = std::pow(1.0 + double(l1) * l1 + double(l2) * l2, expo);
    return lambda;
}

CosineBasis::CosineBasis(double len1, double len2, int k1, int k2)
    : len1_(len1), len2_(len2), k1_(k1), k2_(k2) {
    if (!(len1 > 0.0) || !(len2 > 0.0))
        throw ConfigError("CosineBasis: domain lengths must be positive");
    if (k1 < 0 || k2 < 0) throw ConfigError("CosineBasis: negative max index");
}

CosineBasis::CosineBasis(const GridSpec& grid, double len1, double len2, int k1, int k2)
    : CosineBasis(len1, len2, k1, k2) {
    grid_ = grid;
    has_grid_ = true;
    cos_x_.resize(k1_ + 1, grid.nx);
    cos_y_.resize(k2_ + 1, grid.ny);
    for (int l1 = 0; l1 <= k1_; ++l1) {
        const double norm = axis_norm(l1, len1_);
        for (int ix = 0; ix < grid.nx; ++ix) {
            const double x = grid.origin.x() + ix * grid.spacing;
            cos_x_(l1, ix) = norm * std::cos(std::numbers::pi * l1 * x / len1_);
        }
    }
    for (int l2 = 0; l2 <= k2_; ++l2) {
        const double norm = axis_norm(l2, len2_);
        for (int iy = 0; iy < grid.ny; ++iy) {
            const double y = grid.origin.y() + iy * grid.spacing;
            cos_y_(l2, iy) = norm * std::cos(std::numbers::pi * l2 * y / len2_);
        }
    }
}

double CosineBasis::eval(int l1, int l2, const Vec2& p) const {
    return axis_norm(l1, len1_) * axis_norm(l2, len2_) *
           std::cos(std::numbers::pi * l1 * p.x() / len1_) *
           std::cos(std::numbers::pi * l2 * p.y() / len2_);
}

Vec2 CosineBasis::grad(int l1, int l2, const Vec2& p) const {
    const double n = axis_norm(l1, len1_) * axis_norm(l2, len2_);
    const double a1 = std::numbers::pi * l1 / len1_;
    const double a2 = std::numbers::pi * l2 / len2_;
    const double c1 = std::cos(a1 * p.x());
    const double c2 = std::cos(a2 * p.y());
    const double s1 = std::sin(a1 * p.x());
    const double s2 = std::sin(a2 * p.y());
    return {-n * a1 * s1 * c2, -n * a2 * c1 * s2};
}

SpectralCoeffs CosineBasis::transform(const Eigen::VectorXd& field) const {
    if (!has_grid_) throw ConfigError("CosineBasis::transform: no grid attached");
    if (field.size() != grid_.count())
        throw ConfigError("CosineBasis::transform: field size does not match grid");

    SpectralCoeffs out;
    out.k1 = k1_;
    out.k2 = k2_;
    out.len1 = len1_;
    out.len2 = len2_;
    out.c.resize(k1_ + 1, k2_ + 1);

    // Separable analysis: first reduce rows against the x-cosines, then the
    // resulting (l1, iy) table against the y-cosines.
    const int nx = grid_.nx, ny = grid_.ny;
    RowMajorMatrix partial(k1_ + 1, ny); // partial(l1, iy)
    for (int l1 = 0; l1 <= k1_; ++l1) {
        const double* cx = cos_x_.row(l1).data();
        for (int iy = 0; iy < ny; ++iy) {
            const double* frow = field.data() + static_cast<std::ptrdiff_t>(iy) * nx;
            partial(l1, iy) = simd::dot(frow, cx, static_cast<std::size_t>(nx));
        }
    }
    for (int l1 = 0; l1 <= k1_; ++l1)
        for (int l2 = 0; l2 <= k2_; ++l2)
            out.c(l1, l2) = cell_area() * simd::dot(partial.row(l1).data(),
                                                    cos_y_.row(l2).data(),
                                                    static_cast<std::size_t>(ny));
    return out;
}

Eigen::VectorXd CosineBasis::inverse_transform(const SpectralCoeffs& coeffs,
                                               const Eigen::MatrixXd* weights) const {
    if (!has_grid_) throw ConfigError("CosineBasis::inverse_transform: no grid attached");
    if (coeffs.k1 != k1_ || coeffs.k2 != k2_)
        throw ConfigError("CosineBasis::inverse_transform: index set mismatch");

    const int nx = grid_.nx, ny = grid_.ny;
    // synth(l1, iy) = sum_l2 c(l1,l2) cos_y(l2, iy)
    RowMajorMatrix synth = RowMajorMatrix::Zero(k1_ + 1, ny);
    for (int l1 = 0; l1 <= k1_; ++l1)
        for (int l2 = 0; l2 <= k2_; ++l2) {
            const double w = weights ? (*weights)(l1, l2) : 1.0;
            simd::axpy(w * coeffs.c(l1, l2), cos_y_.row(l2).data(),
                       synth.row(l1).data(), static_cast<std::size_t>(ny));
        }
    Eigen::VectorXd field = Eigen::VectorXd::Zero(grid_.count());
    for (int iy = 0; iy < ny; ++iy) {
        double* frow = field.data() + static_cast<std::ptrdiff_t>(iy) * nx;
        for (int l1 = 0; l1 <= k1_; ++l1)
            simd::axpy(synth(l1, iy), cos_x_.row(l1).data(), frow,
                       static_cast<std::size_t>(nx));
    }
    return field;
}

double CosineBasis::synthesize_at(const SpectralCoeffs& coeffs, const Vec2& p,
                                  const Eigen::MatrixXd* weights) const {
    double acc = 0.0;
    for (int l1 = 0; l1 <= k1_; ++l1)
        for (int l2 = 0; l2 <= k2_; ++l2) {
            const double w = weights ? (*weights)(l1, l2) : 1.0;
            acc += w * coeffs.c(l1, l2) * eval(l1, l2, p);
        }
    return acc;
}

Vec2 CosineBasis::synthesize_grad_at(const SpectralCoeffs& coeffs, const Vec2& p,
                                     const Eigen::MatrixXd* weights) const {
    Vec2 acc{0.0, 0.0};
    for (int l1 = 0; l1 <= k1_; ++l1)
        for (int l2 = 0; l2 <= k2_; ++l2) {
            const double w = weights ? (*weights)(l1, l2) : 1.0;
            acc += w * coeffs.c(l1, l2) * grad(l1, l2, p);
        }
    return acc;
}

double sobolev_distance_sq(const SpectralCoeffs& a, const SpectralCoeffs& b,
                           const Eigen::MatrixXd& lambda) {
    if (!a.same_index_set(b) || lambda.rows() != a.c.rows() ||
        lambda.cols() != a.c.cols())
        throw ConfigError("sobolev_distance_sq: index set mismatch");
    double acc = 0.0;
    for (Eigen::Index l1 = 0; l1 < a.c.rows(); ++l1)
        for (Eigen::Index l2 = 0; l2 < a.c.cols(); ++l2) {
            const double d = a.c(l1, l2) - b.c(l1, l2);
            acc += lambda(l1, l2) * d * d;
        }
    return acc;
}

SpectralCoeffs truncate(const SpectralCoeffs& coeffs, const Eigen::MatrixXd& lambda,
                        int n_keep) {
    if (n_keep < 1) throw ConfigError("truncate: n_keep must be >= 1");
    if (lambda.rows() != coeffs.c.rows() || lambda.cols() != coeffs.c.cols())
        throw ConfigError("truncate: weight shape mismatch");

    struct Entry {
        double energy;
        int l1, l2;
    };
    std::vector<Entry> entries;
    entries.reserve(static_cast<std::size_t>(coeffs.c.size()));
    for (int l1 = 0; l1 <= coeffs.k1; ++l1)
        for (int l2 = 0; l2 <= coeffs.k2; ++l2)
            entries.push_back({lambda(l1, l2) * coeffs.c(l1, l2) * coeffs.c(l1, l2),
                               l1, l2});
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        return std::tie(b.energy, a.l1, a.l2) < std::tie(a.energy, b.l1, b.l2);
    });

    SpectralCoeffs out = coeffs;
    out.c.setZero();
    const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(n_keep),
                                                   entries.size());
    for (std::size_t i = 0; i < keep; ++i)
        out.c(entries[i].l1, entries[i].l2) = coeffs.c(entries[i].l1, entries[i].l2);
    return out;
}

void write_coeffs_csv(const std::filesystem::path& path, const SpectralCoeffs& coeffs,
                      const Eigen::MatrixXd& lambda) {
    if (lambda.rows() != coeffs.c.rows() || lambda.cols() != coeffs.c.cols())
        throw ConfigError("write_coeffs_csv: weight shape mismatch");
    const std::vector<std::string> header{"l1", "l2", "value", "lambda"};
    csv::Writer w(path, header);
    for (int l1 = 0; l1 <= coeffs.k1; ++l1)
        for (int l2 = 0; l2 <= coeffs.k2; ++l2)
            w.row(std::vector<double>{static_cast<double>(l1), static_cast<double>(l2),
                                      coeffs.c(l1, l2), lambda(l1, l2)});
}

} // namespace claricov
