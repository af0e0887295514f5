#include "claricov/ngpkf.hpp"

#include "claricov/simd.hpp"

#include <Eigen/QR>

#include <cmath>
#include <stdexcept>

namespace claricov {

namespace {

constexpr double kCoincidentSq = 1e-18; // squared km; below this, same point

// Upper-triangular R of a QR factorization with non-negative diagonal, so
// that A^T A = R^T R.
Eigen::MatrixXd qr_factor(const Eigen::MatrixXd& stacked, Eigen::Index n) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(stacked);
    Eigen::MatrixXd r = qr.matrixQR()
                            .topRows(n)
                            .triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < n; ++i)
        if (r(i, i) < 0.0) r.row(i) = -r.row(i);
    return r;
}

} // namespace

MeasurementBatch MeasurementBatch::uniform_noise(double t, std::vector<Vec2> positions,
                                                 Eigen::VectorXd values, double r) {
    MeasurementBatch b;
    b.t = t;
    b.noise_var = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(positions.size()), r);
    b.positions = std::move(positions);
    b.values = std::move(values);
    return b;
}

Ngpkf::Ngpkf(const GridSpec& grid, const KernelParams& params)
    : Ngpkf(grid, params,
            DomainBox{grid.bounds().lo - Vec2::Constant(0.5 * grid.spacing),
                      grid.bounds().hi + Vec2::Constant(0.5 * grid.spacing)}) {}

Ngpkf::Ngpkf(const GridSpec& grid, const KernelParams& params, const DomainBox& domain)
    : grid_(grid), params_(params), domain_(domain) {
    params_.validate();
    jitter_ = 1e-9 * params_.variance();

    const auto points = grid_.points();
    gx_.resize(points.size());
    gy_.resize(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        gx_[i] = points[i].x();
        gy_[i] = points[i].y();
    }

    Eigen::MatrixXd kgg = kernel_matrix(params_, points, points);
    kgg.diagonal().array() += jitter_;
    kgg_llt_.compute(kgg);
    if (kgg_llt_.info() != Eigen::Success)
        throw NumericalError("Ngpkf: Cholesky of K_gg + eps I failed "
                             "(ill-conditioned kernel matrix)");
}

FilterState Ngpkf::init_prior(const Eigen::VectorXd& mean0, double t0) const {
    if (mean0.size() != grid_.count())
        throw ConfigError("init_prior: mean size does not match grid");
    FilterState s;
    s.t = t0;
    s.mean = mean0;
    s.cov_sqrt = kgg_llt_.matrixU();
    return s;
}

FilterState Ngpkf::init_prior(double constant_mean, double t0) const {
    return init_prior(Eigen::VectorXd::Constant(grid_.count(), constant_mean), t0);
}

FilterState Ngpkf::predict(const FilterState& state, double dt,
                           const Eigen::VectorXd& rates) const {
    if (!(dt > 0.0)) throw std::invalid_argument("predict: dt must be > 0");
    if (rates.size() != grid_.count())
        throw ConfigError("predict: rates size does not match grid");
    if ((rates.array() < 0.0).any())
        throw std::invalid_argument("predict: negative process rate");

    const Eigen::Index g = grid_.count();
    FilterState out;
    out.t = state.t + dt;
    out.mean = state.mean;

    if ((rates.array() == 0.0).all()) {
        out.cov_sqrt = state.cov_sqrt;
        return out;
    }

    Eigen::MatrixXd stacked(2 * g, g);
    stacked.topRows(g) = state.cov_sqrt;
    stacked.bottomRows(g) =
        (rates.array() * dt).sqrt().matrix().asDiagonal().toDenseMatrix();
    out.cov_sqrt = qr_factor(stacked, g);
    return out;
}

Eigen::VectorXd Ngpkf::nugget_kernel_row(const Vec2& x) const {
    const std::size_t g = gx_.size();
    Eigen::VectorXd d2(static_cast<Eigen::Index>(g));
    Eigen::VectorXd row(static_cast<Eigen::Index>(g));
    simd::squared_distances(x.x(), x.y(), gx_.data(), gy_.data(), d2.data(), g);
    if (params_.family == KernelFamily::Matern12)
        simd::kernel_row_matern12(d2.data(), params_.variance(),
                                  1.0 / params_.length_scale, 0.0, row.data(), g);
    else
        simd::kernel_row_se(d2.data(), params_.variance(),
                            0.5 / (params_.length_scale * params_.length_scale),
                            row.data(), g);
    for (std::size_t i = 0; i < g; ++i)
        if (d2[static_cast<Eigen::Index>(i)] < kCoincidentSq)
            row[static_cast<Eigen::Index>(i)] += jitter_;
    return row;
}

void Ngpkf::observation_model(const MeasurementBatch& batch, Eigen::MatrixXd& c_mat,
                              Eigen::MatrixXd& v_mat) const {
    const Eigen::Index r = static_cast<Eigen::Index>(batch.positions.size());
    const Eigen::Index g = grid_.count();

    Eigen::MatrixXd k_rg(r, g);
    for (Eigen::Index i = 0; i < r; ++i)
        k_rg.row(i) = nugget_kernel_row(batch.positions[i]).transpose();

    Eigen::MatrixXd k_rr = kernel_matrix(params_, batch.positions, batch.positions);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < r; ++j)
            if ((batch.positions[static_cast<std::size_t>(i)] -
                 batch.positions[static_cast<std::size_t>(j)]).squaredNorm() < kCoincidentSq)
                k_rr(i, j) += jitter_;

    // C = K_rg Kgg^{-1}; solve against the cached factor, never invert.
    c_mat = kgg_llt_.solve(k_rg.transpose()).transpose();

    v_mat = k_rr - c_mat * k_rg.transpose();
    v_mat = 0.5 * (v_mat + v_mat.transpose()).eval();
    v_mat.diagonal() += batch.noise_var;
}

namespace {

void check_batch(const MeasurementBatch& batch, const FilterState& state,
                 const DomainBox& domain) {
    const auto r = batch.positions.size();
    if (r == 0) throw DataError("correct: empty measurement batch");
    if (batch.values.size() != static_cast<Eigen::Index>(r) ||
        batch.noise_var.size() != static_cast<Eigen::Index>(r))
        throw DataError("correct: batch vector sizes disagree");
    if ((batch.noise_var.array() <= 0.0).any())
        throw DataError("correct: measurement noise variance must be > 0");
    if (std::abs(batch.t - state.t) > 1e-9)
        throw std::invalid_argument("correct: batch time differs from state time; "
                                    "run predict first");
    for (const auto& p : batch.positions)
        if (!domain.contains(p))
            throw DataError("correct: measurement position outside domain");
}

} // namespace

FilterState Ngpkf::correct(const FilterState& state, const MeasurementBatch& batch) const {
    check_batch(batch, state, domain_);
    const Eigen::Index g = grid_.count();
    const Eigen::Index r = static_cast<Eigen::Index>(batch.positions.size());

    Eigen::MatrixXd c_mat, v_mat;
    observation_model(batch, c_mat, v_mat);

    const Eigen::MatrixXd xc = state.cov_sqrt * c_mat.transpose(); // U C^T, g x r
    Eigen::MatrixXd s_mat = xc.transpose() * xc + v_mat;           // innovation cov
    s_mat = 0.5 * (s_mat + s_mat.transpose()).eval();

    Eigen::LLT<Eigen::MatrixXd> llt_s(s_mat);
    if (llt_s.info() != Eigen::Success)
        throw NumericalError("correct: degenerate innovation covariance");

    const Eigen::MatrixXd sigma_ct = state.cov_sqrt.transpose() * xc; // Sigma C^T
    const Eigen::MatrixXd gain = llt_s.solve(sigma_ct.transpose()).transpose(); // g x r

    FilterState out;
    out.t = state.t;
    out.mean = state.mean + gain * (batch.values - c_mat * state.mean);

    // Joseph square root: stack U (I - LC)^T over chol(V) L^T; the R factor
    // of the stack is the posterior square root.
    Eigen::LLT<Eigen::MatrixXd> llt_v(v_mat);
    if (llt_v.info() != Eigen::Success) {
        Eigen::MatrixXd v_j = v_mat;
        v_j.diagonal().array() += 1e-12 * v_mat.trace() / static_cast<double>(r);
        llt_v.compute(v_j);
        if (llt_v.info() != Eigen::Success)
            throw NumericalError("correct: measurement covariance not positive definite");
    }
    Eigen::MatrixXd stacked(g + r, g);
    stacked.topRows(g) = state.cov_sqrt - xc * gain.transpose();
    stacked.bottomRows(r) = Eigen::MatrixXd(llt_v.matrixU()) * gain.transpose();
    out.cov_sqrt = qr_factor(stacked, g);
    return out;
}

Ngpkf::DenseUpdate Ngpkf::correct_dense_reference(const FilterState& state,
                                                  const MeasurementBatch& batch) const {
    check_batch(batch, state, domain_);
    Eigen::MatrixXd c_mat, v_mat;
    observation_model(batch, c_mat, v_mat);

    const Eigen::MatrixXd sigma = state.covariance();
    Eigen::MatrixXd s_mat = c_mat * sigma * c_mat.transpose() + v_mat;
    s_mat = 0.5 * (s_mat + s_mat.transpose()).eval();
    const Eigen::MatrixXd gain = s_mat.ldlt().solve(c_mat * sigma).transpose();

    DenseUpdate out;
    out.mean = state.mean + gain * (batch.values - c_mat * state.mean);
    out.covariance = sigma - gain * s_mat * gain.transpose();
    return out;
}

Ngpkf::PointEstimate Ngpkf::posterior_at(const FilterState& state, const Vec2& p) const {
    if (!domain_.contains(p))
        throw std::invalid_argument("posterior_at: point outside domain");
    const Eigen::VectorXd kg = nugget_kernel_row(p);
    const Eigen::VectorXd c = kgg_llt_.solve(kg);

    PointEstimate est;
    est.mean = c.dot(state.mean);
    const double prior_var = params_.variance() + jitter_ - kg.dot(c);
    const double state_var = (state.cov_sqrt * c).squaredNorm();
    est.variance = std::max(0.0, prior_var + state_var);
    return est;
}

ClarityMap clarity_map_from_filter(const FilterState& state, const GridSpec& grid,
                                   const Eigen::VectorXd& q_target) {
    if (state.mean.size() != grid.count())
        throw ConfigError("clarity_map_from_filter: state does not match grid");
    ClarityMap map;
    map.grid = grid;
    map.q_target = q_target;
    const Eigen::VectorXd diag = state.variance_diag();
    map.q.resize(diag.size());
    for (Eigen::Index i = 0; i < diag.size(); ++i)
        map.q[i] = 1.0 / (1.0 + diag[i]);
    return map;
}

} // namespace claricov
