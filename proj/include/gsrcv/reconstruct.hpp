#pragma once

/**
 * @file reconstruct.hpp
 * @brief Least-squares bandlimited reconstruction and the error operator.
 *
 * With known values x_S and bandwidth r, the coefficients alpha minimize
 * ||U_SR alpha - x_S|| and the unknown values are predicted as
 * U_{S^c R} alpha. The normal-equations inverse (U_SR^T U_SR)^-1 U_SR^T is
 * realized as an SVD pseudo-inverse with a relative singular-value cutoff, so
 * rank-deficient training sets produce the minimum-norm solution instead of
 * blowing up.
 *
 * The error operator M maps the out-of-band coefficients beta of any signal
 * to the reconstruction residual on a holdout set:
 *
 *     M = U_{H Rc} - U_{H R} pinv(U_{T R}) U_{T Rc},    e(H) = M beta.
 */

#include "error.hpp"
#include "graph.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cstddef>
#include <limits>
#include <string>

namespace gsrcv {

struct LeastSquaresOptions {
    /// Singular values below relative_cutoff * sigma_max are treated as zero.
    double relative_cutoff = 1e-10;
};

/// Pseudo-inverse of the training-set eigenvector block U_{T R}.
struct BandlimitedFit {
    Matrix pinv;             ///< r x |T|
    Vector singular_values;  ///< of U_{T R}, descending
    std::size_t rank = 0;
    double condition_number = 1.0;  ///< sigma_max / sigma_min, +inf when singular

    bool rank_deficient() const noexcept {
        return rank < static_cast<std::size_t>(singular_values.size());
    }
};

namespace detail {

inline void check_bandwidth(std::size_t r, std::size_t train_size, std::size_t n) {
    require(r >= 1, "bandwidth must be at least 1");
    require(r <= n, "bandwidth " + std::to_string(r) + " exceeds graph size " + std::to_string(n));
    if (r >= train_size) {
        fail(ErrorKind::invalid_argument,
             "bandwidth " + std::to_string(r) + " requires more than " + std::to_string(r) +
                 " known vertices, got " + std::to_string(train_size));
    }
}

inline BandlimitedFit pseudo_inverse(const Matrix& a, double relative_cutoff) {
    BandlimitedFit fit;
    if (a.cols() == 0) {
        fit.pinv = Matrix::Zero(0, a.rows());
        return fit;
    }
    Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    fit.singular_values = svd.singularValues();
    const double smax = fit.singular_values(0);
    const double smin = fit.singular_values(fit.singular_values.size() - 1);
    const double threshold = relative_cutoff * smax;
    Eigen::Index rank = 0;
    while (rank < fit.singular_values.size() && fit.singular_values(rank) > threshold) {
        ++rank;
    }
    if (rank == 0) {
        fail(ErrorKind::numerical, "training eigenvector block is numerically zero (" +
                                       std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                       ")");
    }
    fit.rank = static_cast<std::size_t>(rank);
    fit.condition_number = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    const Vector inv = fit.singular_values.head(rank).cwiseInverse();
    fit.pinv = svd.matrixV().leftCols(rank) * inv.asDiagonal() *
               svd.matrixU().leftCols(rank).transpose();
    return fit;
}

} // namespace detail

/// Fits the first r frequencies on the training vertices.
inline BandlimitedFit fit_bandlimited(const SpectralBasis& basis, const VertexSet& train,
                                      std::size_t r, const LeastSquaresOptions& opts = {}) {
    train.check_bounds(basis.size());
    detail::check_bandwidth(r, train.size(), basis.size());
    const Matrix u_tr = submatrix(basis.eigenvectors(), train, VertexSet::range(0, r));
    return detail::pseudo_inverse(u_tr, opts.relative_cutoff);
}

struct ReconstructionResult {
    VertexSet unknown;        ///< S^c, the order of `estimate`
    Vector estimate;          ///< predicted values on S^c
    Vector coefficients;      ///< fitted in-band coefficients
    std::size_t bandwidth = 0;
    std::size_t rank = 0;
    double condition_number = 1.0;
    bool rank_deficient = false;
};

/// Predicts the values on S^c from the known values x_S (ordered like S).
inline ReconstructionResult reconstruct_ls(const SpectralBasis& basis, const VertexSet& known,
                                           const Vector& known_values, std::size_t r,
                                           const LeastSquaresOptions& opts = {}) {
    require(static_cast<std::size_t>(known_values.size()) == known.size(),
            "known values length " + std::to_string(known_values.size()) +
                " does not match known set size " + std::to_string(known.size()));
    const BandlimitedFit fit = fit_bandlimited(basis, known, r, opts);

    ReconstructionResult out;
    out.unknown = known.complement(basis.size());
    out.coefficients = fit.pinv * known_values;
    out.estimate = submatrix(basis.eigenvectors(), out.unknown, VertexSet::range(0, r)) *
                   out.coefficients;
    out.bandwidth = r;
    out.rank = fit.rank;
    out.condition_number = fit.condition_number;
    out.rank_deficient = fit.rank_deficient();
    return out;
}

/// Residual x_H - x_hat_H on the holdout set when fitting on the training
/// set. `x` is the full-length signal; only its entries on T and H are read.
inline Vector holdout_residual(const SpectralBasis& basis, const VertexSet& train,
                               const VertexSet& holdout, const Vector& x, std::size_t r,
                               const LeastSquaresOptions& opts = {}) {
    require(static_cast<std::size_t>(x.size()) == basis.size(), "signal length mismatch");
    holdout.check_bounds(basis.size());
    const BandlimitedFit fit = fit_bandlimited(basis, train, r, opts);
    const Matrix u_hr = submatrix(basis.eigenvectors(), holdout, VertexSet::range(0, r));
    return restrict(x, holdout) - u_hr * (fit.pinv * restrict(x, train));
}

/// |H| x (n - r) error operator for training set T and holdout set H.
inline Matrix error_operator(const SpectralBasis& basis, const VertexSet& train,
                             const VertexSet& holdout, std::size_t r,
                             const LeastSquaresOptions& opts = {}) {
    holdout.check_bounds(basis.size());
    const BandlimitedFit fit = fit_bandlimited(basis, train, r, opts);
    const std::size_t n = basis.size();
    const VertexSet in_band = VertexSet::range(0, r);
    const VertexSet out_band = VertexSet::range(r, n);
    const Matrix& u = basis.eigenvectors();
    // (U_HR pinv) first keeps the product |H| x |T| before widening to n - r
    const Matrix lift = submatrix(u, holdout, in_band) * fit.pinv;
    return submatrix(u, holdout, out_band) - lift * submatrix(u, train, out_band);
}

} // namespace gsrcv
