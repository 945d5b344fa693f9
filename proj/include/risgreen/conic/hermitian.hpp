#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace risgreen::conic {

/// Real symmetric embedding [[Re H, -Im H], [Im H, Re H]] of a Hermitian matrix.
///
/// PSD-ness is preserved in both directions, every eigenvalue appears twice and
/// trace(embedding) = 2 Re trace(H). Inner products double as well:
/// <embed(A), embed(B)> = 2 Re tr(A^H B).
inline Eigen::MatrixXd hermitian_embed(const Eigen::MatrixXcd& h, double tol = 1e-10) {
    if (h.rows() != h.cols()) throw std::invalid_argument("hermitian_embed: matrix is not square");
    const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
    if ((h - h.adjoint()).cwiseAbs().maxCoeff() > tol * scale)
        throw std::invalid_argument("hermitian_embed: matrix is not Hermitian");
    const auto n = h.rows();
    Eigen::MatrixXd out(2 * n, 2 * n);
    out.topLeftCorner(n, n) = h.real();
    out.topRightCorner(n, n) = -h.imag();
    out.bottomLeftCorner(n, n) = h.imag();
    out.bottomRightCorner(n, n) = h.real();
    return out;
}

/// Projects a real 2n x 2n matrix onto the embedding structure and returns the
/// Hermitian matrix it represents.
inline Eigen::MatrixXcd hermitian_from_embedding(const Eigen::MatrixXd& x) {
    if (x.rows() != x.cols() || x.rows() % 2 != 0)
        throw std::invalid_argument("hermitian_from_embedding: expected an even square matrix");
    const auto n = x.rows() / 2;
    const Eigen::MatrixXd re = 0.5 * (x.topLeftCorner(n, n) + x.bottomRightCorner(n, n));
    const Eigen::MatrixXd im = 0.5 * (x.bottomLeftCorner(n, n) - x.topRightCorner(n, n));
    Eigen::MatrixXcd q(n, n);
    q.real() = re;
    q.imag() = im;
    return 0.5 * (q + q.adjoint());
}

template <typename Scalar>
struct RankOneResult {
    bool is_rank_one = false;
    double ratio = 0.0;  // leading eigenvalue over the sum of eigenvalues
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> principal;
};

/// Leading eigenpair test of a PSD matrix: rank one iff lambda_1 / sum(lambda) >= 1 - ratio_tol.
/// The principal vector is sqrt(lambda_1) u_1.
template <typename Scalar>
RankOneResult<Scalar> rank_one_extract(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& q,
                                       double ratio_tol, double psd_tol = 1e-7) {
    if (q.rows() != q.cols() || q.rows() == 0) throw std::invalid_argument("rank_one_extract: matrix is not square");
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const Mat sym = (q + q.adjoint()) / Scalar(2);
    Eigen::SelfAdjointEigenSolver<Mat> es(sym);
    const auto& ev = es.eigenvalues();
    const double top = ev(ev.size() - 1);
    const double bottom = ev(0);
    if (bottom < -psd_tol * std::max(1.0, std::abs(top)))
        throw std::invalid_argument("rank_one_extract: matrix is indefinite");
    double total = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) total += std::max(ev(i), 0.0);
    RankOneResult<Scalar> out;
    out.ratio = total > 0.0 ? top / total : 0.0;
    out.is_rank_one = total > 0.0 && out.ratio >= 1.0 - ratio_tol;
    out.principal = std::sqrt(std::max(top, 0.0)) * es.eigenvectors().col(ev.size() - 1);
    return out;
}

}  // namespace risgreen::conic
