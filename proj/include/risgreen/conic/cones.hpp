#pragma once

#include "risgreen/conic/problem.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace risgreen::conic {

inline constexpr double kSqrt2 = 1.41421356237309504880;

/// Isometric packing of the lower triangle (column-major, off-diagonals times sqrt 2).
template <typename Derived>
Eigen::VectorXd svec(const Eigen::MatrixBase<Derived>& expr) {
    const Eigen::MatrixXd m = expr;
    const auto side = m.rows();
    Eigen::VectorXd v(side * (side + 1) / 2);
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < side; ++j) {
        v(k++) = m(j, j);
        for (Eigen::Index i = j + 1; i < side; ++i) v(k++) = kSqrt2 * 0.5 * (m(i, j) + m(j, i));
    }
    return v;
}

template <typename Derived>
Eigen::MatrixXd smat(const Eigen::MatrixBase<Derived>& v, Eigen::Index side) {
    Eigen::MatrixXd m(side, side);
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < side; ++j) {
        m(j, j) = v(k++);
        for (Eigen::Index i = j + 1; i < side; ++i) {
            m(i, j) = v(k++) / kSqrt2;
            m(j, i) = m(i, j);
        }
    }
    return m;
}

/// Position of a cone inside the stacked slack/multiplier vectors.
struct ConeSlot {
    ConeKind kind;
    Eigen::Index dim;
    Eigen::Index offset;
    Eigen::Index rows;
};

/// Nesterov-Todd scaling of one cone, with the scaled point lambda = W z = W^{-T} s.
///
/// nonneg: W = diag(w).
/// soc:    W = beta * [[wb0, wb1'], [wb1, I + wb1 wb1' / (1 + wb0)]] (symmetric).
/// psd:    W(Z) = r' Z r, W^{-T}(S) = rti' S rti with rti = r^{-T}; lambda diagonal.
struct ConeScaling {
    ConeSlot slot;
    Eigen::VectorXd w;
    double beta = 1.0;
    Eigen::MatrixXd r;
    Eigen::MatrixXd rti;
    Eigen::VectorXd lambda;  // psd: eigenvalues of the diagonal scaled point
};

namespace detail {

inline double soc_jnorm2(const Eigen::Ref<const Eigen::VectorXd>& u) {
    const double t = u.tail(u.size() - 1).norm();
    return (u(0) - t) * (u(0) + t);
}

inline Eigen::VectorXd soc_apply(const ConeScaling& sc, const Eigen::Ref<const Eigen::VectorXd>& v,
                                 bool inverse) {
    const auto& wb = sc.w;
    const auto n = v.size();
    const double w0 = wb(0);
    const auto w1 = wb.tail(n - 1);
    const auto v1 = v.tail(n - 1);
    const double dot = w1.dot(v1);
    Eigen::VectorXd out(n);
    if (!inverse) {
        out(0) = sc.beta * (w0 * v(0) + dot);
        out.tail(n - 1) = sc.beta * (v1 + (v(0) + dot / (1.0 + w0)) * w1);
    } else {
        out(0) = (w0 * v(0) - dot) / sc.beta;
        out.tail(n - 1) = (v1 + (-v(0) + dot / (1.0 + w0)) * w1) / sc.beta;
    }
    return out;
}

struct PsdFactors {
    Eigen::MatrixXd r;
    Eigen::MatrixXd rti;
    Eigen::VectorXd lambda;
};

inline PsdFactors psd_nt(const Eigen::MatrixXd& s, const Eigen::MatrixXd& z) {
    Eigen::LLT<Eigen::MatrixXd> ls(s);
    Eigen::LLT<Eigen::MatrixXd> lz(z);
    if (ls.info() != Eigen::Success || lz.info() != Eigen::Success)
        throw std::runtime_error("psd iterate lost definiteness");
    const Eigen::MatrixXd l_s = ls.matrixL();
    const Eigen::MatrixXd l_z = lz.matrixL();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(l_z.transpose() * l_s, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::VectorXd sig = svd.singularValues();
    if (sig.minCoeff() <= 0.0) throw std::runtime_error("psd scaling is singular");
    const Eigen::VectorXd inv_sqrt = sig.cwiseSqrt().cwiseInverse();
    PsdFactors f;
    f.r = l_s * svd.matrixV() * inv_sqrt.asDiagonal();
    f.rti = l_z * svd.matrixU() * inv_sqrt.asDiagonal();
    f.lambda = sig;
    return f;
}

/// Largest alpha >= 0 with u + alpha d in the second-order cone (u interior).
inline double soc_max_step(const Eigen::Ref<const Eigen::VectorXd>& u, const Eigen::Ref<const Eigen::VectorXd>& d) {
    const auto n = u.size();
    const double a = d(0) * d(0) - d.tail(n - 1).squaredNorm();
    const double b = 2.0 * (u(0) * d(0) - u.tail(n - 1).dot(d.tail(n - 1)));
    const double c = std::max(soc_jnorm2(u), 0.0);
    const double inf = std::numeric_limits<double>::infinity();
    double roots[2] = {inf, inf};
    int count = 0;
    if (std::abs(a) <= 1e-300) {
        if (b < 0.0) roots[count++] = -c / b;
    } else {
        const double disc = b * b - 4.0 * a * c;
        if (disc >= 0.0) {
            const double sq = std::sqrt(disc);
            const double qq = -0.5 * (b + (b >= 0.0 ? sq : -sq));
            double r1 = qq / a;
            double r2 = qq != 0.0 ? c / qq : inf;
            if (r1 > r2) std::swap(r1, r2);
            roots[count++] = r1;
            roots[count++] = r2;
        }
    }
    double best = inf;
    for (int i = 0; i < count; ++i) {
        const double t = roots[i];
        if (t > 0.0 && u(0) + t * d(0) >= -1e-12 * std::abs(u(0))) best = std::min(best, t);
    }
    // Head may cross zero before the quadratic does (direction pointing into -K).
    if (d(0) < 0.0) best = std::min(best, -u(0) / d(0));
    return best;
}

}  // namespace detail

/// Shift needed so that u + shift * e lies in the cone boundary (negative if interior).
inline double cone_violation(const ConeSlot& slot, const Eigen::Ref<const Eigen::VectorXd>& u) {
    switch (slot.kind) {
        case ConeKind::nonneg: return -u.minCoeff();
        case ConeKind::soc: return -(u(0) - u.tail(u.size() - 1).norm());
        case ConeKind::psd: {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(smat(u, slot.dim), Eigen::EigenvaluesOnly);
            return -es.eigenvalues()(0);
        }
        case ConeKind::zero: break;
    }
    return 0.0;
}

inline void add_unit(const ConeSlot& slot, Eigen::Ref<Eigen::VectorXd> u, double scale) {
    switch (slot.kind) {
        case ConeKind::nonneg: u.array() += scale; break;
        case ConeKind::soc: u(0) += scale; break;
        case ConeKind::psd: {
            Eigen::Index k = 0;
            for (Eigen::Index j = 0; j < slot.dim; ++j) {
                u(k) += scale;
                k += slot.dim - j;
            }
            break;
        }
        case ConeKind::zero: break;
    }
}

inline Eigen::Index cone_degree(const ConeSlot& slot) {
    switch (slot.kind) {
        case ConeKind::nonneg: return slot.dim;
        case ConeKind::soc: return 1;
        case ConeKind::psd: return slot.dim;
        case ConeKind::zero: return 0;
    }
    return 0;
}

inline ConeScaling compute_scaling(const ConeSlot& slot, const Eigen::Ref<const Eigen::VectorXd>& s,
                                   const Eigen::Ref<const Eigen::VectorXd>& z) {
    ConeScaling sc;
    sc.slot = slot;
    switch (slot.kind) {
        case ConeKind::nonneg: {
            if (s.minCoeff() <= 0.0 || z.minCoeff() <= 0.0) throw std::runtime_error("nonneg iterate left cone");
            sc.w = (s.array() / z.array()).sqrt();
            sc.lambda = (s.array() * z.array()).sqrt();
            break;
        }
        case ConeKind::soc: {
            const double sres = detail::soc_jnorm2(s);
            const double zres = detail::soc_jnorm2(z);
            if (sres <= 0.0 || zres <= 0.0 || s(0) <= 0.0 || z(0) <= 0.0)
                throw std::runtime_error("soc iterate left cone");
            const Eigen::VectorXd sb = s / std::sqrt(sres);
            Eigen::VectorXd zb = z / std::sqrt(zres);
            const double gamma = std::sqrt(0.5 * (1.0 + sb.dot(zb)));
            zb.tail(zb.size() - 1) *= -1.0;
            sc.w = (sb + zb) / (2.0 * gamma);
            sc.beta = std::pow(sres / zres, 0.25);
            sc.lambda = detail::soc_apply(sc, z, false);
            break;
        }
        case ConeKind::psd: {
            auto f = detail::psd_nt(smat(s, slot.dim), smat(z, slot.dim));
            sc.r = std::move(f.r);
            sc.rti = std::move(f.rti);
            sc.lambda = std::move(f.lambda);
            break;
        }
        case ConeKind::zero: break;
    }
    return sc;
}

/// Refreshes a psd scaling from the stepped scaled iterates (lambda + a ds, lambda + a dz).
inline void update_psd_scaling(ConeScaling& sc, const Eigen::Ref<const Eigen::VectorXd>& s_scaled,
                               const Eigen::Ref<const Eigen::VectorXd>& z_scaled) {
    auto f = detail::psd_nt(smat(s_scaled, sc.slot.dim), smat(z_scaled, sc.slot.dim));
    sc.r = sc.r * f.r;
    sc.rti = sc.rti * f.rti;
    sc.lambda = std::move(f.lambda);
}

enum class ScaleOp { w, w_inv, w_t, w_inv_t };

inline Eigen::VectorXd apply_scaling(const ConeScaling& sc, const Eigen::Ref<const Eigen::VectorXd>& v, ScaleOp op) {
    switch (sc.slot.kind) {
        case ConeKind::nonneg:
            return (op == ScaleOp::w || op == ScaleOp::w_t) ? Eigen::VectorXd(v.cwiseProduct(sc.w))
                                                            : Eigen::VectorXd(v.cwiseQuotient(sc.w));
        case ConeKind::soc:
            return detail::soc_apply(sc, v, op == ScaleOp::w_inv || op == ScaleOp::w_inv_t);
        case ConeKind::psd: {
            const Eigen::MatrixXd m = smat(v, sc.slot.dim);
            switch (op) {
                case ScaleOp::w: return svec(sc.r.transpose() * m * sc.r);
                case ScaleOp::w_t: return svec(sc.r * m * sc.r.transpose());
                case ScaleOp::w_inv: return svec(sc.rti * m * sc.rti.transpose());
                case ScaleOp::w_inv_t: return svec(sc.rti.transpose() * m * sc.rti);
            }
            break;
        }
        case ConeKind::zero: break;
    }
    return v;
}

/// The scaled point lambda as a stacked cone vector.
inline Eigen::VectorXd lambda_vector(const ConeScaling& sc) {
    if (sc.slot.kind != ConeKind::psd) return sc.lambda;
    return svec(Eigen::MatrixXd(sc.lambda.asDiagonal()));
}

/// Jordan product u o v.
inline Eigen::VectorXd jordan(const ConeSlot& slot, const Eigen::Ref<const Eigen::VectorXd>& u,
                              const Eigen::Ref<const Eigen::VectorXd>& v) {
    switch (slot.kind) {
        case ConeKind::nonneg: return u.cwiseProduct(v);
        case ConeKind::soc: {
            Eigen::VectorXd out(u.size());
            out(0) = u.dot(v);
            out.tail(u.size() - 1) = u(0) * v.tail(v.size() - 1) + v(0) * u.tail(u.size() - 1);
            return out;
        }
        case ConeKind::psd: {
            const Eigen::MatrixXd a = smat(u, slot.dim);
            const Eigen::MatrixXd b = smat(v, slot.dim);
            return svec(0.5 * (a * b + b * a));
        }
        case ConeKind::zero: break;
    }
    return u;
}

/// Solves lambda o x = v for x.
inline Eigen::VectorXd lambda_divide(const ConeScaling& sc, const Eigen::Ref<const Eigen::VectorXd>& v) {
    switch (sc.slot.kind) {
        case ConeKind::nonneg: return v.cwiseQuotient(sc.lambda);
        case ConeKind::soc: {
            const auto& l = sc.lambda;
            const auto n = l.size();
            const double det = detail::soc_jnorm2(l);
            Eigen::VectorXd x(n);
            x(0) = (l(0) * v(0) - l.tail(n - 1).dot(v.tail(n - 1))) / det;
            x.tail(n - 1) = (v.tail(n - 1) - x(0) * l.tail(n - 1)) / l(0);
            return x;
        }
        case ConeKind::psd: {
            Eigen::MatrixXd m = smat(v, sc.slot.dim);
            for (Eigen::Index j = 0; j < m.cols(); ++j)
                for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) *= 2.0 / (sc.lambda(i) + sc.lambda(j));
            return svec(m);
        }
        case ConeKind::zero: break;
    }
    return v;
}

/// Largest alpha with lambda + alpha d in the cone, d given in scaled coordinates.
inline double max_step_scaled(const ConeScaling& sc, const Eigen::Ref<const Eigen::VectorXd>& d) {
    const double inf = std::numeric_limits<double>::infinity();
    switch (sc.slot.kind) {
        case ConeKind::nonneg: {
            double a = inf;
            for (Eigen::Index i = 0; i < d.size(); ++i)
                if (d(i) < 0.0) a = std::min(a, -sc.lambda(i) / d(i));
            return a;
        }
        case ConeKind::soc: return detail::soc_max_step(sc.lambda, d);
        case ConeKind::psd: {
            const Eigen::VectorXd isq = sc.lambda.cwiseSqrt().cwiseInverse();
            const Eigen::MatrixXd m = isq.asDiagonal() * smat(d, sc.slot.dim) * isq.asDiagonal();
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
            const double lo = es.eigenvalues()(0);
            return lo < 0.0 ? -1.0 / lo : inf;
        }
        case ConeKind::zero: break;
    }
    return inf;
}

/// Largest alpha with u + alpha d in the cone, u interior, unscaled coordinates.
inline double max_step(const ConeSlot& slot, const Eigen::Ref<const Eigen::VectorXd>& u,
                       const Eigen::Ref<const Eigen::VectorXd>& d) {
    const double inf = std::numeric_limits<double>::infinity();
    switch (slot.kind) {
        case ConeKind::nonneg: {
            double a = inf;
            for (Eigen::Index i = 0; i < d.size(); ++i)
                if (d(i) < 0.0) a = std::min(a, -u(i) / d(i));
            return a;
        }
        case ConeKind::soc: return detail::soc_max_step(u, d);
        case ConeKind::psd: {
            Eigen::LLT<Eigen::MatrixXd> llt(smat(u, slot.dim));
            const Eigen::MatrixXd l = llt.matrixL();
            const Eigen::MatrixXd tmp = l.triangularView<Eigen::Lower>().solve(smat(d, slot.dim));
            const Eigen::MatrixXd m = l.triangularView<Eigen::Lower>().solve(tmp.transpose());
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
            const double lo = es.eigenvalues()(0);
            return lo < 0.0 ? -1.0 / lo : inf;
        }
        case ConeKind::zero: break;
    }
    return inf;
}

}  // namespace risgreen::conic
