#pragma once

// Primal-dual interior-point method on the homogeneous self-dual embedding
// with Nesterov-Todd scaling and a Mehrotra predictor-corrector, for dense
// problems over products of zero, nonnegative, second-order and PSD cones.
//
// Internally the problem is split as
//   minimize c'x  s.t.  A x = b (zero-cone rows),  h - G x in K (all other rows)
// and the embedding iterates (x, y, z, s, tau, kappa) satisfy at optimality
//   A'y + G'z + c tau = 0,  A x = b tau,  G x + s = h tau,  c'x + b'y + h'z + kappa = 0.

#include "risgreen/conic/cones.hpp"
#include "risgreen/conic/problem.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#ifdef RISGREEN_CONIC_TRACE
#include <cstdio>
#endif
#include <stdexcept>
#include <vector>

namespace risgreen::conic {

namespace detail {

struct Split {
    Eigen::MatrixXd a;
    Eigen::VectorXd b;
    Eigen::MatrixXd g;
    Eigen::VectorXd h;
    std::vector<ConeSlot> cones;
    // Row of the original block stacking for every row of (a) and (g).
    std::vector<Eigen::Index> eq_rows;
    std::vector<Eigen::Index> cone_rows;
    Eigen::Index total_rows = 0;
    Eigen::Index degree = 0;
};

inline Split split_problem(const ConicProblem& p) {
    Split sp;
    const auto n = p.num_vars();
    Eigen::Index eq = 0, cone = 0;
    for (const auto& blk : p.blocks) (blk.kind == ConeKind::zero ? eq : cone) += blk.rows();
    sp.a.resize(eq, n);
    sp.b.resize(eq);
    sp.g.resize(cone, n);
    sp.h.resize(cone);
    Eigen::Index ie = 0, ic = 0, row = 0;
    for (const auto& blk : p.blocks) {
        const auto r = blk.rows();
        if (blk.kind == ConeKind::zero) {
            sp.a.middleRows(ie, r) = blk.map;
            sp.b.segment(ie, r) = blk.offset;
            for (Eigen::Index i = 0; i < r; ++i) sp.eq_rows.push_back(row + i);
            ie += r;
        } else {
            sp.g.middleRows(ic, r) = blk.map;
            sp.h.segment(ic, r) = blk.offset;
            for (Eigen::Index i = 0; i < r; ++i) sp.cone_rows.push_back(row + i);
            sp.cones.push_back({blk.kind, blk.dim, ic, r});
            sp.degree += cone_degree(sp.cones.back());
            ic += r;
        }
        row += r;
    }
    sp.total_rows = row;
    return sp;
}

/// Reduced KKT system for fixed scalings:
///   A'dy + G'dz = bx,  A dx = by,  G dx - W'W dz = bz.
class KktSystem {
public:
    KktSystem(const Split& sp, const std::vector<ConeScaling>& sc) : sp_(sp), sc_(sc) {
        const auto n = sp.g.cols();
        const auto p = sp.a.rows();
        for (const auto& c : sc) {
            if (c.slot.kind != ConeKind::psd) continue;
            wtw_.push_back(c.r * c.r.transpose());
            wtw_inv_.push_back(c.rti * c.rti.transpose());
        }
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
        for (const auto& c : sc) {
            Eigen::MatrixXd y(c.slot.rows, n);
            const auto gblk = sp.g.middleRows(c.slot.offset, c.slot.rows);
            if (c.slot.kind == ConeKind::nonneg) {
                y = c.w.cwiseInverse().asDiagonal() * gblk;
            } else {
                for (Eigen::Index j = 0; j < n; ++j) y.col(j) = apply_scaling(c, gblk.col(j), ScaleOp::w_inv_t);
            }
            h.noalias() += y.transpose() * y;
        }
        const double scale = 1.0 + (n > 0 ? h.diagonal().cwiseAbs().maxCoeff() : 0.0);
        const double reg = 1e-13 * scale;
        exact_ = Eigen::MatrixXd::Zero(n + p, n + p);
        exact_.topLeftCorner(n, n) = h;
        exact_.topRightCorner(n, p) = sp.a.transpose();
        exact_.bottomLeftCorner(p, n) = sp.a;
        Eigen::MatrixXd regd = exact_;
        regd.topLeftCorner(n, n).diagonal().array() += reg;
        regd.bottomRightCorner(p, p).diagonal().array() -= reg;
        if (p == 0) {
            llt_.compute(regd);
            use_llt_ = llt_.info() == Eigen::Success;
        }
        if (!use_llt_) lu_.compute(regd);
    }

    void solve(const Eigen::VectorXd& bx, const Eigen::VectorXd& by, const Eigen::VectorXd& bz, Eigen::VectorXd& dx,
               Eigen::VectorXd& dy, Eigen::VectorXd& dz) const {
        reduced_solve(bx, by, bz, dx, dy, dz);
        // Refinement against the unreduced system; forming G'W^-2 G squares its conditioning.
        const double scale = 1.0 + std::max({bx.lpNorm<Eigen::Infinity>(), by.size() ? by.lpNorm<Eigen::Infinity>() : 0.0,
                                             bz.size() ? bz.lpNorm<Eigen::Infinity>() : 0.0});
        Eigen::VectorXd ex, ey, ez;
        for (int it = 0; it < 4; ++it) {
            const Eigen::VectorXd rx = bx - sp_.a.transpose() * dy - sp_.g.transpose() * dz;
            const Eigen::VectorXd ry = by - sp_.a * dx;
            const Eigen::VectorXd rz = bz - sp_.g * dx + apply_wtw(dz);
            const double err = std::max({rx.size() ? rx.lpNorm<Eigen::Infinity>() : 0.0,
                                         ry.size() ? ry.lpNorm<Eigen::Infinity>() : 0.0,
                                         rz.size() ? rz.lpNorm<Eigen::Infinity>() : 0.0});
            if (err <= 1e-14 * scale) break;
            reduced_solve(rx, ry, rz, ex, ey, ez);
            dx += ex;
            dy += ey;
            dz += ez;
        }
    }

    /// W'W v, blockwise.
    Eigen::VectorXd apply_wtw(const Eigen::VectorXd& v) const {
        Eigen::VectorXd out(v.size());
        std::size_t ipsd = 0;
        for (const auto& c : sc_) {
            const auto seg = v.segment(c.slot.offset, c.slot.rows);
            if (c.slot.kind == ConeKind::psd) {
                const auto& m = wtw_[ipsd++];
                out.segment(c.slot.offset, c.slot.rows) = svec(m * smat(seg, c.slot.dim) * m);
            } else {
                out.segment(c.slot.offset, c.slot.rows) = apply_scaling(c, apply_scaling(c, seg, ScaleOp::w), ScaleOp::w_t);
            }
        }
        return out;
    }

    /// (W'W)^{-1} v, blockwise.
    Eigen::VectorXd apply_wtw_inv(const Eigen::VectorXd& v) const {
        Eigen::VectorXd out(v.size());
        std::size_t ipsd = 0;
        for (const auto& c : sc_) {
            const auto seg = v.segment(c.slot.offset, c.slot.rows);
            if (c.slot.kind == ConeKind::psd) {
                const auto& m = wtw_inv_[ipsd++];
                out.segment(c.slot.offset, c.slot.rows) = svec(m * smat(seg, c.slot.dim) * m);
            } else {
                out.segment(c.slot.offset, c.slot.rows) =
                    apply_scaling(c, apply_scaling(c, seg, ScaleOp::w_inv_t), ScaleOp::w_inv);
            }
        }
        return out;
    }

private:
    void reduced_solve(const Eigen::VectorXd& bx, const Eigen::VectorXd& by, const Eigen::VectorXd& bz,
                       Eigen::VectorXd& dx, Eigen::VectorXd& dy, Eigen::VectorXd& dz) const {
        const auto n = sp_.g.cols();
        const auto p = sp_.a.rows();
        Eigen::VectorXd rhs(n + p);
        rhs.head(n) = bx + sp_.g.transpose() * apply_wtw_inv(bz);
        rhs.tail(p) = by;
        Eigen::VectorXd sol = factor_solve(rhs);
        const Eigen::VectorXd res = rhs - exact_ * sol;
        sol += factor_solve(res);
        dx = sol.head(n);
        dy = sol.tail(p);
        dz = apply_wtw_inv(sp_.g * dx - bz);
    }

    Eigen::VectorXd factor_solve(const Eigen::VectorXd& r) const {
        if (use_llt_) return llt_.solve(r);
        return lu_.solve(r);
    }

    const Split& sp_;
    const std::vector<ConeScaling>& sc_;
    std::vector<Eigen::MatrixXd> wtw_;      // r r' per psd cone
    std::vector<Eigen::MatrixXd> wtw_inv_;  // rti rti' per psd cone
    Eigen::MatrixXd exact_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
    bool use_llt_ = false;
};

inline Eigen::VectorXd blockwise(const std::vector<ConeScaling>& sc, Eigen::Index m,
                                 const auto& fn) {
    Eigen::VectorXd out(m);
    for (const auto& c : sc) out.segment(c.slot.offset, c.slot.rows) = fn(c);
    return out;
}

}  // namespace detail

inline ConicSolution solve(const ConicProblem& problem, const Tolerances& tol = {}) {
    problem.validate();
    const auto sp = detail::split_problem(problem);
    const auto n = problem.num_vars();
    const auto p = sp.a.rows();
    const auto m = sp.g.rows();
    const Eigen::VectorXd& c = problem.objective;
    const auto& a = sp.a;
    const auto& b = sp.b;
    const auto& g = sp.g;
    const auto& h = sp.h;

    const double nrm_c = std::max(1.0, c.norm());
    const double nrm_b = std::max(1.0, b.norm());
    const double nrm_h = std::max(1.0, h.norm());

    ConicSolution out;
    auto assemble = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& s, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& z, double scale) {
        out.x = x / scale;
        out.s = Eigen::VectorXd::Zero(sp.total_rows);
        out.y = Eigen::VectorXd::Zero(sp.total_rows);
        for (Eigen::Index i = 0; i < p; ++i) out.y(sp.eq_rows[i]) = y(i) / scale;
        for (Eigen::Index i = 0; i < m; ++i) {
            out.s(sp.cone_rows[i]) = s(i) / scale;
            out.y(sp.cone_rows[i]) = z(i) / scale;
        }
    };

    // Identity scaling for the starting-point solves.
    std::vector<ConeScaling> scal;
    for (const auto& slot : sp.cones) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(slot.rows);
        add_unit(slot, e, 1.0);
        scal.push_back(compute_scaling(slot, e, e));
    }

    Eigen::VectorXd x(n), y(p), z(m), s(m);
    {
        detail::KktSystem kkt(sp, scal);
        Eigen::VectorXd zz;
        kkt.solve(Eigen::VectorXd::Zero(n), b, h, x, y, zz);
        s = -zz;
        Eigen::VectorXd xd, yd;
        kkt.solve(-c, Eigen::VectorXd::Zero(p), Eigen::VectorXd::Zero(m), xd, yd, z);
        y = yd;
        for (const auto& slot : sp.cones) {
            for (auto* v : {&s, &z}) {
                auto seg = v->segment(slot.offset, slot.rows);
                const double viol = cone_violation(slot, seg);
                const double nrm = std::max(1.0, seg.norm());
                if (viol >= -1e-8 * nrm) add_unit(slot, seg, 1.0 + std::max(viol, 0.0));
            }
        }
    }
    double tau = 1.0, kappa = 1.0;

    try {
        scal.clear();
        for (const auto& slot : sp.cones)
            scal.push_back(compute_scaling(slot, s.segment(slot.offset, slot.rows), z.segment(slot.offset, slot.rows)));
    } catch (const std::runtime_error&) {
        assemble(x, s, y, z, 1.0);
        return out;
    }

    // Best iterate so far, by the largest of the four stopping measures.
    struct Snapshot {
        Eigen::VectorXd x, s, y, z;
        double tau = 1.0, merit = std::numeric_limits<double>::infinity();
        double pcost = 0.0, dcost = 0.0, gap = 0.0, pres = 0.0, dres = 0.0;
        int iter = 0;
    } best;

    int stall = 0;
    for (int iter = 0; iter <= tol.max_iter; ++iter) {
        out.iterations = iter;
        const Eigen::VectorXd aty_gtz = a.transpose() * y + g.transpose() * z;
        const Eigen::VectorXd r1 = aty_gtz + c * tau;
        const Eigen::VectorXd ax = a * x;
        const Eigen::VectorXd gxs = g * x + s;
        const Eigen::VectorXd r2 = ax - b * tau;
        const Eigen::VectorXd r3 = gxs - h * tau;
        const double cx = c.dot(x);
        const double by_hz = b.dot(y) + h.dot(z);
        const double r4 = cx + by_hz + kappa;

        const double pcost = cx / tau;
        const double dcost = -by_hz / tau;
        const double pres = std::max(r2.norm() / nrm_b, r3.norm() / nrm_h) / tau;
        const double dres = r1.norm() / nrm_c / tau;
        const double relgap = std::abs(pcost - dcost) / (1.0 + std::abs(pcost));
        const double comp = s.dot(z) / (tau * tau) / (1.0 + std::abs(pcost));

        out.primal_objective = pcost;
        out.dual_objective = dcost;
        out.gap = std::max(relgap, comp);
        out.primal_residual = pres;
        out.dual_residual = dres;
        if (const double merit = std::max({pres, dres, relgap, comp}); merit < best.merit) {
            best = {x, s, y, z, tau, merit, pcost, dcost, std::max(relgap, comp), pres, dres, iter};
        }

#ifdef RISGREEN_CONIC_TRACE
        std::fprintf(stderr, "%3d pc %.6e dc %.6e pres %.2e dres %.2e gap %.2e comp %.2e tau %.2e kap %.2e\n", iter, pcost, dcost, pres, dres, relgap, comp, tau, kappa);
#endif
        if (pres <= tol.feas && dres <= tol.feas && relgap <= tol.gap && comp <= tol.gap) {
            out.status = ConicStatus::optimal;
            assemble(x, s, y, z, tau);
            return out;
        }
        if (by_hz < 0.0) {
            const double pinf = aty_gtz.norm() / nrm_c / (-by_hz);
            if (pinf <= tol.feas) {
                out.status = ConicStatus::primal_infeasible;
                assemble(x, s, y, z, -by_hz);
                out.dual_residual = pinf;
                return out;
            }
        }
        if (cx < 0.0) {
            const double dinf = std::max(ax.norm() / nrm_b, gxs.norm() / nrm_h) / (-cx);
            if (dinf <= tol.feas) {
                out.status = ConicStatus::dual_infeasible;
                assemble(x, s, y, z, -cx);
                out.primal_residual = dinf;
                return out;
            }
        }
        if (iter == tol.max_iter) break;

        try {
            const detail::KktSystem kkt(sp, scal);
            Eigen::VectorXd x2, y2, z2;
            kkt.solve(-c, b, h, x2, y2, z2);
            const double denom2 = c.dot(x2) + b.dot(y2) + h.dot(z2) - kappa / tau;

            const double mu = (s.dot(z) + tau * kappa) / static_cast<double>(sp.degree + 1);
            const Eigen::VectorXd lam = detail::blockwise(scal, m, [](const ConeScaling& cs) { return lambda_vector(cs); });
            const Eigen::VectorXd lam2 =
                detail::blockwise(scal, m, [&](const ConeScaling& cs) {
                    const auto l = lam.segment(cs.slot.offset, cs.slot.rows);
                    return jordan(cs.slot, l, l);
                });

            struct Step {
                Eigen::VectorXd dx, dy, dz, ds;
                double dtau = 0.0, dkappa = 0.0;
            };
            auto newton = [&](double eta, const Eigen::VectorXd& ds_target, double dk_target) {
                Step st;
                const Eigen::VectorXd ldiv = detail::blockwise(scal, m, [&](const ConeScaling& cs) {
                    return lambda_divide(cs, ds_target.segment(cs.slot.offset, cs.slot.rows));
                });
                const Eigen::VectorXd wt_ldiv = detail::blockwise(scal, m, [&](const ConeScaling& cs) {
                    return apply_scaling(cs, ldiv.segment(cs.slot.offset, cs.slot.rows), ScaleOp::w_t);
                });
                const Eigen::VectorXd rx = -eta * r1;
                const Eigen::VectorXd ry = -eta * r2;
                const Eigen::VectorXd rz = -eta * r3 - wt_ldiv;
                const double rt = -eta * r4 - dk_target / tau;
                Eigen::VectorXd x1, y1, z1;
                kkt.solve(rx, ry, rz, x1, y1, z1);
                st.dtau = (rt - (c.dot(x1) + b.dot(y1) + h.dot(z1))) / denom2;
                st.dx = x1 + st.dtau * x2;
                st.dy = y1 + st.dtau * y2;
                st.dz = z1 + st.dtau * z2;
                st.ds = detail::blockwise(scal, m, [&](const ConeScaling& cs) {
                    const Eigen::VectorXd wdz = apply_scaling(cs, st.dz.segment(cs.slot.offset, cs.slot.rows), ScaleOp::w);
                    const Eigen::VectorXd inner = ldiv.segment(cs.slot.offset, cs.slot.rows) - wdz;
                    return apply_scaling(cs, inner, ScaleOp::w_t);
                });
                st.dkappa = (dk_target - kappa * st.dtau) / tau;
                return st;
            };
            auto scaled_dirs = [&](const Step& st, Eigen::VectorXd& dsv, Eigen::VectorXd& dzv) {
                dsv = detail::blockwise(scal, m, [&](const ConeScaling& cs) {
                    return apply_scaling(cs, st.ds.segment(cs.slot.offset, cs.slot.rows), ScaleOp::w_inv_t);
                });
                dzv = detail::blockwise(scal, m, [&](const ConeScaling& cs) {
                    return apply_scaling(cs, st.dz.segment(cs.slot.offset, cs.slot.rows), ScaleOp::w);
                });
            };
            auto step_length = [&](const Step& st, const Eigen::VectorXd& dsv, const Eigen::VectorXd& dzv) {
                double alpha = std::numeric_limits<double>::infinity();
                for (const auto& cs : scal) {
                    alpha = std::min(alpha, max_step_scaled(cs, dsv.segment(cs.slot.offset, cs.slot.rows)));
                    alpha = std::min(alpha, max_step_scaled(cs, dzv.segment(cs.slot.offset, cs.slot.rows)));
                }
                if (st.dtau < 0.0) alpha = std::min(alpha, -tau / st.dtau);
                if (st.dkappa < 0.0) alpha = std::min(alpha, -kappa / st.dkappa);
                return alpha;
            };

            // Predictor.
            const Step aff = newton(1.0, -lam2, -tau * kappa);
            Eigen::VectorXd dsa, dza;
            scaled_dirs(aff, dsa, dza);
            const double alpha_aff = std::min(1.0, step_length(aff, dsa, dza));
            const double sigma = std::clamp(std::pow(1.0 - alpha_aff, 3), 0.0, 1.0);

            // Corrector.
            Eigen::VectorXd target = -lam2;
            for (const auto& cs : scal) {
                auto seg = target.segment(cs.slot.offset, cs.slot.rows);
                seg -= jordan(cs.slot, dsa.segment(cs.slot.offset, cs.slot.rows), dza.segment(cs.slot.offset, cs.slot.rows));
                add_unit(cs.slot, seg, sigma * mu);
            }
            const Step cmb = newton(1.0 - sigma, target, -tau * kappa - aff.dtau * aff.dkappa + sigma * mu);
            Eigen::VectorXd dsc, dzc;
            scaled_dirs(cmb, dsc, dzc);
            const double alpha = std::min(1.0, tol.step_fraction * step_length(cmb, dsc, dzc));
            if (!std::isfinite(alpha) || alpha < 1e-12) throw std::runtime_error("step collapsed");
            stall = alpha < 1e-6 ? stall + 1 : 0;
            if (stall > 5) throw std::runtime_error("no progress");

            x += alpha * cmb.dx;
            y += alpha * cmb.dy;
            z += alpha * cmb.dz;
            s += alpha * cmb.ds;
            tau += alpha * cmb.dtau;
            kappa += alpha * cmb.dkappa;

            for (auto& cs : scal) {
                const auto seg_s = s.segment(cs.slot.offset, cs.slot.rows);
                const auto seg_z = z.segment(cs.slot.offset, cs.slot.rows);
                if (cs.slot.kind == ConeKind::psd) {
                    const Eigen::VectorXd ls = lam.segment(cs.slot.offset, cs.slot.rows) +
                                               alpha * dsc.segment(cs.slot.offset, cs.slot.rows);
                    const Eigen::VectorXd lz = lam.segment(cs.slot.offset, cs.slot.rows) +
                                               alpha * dzc.segment(cs.slot.offset, cs.slot.rows);
                    update_psd_scaling(cs, ls, lz);
                } else {
                    cs = compute_scaling(cs.slot, seg_s, seg_z);
                }
            }
        } catch (const std::runtime_error& e) {
#ifdef RISGREEN_CONIC_TRACE
            std::fprintf(stderr, "abort: %s\n", e.what());
#endif
            break;
        }
    }
    if (best.merit <= tol.reduced) {
        out.status = ConicStatus::optimal;
        out.iterations = best.iter;
        out.primal_objective = best.pcost;
        out.dual_objective = best.dcost;
        out.gap = best.gap;
        out.primal_residual = best.pres;
        out.dual_residual = best.dres;
        assemble(best.x, best.s, best.y, best.z, best.tau);
        return out;
    }
    out.status = ConicStatus::numerical_limit;
    assemble(x, s, y, z, tau);
    return out;
}

}  // namespace risgreen::conic
