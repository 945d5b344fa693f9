#pragma once

// Joint RIS on/off selection and phase design for fixed beams, through the
// lifted quadratic form q = (v; t) and its semidefinite relaxation.
//
// Conventions: v stacks conj(theta) of every RIS in index order, so that
// v_l^H c_{k,j}(l) = h_{l,k}^H Theta_l G_l w_j. With |t| = 1,
//   q^H D_{k,j} q + |b_{k,j}|^2 = |v^H c_{k,j} t + b_{k,j}|^2,
// which is the received power of beam j at user k for phases conj(v / t).

#include "risgreen/channel.hpp"
#include "risgreen/conic.hpp"
#include "risgreen/model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace risgreen {

struct QuadraticData {
    int K = 0;
    int Nhat = 0;
    std::vector<int> offset;  // first index of each RIS block in v
    std::vector<int> size;    // N_l
    Eigen::MatrixXcd b;       // b(k, j) = g_k^H w_j
    std::vector<std::vector<Eigen::VectorXcd>> c;  // c[k][j], length Nhat
    std::vector<std::vector<Eigen::MatrixXcd>> D;  // D[k][j], (Nhat+1) x (Nhat+1)

    int num_ris() const { return static_cast<int>(size.size()); }

    static Eigen::MatrixXcd block_matrix(const Eigen::VectorXcd& c, cplx b) {
        const auto n = c.size();
        Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(n + 1, n + 1);
        d.topLeftCorner(n, n) = c * c.adjoint();
        d.topRightCorner(n, 1) = c * std::conj(b);
        d.bottomLeftCorner(1, n) = b * c.adjoint();
        return d;
    }
};

inline QuadraticData precompute_quadratics(const ChannelSet& ch, const Beamformer& beams) {
    const int K = ch.num_users();
    const int L = ch.num_ris();
    if (static_cast<int>(beams.w.size()) != K) throw DimensionError("precompute_quadratics: beam count mismatch");
    QuadraticData qd;
    qd.K = K;
    for (int l = 0; l < L; ++l) {
        qd.offset.push_back(qd.Nhat);
        qd.size.push_back(static_cast<int>(ch.G[static_cast<std::size_t>(l)].rows()));
        qd.Nhat += qd.size.back();
    }
    qd.b.resize(K, K);
    qd.c.assign(static_cast<std::size_t>(K), std::vector<Eigen::VectorXcd>(static_cast<std::size_t>(K)));
    qd.D.assign(static_cast<std::size_t>(K), std::vector<Eigen::MatrixXcd>(static_cast<std::size_t>(K)));
    std::vector<std::vector<Eigen::VectorXcd>> gw(static_cast<std::size_t>(L));  // G_l w_j
    for (int l = 0; l < L; ++l)
        for (int j = 0; j < K; ++j) {
            const auto& w = beams.w[static_cast<std::size_t>(j)];
            if (w.size() != ch.G[static_cast<std::size_t>(l)].cols()) throw DimensionError("precompute_quadratics: beam length");
            gw[static_cast<std::size_t>(l)].push_back(ch.G[static_cast<std::size_t>(l)] * w);
        }
    for (int k = 0; k < K; ++k)
        for (int j = 0; j < K; ++j) {
            const auto& w = beams.w[static_cast<std::size_t>(j)];
            if (w.size() != ch.g[static_cast<std::size_t>(k)].size()) throw DimensionError("precompute_quadratics: beam length");
            qd.b(k, j) = ch.g[static_cast<std::size_t>(k)].dot(w);
            Eigen::VectorXcd c(qd.Nhat);
            for (int l = 0; l < L; ++l)
                c.segment(qd.offset[static_cast<std::size_t>(l)], qd.size[static_cast<std::size_t>(l)]) =
                    ch.h[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)].conjugate().cwiseProduct(
                        gw[static_cast<std::size_t>(l)][static_cast<std::size_t>(j)]);
            qd.D[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] = QuadraticData::block_matrix(c, qd.b(k, j));
            qd.c[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] = std::move(c);
        }
    return qd;
}

/// q^H D_{k,j} q + |b_{k,j}|^2 without forming D.
inline double lifted_power(const QuadraticData& qd, const Eigen::VectorXcd& q, int k, int j) {
    const auto& c = qd.c[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
    const cplx b = qd.b(k, j);
    const cplx vc = q.head(qd.Nhat).dot(c);
    return std::norm(vc) + 2.0 * std::real(vc * std::conj(b) * q(qd.Nhat)) + std::norm(b);
}

/// Both sides of the lifted SINR constraint for user k: signal >= gamma (interference + noise).
struct LiftedSide {
    double signal = 0.0;
    double required = 0.0;  // gamma_k (sum_{j != k} ... + sigma_k^2)

    double ratio() const { return signal / required; }
};

inline std::vector<LiftedSide> lifted_sinr(const QuadraticData& qd, const Eigen::VectorXcd& q,
                                           const std::vector<double>& gamma, const std::vector<double>& sigma2) {
    if (q.size() != qd.Nhat + 1) throw DimensionError("lifted_sinr: q has wrong length");
    std::vector<LiftedSide> out(static_cast<std::size_t>(qd.K));
    for (int k = 0; k < qd.K; ++k) {
        double interference = sigma2[static_cast<std::size_t>(k)];
        for (int j = 0; j < qd.K; ++j)
            if (j != k) interference += lifted_power(qd, q, k, j);
        out[static_cast<std::size_t>(k)].signal = lifted_power(qd, q, k, k);
        out[static_cast<std::size_t>(k)].required = gamma[static_cast<std::size_t>(k)] * interference;
    }
    return out;
}

/// min_k signal / required.
inline double lifted_worst_ratio(const QuadraticData& qd, const Eigen::VectorXcd& q, const std::vector<double>& gamma,
                                 const std::vector<double>& sigma2) {
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& s : lifted_sinr(qd, q, gamma, sigma2)) worst = std::min(worst, s.ratio());
    return worst;
}

/// Every lifted SINR constraint holds within `rel_tol` relative.
inline bool lifted_feasible(const QuadraticData& qd, const Eigen::VectorXcd& q, const std::vector<double>& gamma,
                            const std::vector<double>& sigma2, double rel_tol) {
    for (const auto& s : lifted_sinr(qd, q, gamma, sigma2))
        if (s.signal < s.required * (1.0 - rel_tol)) return false;
    return true;
}

enum class RelaxStatus { optimal, infeasible, numerical_limit };

inline const char* to_string(RelaxStatus s) {
    switch (s) {
        case RelaxStatus::optimal: return "optimal";
        case RelaxStatus::infeasible: return "infeasible";
        case RelaxStatus::numerical_limit: return "numerical_limit";
    }
    return "?";
}

struct RelaxationResult {
    std::vector<double> a_hat;
    Eigen::MatrixXcd Q;
    double objective_mw = 0.0;
    RelaxStatus status = RelaxStatus::numerical_limit;
    int solver_iterations = 0;
};

/// The relaxation is posed through its conic dual so the solver's PSD variable
/// is a slack of side 2(Nhat+1) and the lifted matrix comes back as a multiplier.
///
/// Variables: x = [mu_1..mu_K, lambda_1..lambda_Nhat, nu, beta_1..beta_L]
///   psd:    sum_i lambda_i E_ii + nu E_tt - sum_k s_k mu_k A_k  (embedded)
///   nonneg: mu_k;  P_l - rho_l^2 sum_{i in I_l} lambda_i + beta_l;  beta_l
///   minimize -sum_k s_k r_k mu_k + nu + sum_l beta_l
/// with A_k = D_kk - gamma_k sum_{j != k} D_kj, r_k = gamma_k (sum_{j != k} |b_kj|^2 + sigma_k^2) - |b_kk|^2
/// and s_k a row normalization. The multiplier of the psd block is embed(Q) / 2
/// and the multiplier of the P_l row is a_hat_l.
///
/// With `pin`, a_hat is fixed: the P_l and beta rows are dropped and lambda_i
/// costs rho_l^2 pin_l, leaving a pure feasibility problem in Q.
struct SdpLayout {
    int K = 0;
    int Nhat = 0;
    int L = 0;
    bool pinned = false;
    Eigen::Index psd_side() const { return 2 * (Nhat + 1); }
    Eigen::Index mu(int k) const { return k; }
    Eigen::Index lambda(int i) const { return K + i; }
    Eigen::Index nu() const { return K + Nhat; }
    Eigen::Index beta(int l) const { return K + Nhat + 1 + l; }
    Eigen::Index num_vars() const { return K + Nhat + 1 + (pinned ? 0 : L); }
};

inline conic::ConicProblem build_sdp(const QuadraticData& qd, const std::vector<double>& gamma,
                                     const std::vector<double>& sigma2, const std::vector<double>& rho,
                                     const std::vector<double>& p_ris,
                                     const std::optional<std::vector<double>>& pin = std::nullopt) {
    using conic::ConeKind;
    const int K = qd.K, N = qd.Nhat, L = qd.num_ris();
    if (gamma.size() != static_cast<std::size_t>(K) || sigma2.size() != static_cast<std::size_t>(K))
        throw DimensionError("build_sdp: per-user parameter length mismatch");
    if (rho.size() != static_cast<std::size_t>(L) || p_ris.size() != static_cast<std::size_t>(L))
        throw DimensionError("build_sdp: per-RIS parameter length mismatch");
    if (pin && pin->size() != static_cast<std::size_t>(L)) throw DimensionError("build_sdp: pin length mismatch");
    SdpLayout lay{K, N, L, pin.has_value()};
    const auto n = lay.num_vars();

    conic::ConicProblem p;
    p.objective = Eigen::VectorXd::Zero(n);
    p.objective(lay.nu()) = 1.0;

    auto& psd = p.add_block(ConeKind::psd, lay.psd_side());
    for (int k = 0; k < K; ++k) {
        Eigen::MatrixXcd A = qd.D[static_cast<std::size_t>(k)][static_cast<std::size_t>(k)];
        double r = -std::norm(qd.b(k, k));
        double interference = sigma2[static_cast<std::size_t>(k)];
        for (int j = 0; j < K; ++j) {
            if (j == k) continue;
            A -= gamma[static_cast<std::size_t>(k)] * qd.D[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
            interference += std::norm(qd.b(k, j));
        }
        r += gamma[static_cast<std::size_t>(k)] * interference;
        A = 0.5 * (A + A.adjoint()).eval();
        const double s = 1.0 / std::max({A.cwiseAbs().maxCoeff(), std::abs(r), 1e-300});
        psd.map.col(lay.mu(k)) = s * conic::svec(conic::hermitian_embed(A));
        p.objective(lay.mu(k)) = -s * r;
    }
    const Eigen::Index side = lay.psd_side();
    auto diag_unit = [&](Eigen::Index i) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(psd.rows());
        // svec index of diagonal entry (j, j): sum_{c<j} (side - c)
        for (Eigen::Index j : {i, i + N + 1}) v(j * side - j * (j - 1) / 2) = 1.0;
        return v;
    };
    for (int i = 0; i < N; ++i) psd.map.col(lay.lambda(i)) = -diag_unit(i);
    psd.map.col(lay.nu()) = -diag_unit(N);

    auto& mu_rows = p.add_block(ConeKind::nonneg, K);
    for (int k = 0; k < K; ++k) mu_rows.map(k, lay.mu(k)) = -1.0;

    if (pin) {
        for (int l = 0; l < L; ++l)
            for (int i = 0; i < qd.size[static_cast<std::size_t>(l)]; ++i)
                p.objective(lay.lambda(qd.offset[static_cast<std::size_t>(l)] + i)) =
                    rho[static_cast<std::size_t>(l)] * rho[static_cast<std::size_t>(l)] * (*pin)[static_cast<std::size_t>(l)];
    } else if (L > 0) {
        auto& arows = p.add_block(ConeKind::nonneg, L);
        for (int l = 0; l < L; ++l) {
            arows.offset(l) = p_ris[static_cast<std::size_t>(l)];
            for (int i = 0; i < qd.size[static_cast<std::size_t>(l)]; ++i)
                arows.map(l, lay.lambda(qd.offset[static_cast<std::size_t>(l)] + i)) =
                    rho[static_cast<std::size_t>(l)] * rho[static_cast<std::size_t>(l)];
            arows.map(l, lay.beta(l)) = -1.0;
            p.objective(lay.beta(l)) = 1.0;
        }
        auto& brows = p.add_block(ConeKind::nonneg, L);
        for (int l = 0; l < L; ++l) brows.map(l, lay.beta(l)) = -1.0;
    }
    return p;
}

inline RelaxationResult solve_relaxation(const QuadraticData& qd, const SystemConfig& cfg,
                                         const std::optional<std::vector<double>>& pin = std::nullopt,
                                         const conic::Tolerances& tol = {}) {
    std::vector<double> p_ris;
    for (int l = 0; l < qd.num_ris(); ++l) p_ris.push_back(qd.size[static_cast<std::size_t>(l)] * cfg.p_re_mw);
    std::vector<double> rho(cfg.rho.begin(), cfg.rho.end());
    if (rho.size() != static_cast<std::size_t>(qd.num_ris())) throw DimensionError("solve_relaxation: rho length");
    const auto prob = build_sdp(qd, cfg.gamma, cfg.sigma2_mw, rho, p_ris, pin);
    const auto sol = conic::solve(prob, tol);
    RelaxationResult res;
    res.solver_iterations = sol.iterations;
    switch (sol.status) {
        case conic::ConicStatus::optimal: res.status = RelaxStatus::optimal; break;
        case conic::ConicStatus::dual_infeasible: res.status = RelaxStatus::infeasible; return res;
        default: res.status = RelaxStatus::numerical_limit; return res;
    }
    const Eigen::Index side = 2 * (qd.Nhat + 1);
    const Eigen::Index psd_rows = side * (side + 1) / 2;
    const Eigen::MatrixXd Y = conic::smat(sol.y.head(psd_rows), side);
    res.Q = 2.0 * conic::hermitian_from_embedding(Y);
    const Eigen::Index a_base = psd_rows + qd.K;
    for (int l = 0; l < qd.num_ris(); ++l) {
        const double a = pin ? (*pin)[static_cast<std::size_t>(l)] : sol.y(a_base + l);
        res.a_hat.push_back(a);
        res.objective_mw += a * p_ris[static_cast<std::size_t>(l)];
    }
    return res;
}

/// Entrywise projection to the given moduli (zero target gives zero).
inline Eigen::VectorXcd project_modulus(const Eigen::VectorXcd& x, const Eigen::VectorXd& target) {
    Eigen::VectorXcd q(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double m = std::abs(x(i));
        q(i) = target(i) == 0.0 ? cplx(0.0) : (m > 0.0 ? x(i) * (target(i) / m) : cplx(target(i)));
    }
    return q;
}

struct RandomizationResult {
    std::optional<Eigen::VectorXcd> feasible;  // best candidate meeting every lifted constraint
    Eigen::VectorXcd best;                     // best candidate overall (may be infeasible)
    double best_ratio = -std::numeric_limits<double>::infinity();
    int feasible_count = 0;
    int valid_samples = 0;
};

/// Gaussian randomization with covariance Q. The principal eigenvector of Q is
/// scored first, then `samples` draws; candidates are ranked by the worst
/// signal / required ratio and accepted within `rel_tol`.
inline RandomizationResult randomize(const Eigen::MatrixXcd& Q, const Eigen::VectorXd& target, const QuadraticData& qd,
                                     const std::vector<double>& gamma, const std::vector<double>& sigma2, int samples,
                                     std::uint64_t seed, double rel_tol = 1e-6) {
    const auto n = Q.rows();
    if (Q.cols() != n || target.size() != n || n != qd.Nhat + 1) throw DimensionError("randomize: size mismatch");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (Q + Q.adjoint()));
    const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    const Eigen::MatrixXcd factor = es.eigenvectors() * ev.cwiseSqrt().asDiagonal();

    RandomizationResult res;
    auto consider = [&](const Eigen::VectorXcd& x) {
        if (std::abs(x(n - 1)) < 1e-9) return;
        ++res.valid_samples;
        const Eigen::VectorXcd q = project_modulus(x, target);
        const double ratio = lifted_worst_ratio(qd, q, gamma, sigma2);
        if (ratio > res.best_ratio || res.best.size() == 0) {
            res.best_ratio = ratio;
            res.best = q;
        }
        if (lifted_feasible(qd, q, gamma, sigma2, rel_tol)) {
            ++res.feasible_count;
            if (!res.feasible || ratio >= lifted_worst_ratio(qd, *res.feasible, gamma, sigma2)) res.feasible = q;
        }
    };
    consider(std::sqrt(ev(n - 1)) * es.eigenvectors().col(n - 1));
    Rng rng(seed);
    Eigen::VectorXcd z(n);
    for (int s = 0; s < samples; ++s) {
        for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.complex_normal();
        consider(factor * z);
    }
    if (res.best.size() == 0) {
        res.best = Eigen::VectorXcd::Zero(n);
        res.best(n - 1) = 1.0;
        res.best = project_modulus(res.best, target);
    }
    return res;
}

inline std::optional<Eigen::VectorXcd> gaussian_randomization(const Eigen::MatrixXcd& Q, const Eigen::VectorXd& target,
                                                             const QuadraticData& qd, const std::vector<double>& gamma,
                                                             const std::vector<double>& sigma2, int samples,
                                                             std::uint64_t seed) {
    return randomize(Q, target, qd, gamma, sigma2, samples, seed).feasible;
}

struct PhaseRecovery {
    Eigen::VectorXcd v_tilde;
    PhaseConfig phases;
    ActiveSet active;
};

/// v = q[0:Nhat] / q[Nhat]; theta_l = conj(v_l); RIS l is active iff v_l != 0.
inline PhaseRecovery recover_phases(const Eigen::VectorXcd& q, const std::vector<int>& sizes) {
    Eigen::Index nhat = 0;
    for (int s : sizes) nhat += s;
    if (q.size() != nhat + 1) throw DimensionError("recover_phases: q has wrong length");
    const cplx t = q(nhat);
    if (std::abs(t) == 0.0) throw std::invalid_argument("recover_phases: zero homogenizing entry");
    PhaseRecovery out;
    out.v_tilde = q.head(nhat) / t;
    Eigen::Index off = 0;
    for (int s : sizes) {
        const Eigen::VectorXcd v = out.v_tilde.segment(off, s);
        out.phases.theta.push_back(v.conjugate());
        out.active.a.push_back(v.squaredNorm() > 0.0);
        off += s;
    }
    return out;
}

/// Lifted vector of a phase configuration: q = (conj(theta_1); ...; conj(theta_L); 1).
inline Eigen::VectorXcd lift_phases(const PhaseConfig& phases, const ActiveSet& active) {
    Eigen::Index nhat = 0;
    for (const auto& t : phases.theta) nhat += t.size();
    Eigen::VectorXcd q(nhat + 1);
    Eigen::Index off = 0;
    for (std::size_t l = 0; l < phases.theta.size(); ++l) {
        const auto& t = phases.theta[l];
        q.segment(off, t.size()) = active[static_cast<int>(l)] ? Eigen::VectorXcd(t.conjugate()) : Eigen::VectorXcd::Zero(t.size());
        off += t.size();
    }
    q(nhat) = 1.0;
    return q;
}

}  // namespace risgreen
