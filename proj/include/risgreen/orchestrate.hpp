#pragma once

// Alternating beamforming / RIS-selection loop and the two reference schemes.

#include "risgreen/beamform.hpp"
#include "risgreen/channel.hpp"
#include "risgreen/model.hpp"
#include "risgreen/ris_select.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <numbers>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace risgreen {

enum class FeasibilityMode {
    evaluate,  // lifted SINR constraints at the projected q
    resolve,   // pinned relaxation for the probe pattern, then randomization
};

struct AlternationOptions {
    double epsilon_mw = 1.0;
    int max_iter = 30;
    int samples = 100;
    bool random_init = false;
    FeasibilityMode mode = FeasibilityMode::resolve;
    int threads = 1;  // exhaustive search only
    conic::Tolerances tol{};
};

struct IterationRecord {
    double transmit_power_mw = 0.0;  // after re-solving beams for the probed configuration
    double network_power_mw = 0.0;
    double circuit_power_mw = 0.0;   // RIS circuit power of the bisection result
    int active_count = 0;
    double sdp_objective_mw = 0.0;
    std::vector<int> probes;  // J0 sequence
    bool flag = false;
    bool accepted = false;
};

struct AlternationTrace {
    std::vector<IterationRecord> records;
    std::string termination;
    SolveStatus status = SolveStatus::infeasible;
};

struct OptimizeResult {
    NetworkSolution solution;
    AlternationTrace trace;
};

/// Lifted constraints at q within 1e-9 relative.
inline bool feasibility_check(const Eigen::VectorXcd& q, const QuadraticData& qd, const std::vector<double>& gamma,
                              const std::vector<double>& sigma2) {
    return lifted_feasible(qd, q, gamma, sigma2, 1e-9);
}

/// q with RIS l scaled to modulus rho_l (or zeroed) per `on`, and |q_t| = 1.
inline Eigen::VectorXcd pattern_q(const Eigen::VectorXcd& q, const QuadraticData& qd, const std::vector<bool>& on,
                                  const std::vector<double>& rho) {
    Eigen::VectorXd target(qd.Nhat + 1);
    for (int l = 0; l < qd.num_ris(); ++l)
        target.segment(qd.offset[static_cast<std::size_t>(l)], qd.size[static_cast<std::size_t>(l)])
            .setConstant(on[static_cast<std::size_t>(l)] ? rho[static_cast<std::size_t>(l)] : 0.0);
    target(qd.Nhat) = 1.0;
    return project_modulus(q, target);
}

struct BisectionResult {
    ActiveSet active;
    Eigen::VectorXcd q;
    bool flag = false;
    std::vector<int> probes;
};

/// Returns the feasible lifted vector for a probe pattern, or nothing.
using ProbeCheck = std::function<std::optional<Eigen::VectorXcd>(const Eigen::VectorXcd&, const std::vector<bool>&)>;

/// Binary search over how many of the lowest-a_hat RISs to switch off.
///
/// The split point J0 ranges over 0..L; the search brackets it with sentinels
/// -1 and L+1 so both the all-on and the all-off patterns are reachable.
inline BisectionResult bisect_active_set(const std::vector<double>& a_hat, const Eigen::VectorXcd& q,
                                         const QuadraticData& qd, const std::vector<double>& gamma,
                                         const std::vector<double>& sigma2, const std::vector<double>& rho,
                                         const ProbeCheck& check = {}) {
    const int L = qd.num_ris();
    if (a_hat.size() != static_cast<std::size_t>(L) || rho.size() != static_cast<std::size_t>(L))
        throw DimensionError("bisect_active_set: per-RIS length mismatch");
    std::vector<int> order(static_cast<std::size_t>(L));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return a_hat[static_cast<std::size_t>(i)] < a_hat[static_cast<std::size_t>(j)]; });

    BisectionResult res;
    res.active = ActiveSet::all(L);
    res.q = q;
    int lo = -1, up = L + 1;
    while (up - lo > 1) {
        const int j0 = (lo + up) / 2;
        res.probes.push_back(j0);
        std::vector<bool> on(static_cast<std::size_t>(L), true);
        for (int j = 0; j < j0; ++j) on[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])] = false;
        const Eigen::VectorXcd qp = pattern_q(q, qd, on, rho);
        std::optional<Eigen::VectorXcd> ok;
        if (check) ok = check(qp, on);
        else if (feasibility_check(qp, qd, gamma, sigma2)) ok = qp;
        if (ok) {
            res.active.a = on;
            res.q = *ok;
            res.flag = true;
            lo = j0;
        } else {
            up = j0;
        }
    }
    return res;
}

namespace detail {

inline std::vector<double> ris_powers(const SystemConfig& cfg) {
    std::vector<double> p;
    for (int l = 0; l < cfg.L; ++l) p.push_back(cfg.ris_power_mw(l));
    return p;
}

inline PhaseConfig initial_phases(const SystemConfig& cfg, bool random, std::uint64_t seed) {
    auto phases = PhaseConfig::zero_phase(cfg, ActiveSet::all(cfg.L));
    if (!random) return phases;
    Rng rng(derive_seed(seed, {6}));
    for (int l = 0; l < cfg.L; ++l)
        for (auto& t : phases.theta[static_cast<std::size_t>(l)])
            t = std::polar(cfg.rho[static_cast<std::size_t>(l)], 2.0 * std::numbers::pi * rng.uniform());
    return phases;
}

inline SolveStatus beam_failure(BeamStatus s) {
    return s == BeamStatus::infeasible ? SolveStatus::infeasible : SolveStatus::numerical_failure;
}

inline Eigen::VectorXd rho_target(const QuadraticData& qd, const std::vector<double>& rho) {
    Eigen::VectorXd t(qd.Nhat + 1);
    for (int l = 0; l < qd.num_ris(); ++l)
        t.segment(qd.offset[static_cast<std::size_t>(l)], qd.size[static_cast<std::size_t>(l)])
            .setConstant(rho[static_cast<std::size_t>(l)]);
    t(qd.Nhat) = 1.0;
    return t;
}

}  // namespace detail

/// Beams, RIS selection and phases by alternation, starting from every RIS on.
/// A new configuration replaces the incumbent only if it strictly lowers the
/// network power.
inline OptimizeResult alternating_optimize(const ChannelSet& ch, const SystemConfig& cfg,
                                           const AlternationOptions& opt = {}, std::uint64_t seed = 0) {
    cfg.validate();
    ch.check_shapes(cfg);
    OptimizeResult out;
    auto& trace = out.trace;
    ActiveSet active = ActiveSet::all(cfg.L);
    PhaseConfig phases = detail::initial_phases(cfg, opt.random_init, seed);

    const auto bf0 = solve_beamforming(ch, active, phases, cfg, opt.tol);
    if (bf0.status != BeamStatus::optimal) {
        out.solution.active = active;
        out.solution.phases = phases;
        out.solution.status = detail::beam_failure(bf0.status);
        trace.status = out.solution.status;
        trace.termination = bf0.status == BeamStatus::infeasible ? "infeasible" : "numerical_failure";
        return out;
    }
    NetworkSolution best = make_solution(active, bf0.beams, phases, cfg, SolveStatus::solved);
    best.iterations.push_back(best.network_power_mw);
    trace.termination = "no_ris";

    const auto p_ris = detail::ris_powers(cfg);
    for (int it = 1; cfg.L > 0 && it <= opt.max_iter; ++it) {
        IterationRecord rec;
        const auto qd = precompute_quadratics(ch, best.beams);
        const auto rel = solve_relaxation(qd, cfg, std::nullopt, opt.tol);
        if (rel.status != RelaxStatus::optimal) {
            trace.termination = std::string("relaxation_") + to_string(rel.status);
            break;
        }
        rec.sdp_objective_mw = rel.objective_mw;

        Eigen::VectorXd target(qd.Nhat + 1);
        for (Eigen::Index i = 0; i < qd.Nhat; ++i) target(i) = std::sqrt(std::max(rel.Q(i, i).real(), 0.0));
        target(qd.Nhat) = 1.0;
        const auto rnd = randomize(rel.Q, target, qd, cfg.gamma, cfg.sigma2_mw, opt.samples,
                                   derive_seed(seed, {5, static_cast<std::uint64_t>(it)}));
        const Eigen::VectorXcd q = rnd.feasible ? *rnd.feasible : rnd.best;

        ProbeCheck check;
        if (opt.mode == FeasibilityMode::resolve) {
            check = [&](const Eigen::VectorXcd& qp, const std::vector<bool>& on) -> std::optional<Eigen::VectorXcd> {
                if (feasibility_check(qp, qd, cfg.gamma, cfg.sigma2_mw)) return qp;
                std::vector<double> pin;
                for (bool b : on) pin.push_back(b ? 1.0 : 0.0);
                const auto pr = solve_relaxation(qd, cfg, pin, opt.tol);
                if (pr.status != RelaxStatus::optimal) return std::nullopt;
                Eigen::VectorXd tgt = detail::rho_target(qd, cfg.rho);
                for (int l = 0; l < qd.num_ris(); ++l)
                    if (!on[static_cast<std::size_t>(l)])
                        tgt.segment(qd.offset[static_cast<std::size_t>(l)], qd.size[static_cast<std::size_t>(l)]).setZero();
                const auto r = randomize(pr.Q, tgt, qd, cfg.gamma, cfg.sigma2_mw, opt.samples,
                                         derive_seed(seed, {7, static_cast<std::uint64_t>(it)}), 1e-9);
                return r.feasible;
            };
        }
        const auto bis = bisect_active_set(rel.a_hat, q, qd, cfg.gamma, cfg.sigma2_mw, cfg.rho, check);
        rec.probes = bis.probes;
        rec.flag = bis.flag;
        if (!bis.flag) {
            trace.records.push_back(rec);
            trace.termination = "flag0";
            break;
        }
        rec.active_count = bis.active.count();
        for (int l = 0; l < cfg.L; ++l)
            if (bis.active[l]) rec.circuit_power_mw += p_ris[static_cast<std::size_t>(l)];

        auto rp = recover_phases(bis.q, qd.size);
        const auto bf = solve_beamforming(ch, bis.active, rp.phases, cfg, opt.tol);
        if (bf.status != BeamStatus::optimal) {
            trace.records.push_back(rec);
            trace.termination = std::string("beamforming_") + to_string(bf.status);
            break;
        }
        auto cand = make_solution(bis.active, bf.beams, rp.phases, cfg, SolveStatus::solved);
        rec.transmit_power_mw = cand.transmit_power_mw;
        rec.network_power_mw = cand.network_power_mw;
        const double decrease = best.network_power_mw - cand.network_power_mw;
        if (decrease > 0.0) {
            rec.accepted = true;
            cand.iterations = best.iterations;
            cand.iterations.push_back(cand.network_power_mw);
            best = std::move(cand);
        }
        trace.records.push_back(rec);
        if (!(decrease > 0.0)) {
            trace.termination = "no_decrease";
            break;
        }
        if (decrease < opt.epsilon_mw) {
            trace.termination = "converged";
            break;
        }
        if (it == opt.max_iter) trace.termination = "max_iter";
    }
    best.status = SolveStatus::solved;
    trace.status = best.status;
    out.solution = std::move(best);
    return out;
}

/// Every RIS stays on; beams and phases alternate, with the phases taken from
/// the relaxation with a_hat pinned to one.
inline OptimizeResult all_ris_active_baseline(const ChannelSet& ch, const SystemConfig& cfg,
                                              const AlternationOptions& opt = {}, std::uint64_t seed = 0) {
    cfg.validate();
    ch.check_shapes(cfg);
    OptimizeResult out;
    auto& trace = out.trace;
    const ActiveSet active = ActiveSet::all(cfg.L);
    PhaseConfig phases = detail::initial_phases(cfg, opt.random_init, seed);
    const auto bf0 = solve_beamforming(ch, active, phases, cfg, opt.tol);
    if (bf0.status != BeamStatus::optimal) {
        out.solution.active = active;
        out.solution.phases = phases;
        out.solution.status = detail::beam_failure(bf0.status);
        trace.status = out.solution.status;
        trace.termination = bf0.status == BeamStatus::infeasible ? "infeasible" : "numerical_failure";
        return out;
    }
    NetworkSolution best = make_solution(active, bf0.beams, phases, cfg, SolveStatus::solved);
    best.iterations.push_back(best.network_power_mw);
    trace.termination = "no_ris";
    const std::vector<double> pin(static_cast<std::size_t>(cfg.L), 1.0);
    for (int it = 1; cfg.L > 0 && it <= opt.max_iter; ++it) {
        IterationRecord rec;
        const auto qd = precompute_quadratics(ch, best.beams);
        const auto rel = solve_relaxation(qd, cfg, pin, opt.tol);
        if (rel.status != RelaxStatus::optimal) {
            trace.termination = std::string("relaxation_") + to_string(rel.status);
            break;
        }
        rec.sdp_objective_mw = rel.objective_mw;
        const auto rnd = randomize(rel.Q, detail::rho_target(qd, cfg.rho), qd, cfg.gamma, cfg.sigma2_mw, opt.samples,
                                   derive_seed(seed, {8, static_cast<std::uint64_t>(it)}), 1e-9);
        rec.flag = rnd.feasible.has_value();
        if (!rnd.feasible) {
            trace.records.push_back(rec);
            trace.termination = "no_feasible_sample";
            break;
        }
        auto rp = recover_phases(*rnd.feasible, qd.size);
        const auto bf = solve_beamforming(ch, active, rp.phases, cfg, opt.tol);
        if (bf.status != BeamStatus::optimal) {
            trace.records.push_back(rec);
            trace.termination = std::string("beamforming_") + to_string(bf.status);
            break;
        }
        auto cand = make_solution(active, bf.beams, rp.phases, cfg, SolveStatus::solved);
        rec.active_count = cfg.L;
        rec.circuit_power_mw = cand.ris_circuit_power_mw;
        rec.transmit_power_mw = cand.transmit_power_mw;
        rec.network_power_mw = cand.network_power_mw;
        const double decrease = best.network_power_mw - cand.network_power_mw;
        if (decrease > 0.0) {
            rec.accepted = true;
            cand.iterations = best.iterations;
            cand.iterations.push_back(cand.network_power_mw);
            best = std::move(cand);
        }
        trace.records.push_back(rec);
        if (!(decrease > 0.0)) {
            trace.termination = "no_decrease";
            break;
        }
        if (decrease < opt.epsilon_mw) {
            trace.termination = "converged";
            break;
        }
        if (it == opt.max_iter) trace.termination = "max_iter";
    }
    trace.status = best.status;
    out.solution = std::move(best);
    return out;
}

/// Configuration and channels restricted to the RISs selected by `mask`.
inline std::pair<SystemConfig, ChannelSet> restrict_to(const SystemConfig& cfg, const ChannelSet& ch,
                                                       const std::vector<bool>& mask) {
    SystemConfig sub = cfg;
    ChannelSet sc;
    sc.g = ch.g;
    sub.N.clear();
    sub.rho.clear();
    sub.geometry.ris.clear();
    for (int l = 0; l < cfg.L; ++l) {
        if (!mask[static_cast<std::size_t>(l)]) continue;
        sub.N.push_back(cfg.N[static_cast<std::size_t>(l)]);
        sub.rho.push_back(cfg.rho[static_cast<std::size_t>(l)]);
        sub.geometry.ris.push_back(cfg.geometry.ris[static_cast<std::size_t>(l)]);
        sc.G.push_back(ch.G[static_cast<std::size_t>(l)]);
        sc.h.push_back(ch.h[static_cast<std::size_t>(l)]);
    }
    sub.L = static_cast<int>(sub.N.size());
    return {sub, sc};
}

struct ExhaustiveResult {
    NetworkSolution solution;
    int subsets_evaluated = 0;
    int subsets_feasible = 0;
};

/// Every subset of RISs, each with the all-on alternation restricted to it.
inline ExhaustiveResult exhaustive_search_baseline(const ChannelSet& ch, const SystemConfig& cfg,
                                                   const AlternationOptions& opt = {}, std::uint64_t seed = 0) {
    cfg.validate();
    ch.check_shapes(cfg);
    if (cfg.L > 12) throw ConfigError("L", "exhaustive search supports at most 12 RISs");
    const std::uint64_t count = std::uint64_t{1} << cfg.L;

    auto run = [&](std::uint64_t m) {
        std::vector<bool> mask(static_cast<std::size_t>(cfg.L));
        for (int l = 0; l < cfg.L; ++l) mask[static_cast<std::size_t>(l)] = (m >> l) & 1U;
        auto [sub, sc] = restrict_to(cfg, ch, mask);
        auto r = all_ris_active_baseline(sc, sub, opt, seed);
        // Back to full-length active set and phases.
        NetworkSolution full = r.solution;
        full.active.a = mask;
        full.phases.theta.clear();
        int j = 0;
        for (int l = 0; l < cfg.L; ++l) {
            const auto nl = cfg.N[static_cast<std::size_t>(l)];
            if (mask[static_cast<std::size_t>(l)] && j < static_cast<int>(r.solution.phases.theta.size()))
                full.phases.theta.push_back(r.solution.phases.theta[static_cast<std::size_t>(j++)]);
            else
                full.phases.theta.push_back(Eigen::VectorXcd::Zero(nl));
        }
        return full;
    };

    std::vector<NetworkSolution> results(count);
    if (opt.threads > 1) {
        for (std::uint64_t start = 0; start < count; start += static_cast<std::uint64_t>(opt.threads)) {
            std::vector<std::future<NetworkSolution>> jobs;
            for (std::uint64_t m = start; m < std::min(count, start + static_cast<std::uint64_t>(opt.threads)); ++m)
                jobs.push_back(std::async(std::launch::async, run, m));
            for (std::uint64_t m = start; m < start + jobs.size(); ++m) results[m] = jobs[m - start].get();
        }
    } else {
        for (std::uint64_t m = 0; m < count; ++m) results[m] = run(m);
    }

    ExhaustiveResult out;
    out.subsets_evaluated = static_cast<int>(count);
    out.solution.active = ActiveSet::all(cfg.L);
    out.solution.phases = PhaseConfig::zero_phase(cfg, out.solution.active);
    out.solution.status = SolveStatus::infeasible;
    bool numerical = false;
    for (auto& r : results) {
        if (r.status == SolveStatus::numerical_failure) numerical = true;
        if (r.status != SolveStatus::solved) continue;
        ++out.subsets_feasible;
        if (out.solution.status != SolveStatus::solved || r.network_power_mw < out.solution.network_power_mw)
            out.solution = std::move(r);
    }
    if (out.solution.status != SolveStatus::solved && numerical) out.solution.status = SolveStatus::numerical_failure;
    return out;
}

}  // namespace risgreen
