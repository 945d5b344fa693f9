// Acceptance run: one PASS/FAIL line per criterion on stdout, details on stderr.

#include "corpus.hpp"
#include "support.hpp"

#include <chrono>
#include <cstdio>
#include <map>
#include <mutex>
#include <string>
#include <thread>

using namespace risgreen;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Report {
    int failed = 0;
    void line(int id, bool ok, const std::string& detail) {
        std::printf("criterion %d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failed;
    }
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// Solutions checked across every suite.
struct Hygiene {
    std::mutex mu;
    int checked = 0, violations = 0, numerical = 0;
    void add(const NetworkSolution& s, const SystemConfig& c, const ChannelSet& ch) {
        std::lock_guard lock(mu);
        ++checked;
        if (s.status == SolveStatus::numerical_failure) ++numerical;
        if (s.status == SolveStatus::solved && !check_feasible(s, c, ch, 1e-6).feasible) ++violations;
    }
};

/// Paired means per (value, method) over the trials that every listed method solved.
std::map<double, std::map<Method, double>> paired_means(const ExperimentResult& r, const std::vector<Method>& methods,
                                                        std::map<double, int>* used = nullptr) {
    std::map<std::pair<double, int>, std::map<Method, double>> cell;
    for (const auto& row : r.rows)
        if (row.status == SolveStatus::solved) cell[{row.value, row.trial}][row.method] = row.network_power_mw;
    std::map<double, std::map<Method, double>> sum;
    std::map<double, int> n;
    for (const auto& [key, vals] : cell) {
        bool all = true;
        for (Method m : methods) all = all && vals.count(m);
        if (!all) continue;
        ++n[key.first];
        for (Method m : methods) sum[key.first][m] += vals.at(m);
    }
    for (auto& [v, ms] : sum)
        for (auto& [m, s] : ms) s /= n[v];
    if (used) *used = n;
    return sum;
}

/// At most one adjacent pair against the expected direction, and that one within 2% relative.
bool trend_ok(const std::vector<double>& series, bool increasing, std::string& detail) {
    int reversals = 0;
    bool small = true;
    for (std::size_t i = 1; i < series.size(); ++i) {
        const double a = series[i - 1], b = series[i];
        const bool bad = increasing ? b < a : b > a;
        if (bad) {
            ++reversals;
            small = small && std::abs(b - a) <= 0.02 * std::max(std::abs(a), std::abs(b));
        }
        detail += fmt("%s%.2f", i == 1 ? "" : " ", a);
    }
    detail += fmt(" %.2f", series.back());
    if (series.size() == 1) detail = fmt("%.2f", series[0]);
    return reversals == 0 || (reversals == 1 && small);
}

ExperimentSpec sweep_spec(SweepVar var, std::vector<double> values, std::vector<Method> methods, int trials) {
    ExperimentSpec s;
    s.base = testsupport::desk_config();
    s.sweep = var;
    s.values = std::move(values);
    s.methods = std::move(methods);
    s.trials = trials;
    s.seed = 1;
    s.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    return s;
}

}  // namespace

int main() {
    Report rep;
    Hygiene hyg;

    // 1. Conic corpus.
    {
        const auto t0 = Clock::now();
        int ok = 0;
        double worst = 0.0;
        const auto corpus = testsupport::conic_corpus();
        for (const auto& c : corpus) {
            const auto s = conic::solve(c.problem);
            const double err = std::abs(s.primal_objective - c.optimum) / std::max(1.0, std::abs(c.optimum));
            worst = std::max(worst, err);
            const bool good = s.status == conic::ConicStatus::optimal && err <= 1e-5;
            ok += good ? 1 : 0;
            std::fprintf(stderr, "  corpus %-26s status=%s err=%.2e iters=%d\n", c.name.c_str(), conic::to_string(s.status),
                         err, s.iterations);
        }
        const double t = seconds_since(t0);
        rep.line(1, ok == static_cast<int>(corpus.size()) && corpus.size() >= 10 && t < 5.0,
                 fmt("%d/%zu instances within 1e-5 (worst %.1e), %.2f s", ok, corpus.size(), worst, t));
    }

    // 2. Single-user closed form.
    {
        SystemConfig c = testsupport::small_config(4, 1, {});
        double worst = 0.0;
        int ok = 0;
        for (std::uint64_t s = 0; s < 100; ++s) {
            const auto ch = testsupport::draw_channels(c, s);
            const auto r = solve_beamforming(ch, ActiveSet{}, PhaseConfig{}, c);
            const double ref = c.gamma[0] * c.sigma2_mw[0] / ch.g[0].squaredNorm();
            const double err = testsupport::rel_err(r.transmit_power_mw, ref);
            worst = std::max(worst, err);
            ok += r.status == BeamStatus::optimal && err <= 1e-6 ? 1 : 0;
            if (r.status == BeamStatus::optimal)
                hyg.add(make_solution(ActiveSet{}, r.beams, PhaseConfig{}, c, SolveStatus::solved), c, ch);
        }
        rep.line(2, ok == 100, fmt("%d/100 seeds within 1e-6 (worst %.1e)", ok, worst));
    }

    // 3. Lifted constraints against the model SINR.
    {
        int agree = 0, users = 0;
        double worst = 0.0;
        for (std::uint64_t s = 0; s < 100; ++s) {
            testsupport::TestRng rng(7000 + s);
            const int L = 1 + static_cast<int>(s % 3);
            std::vector<int> N;
            for (int l = 0; l < L; ++l) N.push_back(1 + static_cast<int>(rng.uniform() * (6 / L)));
            const int K = 1 + static_cast<int>(s % 4), M = 1 + static_cast<int>((s / 3) % 4);
            std::vector<double> rho;
            for (int l = 0; l < L; ++l) rho.push_back(0.3 + 0.7 * rng.uniform());
            const auto ch = testsupport::random_channels(rng, M, K, N);
            Beamformer b;
            for (int k = 0; k < K; ++k) b.w.push_back(rng.vec(M));
            auto ph = testsupport::random_phases(rng, N, rho);
            ActiveSet act = ActiveSet::all(L);
            for (int l = 0; l < L; ++l) act.a[static_cast<std::size_t>(l)] = rng.uniform() < 0.7;
            for (int l = 0; l < L; ++l)
                if (!act[l]) ph.theta[static_cast<std::size_t>(l)].setZero();
            const auto qd = precompute_quadratics(ch, b);
            // Lifted vector with a random homogenizing phase.
            const Eigen::VectorXcd q = lift_phases(ph, act) * std::polar(1.0, 6.283 * rng.uniform());
            const auto rec = recover_phases(q, qd.size);
            std::vector<double> sigma2(static_cast<std::size_t>(K)), gamma(static_cast<std::size_t>(K));
            for (int k = 0; k < K; ++k) {
                sigma2[static_cast<std::size_t>(k)] = 0.05 + rng.uniform();
                gamma[static_cast<std::size_t>(k)] =
                    sinr(ch, rec.active, rec.phases, b, k, sigma2[static_cast<std::size_t>(k)]) * (0.5 + rng.uniform());
            }
            const auto lifted = lifted_sinr(qd, q, gamma, sigma2);
            for (int k = 0; k < K; ++k) {
                ++users;
                const double model = sinr(ch, rec.active, rec.phases, b, k, sigma2[static_cast<std::size_t>(k)]);
                const double via_lift = lifted[static_cast<std::size_t>(k)].ratio() * gamma[static_cast<std::size_t>(k)];
                const double err = testsupport::rel_err(via_lift, model);
                worst = std::max(worst, err);
                const bool same = (lifted[static_cast<std::size_t>(k)].ratio() >= 1.0) == (model >= gamma[static_cast<std::size_t>(k)]);
                agree += same && err <= 1e-9 ? 1 : 0;
            }
        }
        rep.line(3, agree == users, fmt("%d/%d users agree (worst SINR rel err %.1e)", agree, users, worst));
    }

    // 4-6 and 8: desk scenario with all three methods.
    int c4_checked = 0, c4_bad = 0;
    double c4_worst = -1e300;
    std::mutex c4_mu;
    auto sdp_bound = [&](const TrialContext& ctx) {
        if (ctx.method != Method::proposed || ctx.result.solution.status != SolveStatus::solved) return;
        const auto& sol = ctx.result.solution;
        std::vector<double> excess;
        for (const auto& r : ctx.result.trace.records)
            if (r.flag) excess.push_back(r.sdp_objective_mw - r.circuit_power_mw);
        // Relaxation at the final beams against the final configuration.
        const auto qd = precompute_quadratics(ctx.channels, sol.beams);
        const auto rel = solve_relaxation(qd, ctx.config);
        if (rel.status == RelaxStatus::optimal) excess.push_back(rel.objective_mw - sol.ris_circuit_power_mw);
        else std::fprintf(stderr, "  relaxation at final beams: %s (trial %d)\n", to_string(rel.status), ctx.trial);
        std::lock_guard lock(c4_mu);
        for (double e : excess) {
            ++c4_checked;
            c4_worst = std::max(c4_worst, e);
            if (e > 1e-6) ++c4_bad;
        }
        if (rel.status != RelaxStatus::optimal) ++c4_bad;
    };

    int c6_traces = 0, c6_bad = 0, c6_max_iter = 0;
    auto monotone = [&](const TrialContext& ctx) {
        if (ctx.method == Method::exhaustive || ctx.result.solution.status != SolveStatus::solved) return;
        const auto& it = ctx.result.solution.iterations;
        bool ok = static_cast<int>(ctx.result.trace.records.size()) <= 30;
        for (std::size_t i = 1; i < it.size(); ++i) ok = ok && it[i] <= it[i - 1];
        ++c6_traces;
        c6_bad += ok ? 0 : 1;
        c6_max_iter = std::max(c6_max_iter, static_cast<int>(ctx.result.trace.records.size()));
    };

    {
        auto spec = sweep_spec(SweepVar::K, {3}, {Method::proposed, Method::all_active, Method::exhaustive}, 20);
        const auto t0 = Clock::now();
        const auto res = run_experiment(spec, [&](const TrialContext& ctx) {
            hyg.add(ctx.result.solution, ctx.config, ctx.channels);
            sdp_bound(ctx);
            monotone(ctx);
        });
        const double t = seconds_since(t0);
        std::map<double, int> used;
        const auto means = paired_means(res, spec.methods, &used);
        for (const auto& row : res.rows)
            std::fprintf(stderr, "  desk %-10s trial %2d %-9s %-12s P=%9.3f active=%d\n", to_string(row.method), row.trial,
                         to_string(row.status), row.termination.c_str(), row.network_power_mw, row.active_count);
        bool ok5 = means.count(3.0) > 0 && t < 600.0;
        std::string detail;
        if (means.count(3.0)) {
            const auto& m = means.at(3.0);
            const double ex = m.at(Method::exhaustive), pr = m.at(Method::proposed), al = m.at(Method::all_active);
            ok5 = ok5 && ex <= pr && pr <= al + 1e-3 && pr <= 1.05 * ex;
            detail = fmt("means over %d trials: exhaustive %.3f, proposed %.3f, all-active %.3f mW; proposed/exhaustive %.4f; %.0f s",
                         used.at(3.0), ex, pr, al, pr / ex, t);
        } else {
            detail = "no trial solved by every method";
        }
        rep.line(4, c4_bad == 0 && c4_checked > 0,
                 fmt("%d relaxations checked, %d above circuit power + 1e-6 (max excess %.2e mW)", c4_checked, c4_bad, c4_worst));
        rep.line(5, ok5, detail);
        rep.line(6, c6_bad == 0 && c6_traces > 0,
                 fmt("%d traces, %d non-monotone or over 30 iterations (longest %d)", c6_traces, c6_bad, c6_max_iter));
    }

    // 7. Trends.
    {
        const auto t0 = Clock::now();
        const std::vector<Method> all{Method::proposed, Method::all_active, Method::exhaustive};
        bool ok = true;
        std::string detail;
        auto observe = [&](const TrialContext& ctx) { hyg.add(ctx.result.solution, ctx.config, ctx.channels); };

        for (auto [var, values, increasing] : {std::tuple{SweepVar::K, std::vector<double>{2, 3, 4}, true},
                                               std::tuple{SweepVar::M, std::vector<double>{6, 8, 10}, false}}) {
            const auto res = run_experiment(sweep_spec(var, values, all, 30), observe);
            std::map<double, int> used;
            const auto means = paired_means(res, all, &used);
            for (Method m : all) {
                std::vector<double> series;
                for (double v : values) series.push_back(means.count(v) ? means.at(v).at(m) : std::nan(""));
                std::string s;
                const bool good = means.size() == values.size() && trend_ok(series, increasing, s);
                ok = ok && good;
                detail += fmt("%s/%s[%s]%s ", to_string(var), to_string(m), s.c_str(), good ? "" : "!");
            }
            for (double v : values)
                std::fprintf(stderr, "  sweep %s=%g: %d paired trials\n", to_string(var), v, used.count(v) ? used.at(v) : 0);
        }
        {
            const std::vector<Method> two{Method::proposed, Method::all_active};
            const std::vector<double> values{1, 2, 3};
            const auto res = run_experiment(sweep_spec(SweepVar::rate, values, two, 30), observe);
            const auto means = paired_means(res, two);
            std::vector<double> gap;
            for (double v : values)
                gap.push_back(means.count(v) ? means.at(v).at(Method::all_active) - means.at(v).at(Method::proposed) : std::nan(""));
            std::string s;
            const bool good = means.size() == values.size() && trend_ok(gap, false, s);
            ok = ok && good;
            detail += fmt("rate/gap[%s]%s ", s.c_str(), good ? "" : "!");
        }
        detail += fmt("%.0f s", seconds_since(t0));
        rep.line(7, ok, detail);
    }

    rep.line(8, hyg.violations == 0 && hyg.numerical == 0,
             fmt("%d solutions checked, %d violate constraints, %d numerical failures", hyg.checked, hyg.violations,
                 hyg.numerical));
    return rep.failed == 0 ? 0 : 1;
}
