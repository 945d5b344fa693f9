#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace risgreen;

namespace {

QuadraticData three_ris_quadratics() {
    testsupport::TestRng rng(31);
    const auto ch = testsupport::random_channels(rng, 2, 2, {2, 1, 2});
    return precompute_quadratics(ch, Beamformer{{rng.vec(2), rng.vec(2)}});
}

std::vector<bool> pattern_of(const Eigen::VectorXcd& q, const QuadraticData& qd) {
    std::vector<bool> on;
    for (int l = 0; l < qd.num_ris(); ++l)
        on.push_back(q.segment(qd.offset[static_cast<std::size_t>(l)], qd.size[static_cast<std::size_t>(l)]).norm() > 0.0);
    return on;
}

}  // namespace

TEST_CASE("bisection switches off the lowest a_hat first") {
    const auto qd = three_ris_quadratics();
    const Eigen::VectorXcd q = Eigen::VectorXcd::Ones(qd.Nhat + 1);
    const std::vector<double> rho{1, 1, 1};
    // Feasible iff RIS 0 (largest a_hat) stays on.
    const ProbeCheck need0 = [](const Eigen::VectorXcd& qp, const std::vector<bool>& on) -> std::optional<Eigen::VectorXcd> {
        if (on[0]) return qp;
        return std::nullopt;
    };
    const auto r = bisect_active_set({0.9, 0.1, 0.5}, q, qd, {1, 1}, {1, 1}, rho, need0);
    CHECK(r.flag);
    CHECK(r.active.a == std::vector<bool>{true, false, false});
    CHECK(r.probes == std::vector<int>{1, 2, 3});
    CHECK(pattern_of(r.q, qd) == r.active.a);
    CHECK(std::abs(r.q(qd.Nhat)) == Catch::Approx(1.0));
}

TEST_CASE("bisection reaches both ends of the range") {
    const auto qd = three_ris_quadratics();
    const Eigen::VectorXcd q = Eigen::VectorXcd::Ones(qd.Nhat + 1);
    const std::vector<double> rho{1, 1, 1};
    const ProbeCheck never = [](const Eigen::VectorXcd&, const std::vector<bool>&) -> std::optional<Eigen::VectorXcd> {
        return std::nullopt;
    };
    const auto none = bisect_active_set({0.2, 0.3, 0.4}, q, qd, {1, 1}, {1, 1}, rho, never);
    CHECK_FALSE(none.flag);
    CHECK(none.active == ActiveSet::all(3));

    const ProbeCheck always = [](const Eigen::VectorXcd& qp, const std::vector<bool>&) -> std::optional<Eigen::VectorXcd> {
        return qp;
    };
    const auto all_off = bisect_active_set({0.2, 0.3, 0.4}, q, qd, {1, 1}, {1, 1}, rho, always);
    CHECK(all_off.flag);
    CHECK(all_off.active == ActiveSet::none(3));
    CHECK(all_off.q.head(qd.Nhat).norm() == 0.0);

    // Only the all-on pattern passes.
    const ProbeCheck all_on = [](const Eigen::VectorXcd& qp, const std::vector<bool>& on) -> std::optional<Eigen::VectorXcd> {
        for (bool b : on)
            if (!b) return std::nullopt;
        return qp;
    };
    const auto full = bisect_active_set({0.2, 0.3, 0.4}, q, qd, {1, 1}, {1, 1}, rho, all_on);
    CHECK(full.flag);
    CHECK(full.active == ActiveSet::all(3));
}

TEST_CASE("bisection probe count is logarithmic") {
    for (int L : {1, 2, 3, 5, 8, 12}) {
        testsupport::TestRng rng(static_cast<std::uint64_t>(L));
        const auto ch = testsupport::random_channels(rng, 2, 1, std::vector<int>(static_cast<std::size_t>(L), 1));
        const auto qd = precompute_quadratics(ch, Beamformer{{rng.vec(2)}});
        std::vector<double> a_hat;
        for (int l = 0; l < L; ++l) a_hat.push_back(rng.uniform());
        const int cut = static_cast<int>(rng.uniform() * (L + 1));
        // Feasible iff at most `cut` RISs are off.
        const ProbeCheck check = [cut](const Eigen::VectorXcd& qp, const std::vector<bool>& on) -> std::optional<Eigen::VectorXcd> {
            int off = 0;
            for (bool b : on) off += b ? 0 : 1;
            if (off <= cut) return qp;
            return std::nullopt;
        };
        const auto r = bisect_active_set(a_hat, Eigen::VectorXcd::Ones(qd.Nhat + 1), qd, {1}, {1},
                                         std::vector<double>(static_cast<std::size_t>(L), 1.0), check);
        CHECK(r.flag);
        CHECK(L - r.active.count() == cut);
        CHECK(static_cast<int>(r.probes.size()) <= static_cast<int>(std::ceil(std::log2(L + 1))) + 1);
    }
    const auto qd = three_ris_quadratics();
    CHECK_THROWS_AS(bisect_active_set({0.1, 0.2}, Eigen::VectorXcd::Ones(qd.Nhat + 1), qd, {1, 1}, {1, 1}, {1, 1, 1}),
                    DimensionError);
}

TEST_CASE("without RISs the alternation is one beamforming solve") {
    SystemConfig c = testsupport::small_config(4, 2, {});
    const auto ch = testsupport::draw_channels(c, 3);
    const auto r = alternating_optimize(ch, c);
    const auto bf = solve_beamforming(ch, ActiveSet{}, PhaseConfig{}, c);
    REQUIRE(r.solution.status == SolveStatus::solved);
    CHECK(r.trace.records.empty());
    CHECK(r.solution.transmit_power_mw == bf.transmit_power_mw);
    CHECK(r.trace.termination == "no_ris");
}

TEST_CASE("blocked RISs are switched off") {
    SystemConfig c = testsupport::desk_config();
    for (std::uint64_t s = 0; s < 3; ++s) {
        auto ch = testsupport::draw_channels(c, s);
        for (auto& G : ch.G) G.setZero();
        const auto r = alternating_optimize(ch, c, {}, s);
        REQUIRE(r.solution.status == SolveStatus::solved);
        CHECK(r.solution.active == ActiveSet::none(3));
        CHECK(r.solution.ris_circuit_power_mw == 0.0);
        const auto direct = solve_beamforming(ch, ActiveSet::none(3), PhaseConfig::zero_phase(c, ActiveSet::none(3)), c);
        CHECK(testsupport::rel_err(r.solution.transmit_power_mw, direct.transmit_power_mw) < 1e-5);
    }
}

TEST_CASE("unreachable targets are reported infeasible") {
    SystemConfig c = testsupport::desk_config();
    c.p_max_mw = 1e-9;
    const auto ch = testsupport::draw_channels(c, 1);
    CHECK(alternating_optimize(ch, c).solution.status == SolveStatus::infeasible);
    CHECK(all_ris_active_baseline(ch, c).solution.status == SolveStatus::infeasible);
    CHECK(exhaustive_search_baseline(ch, c).solution.status == SolveStatus::infeasible);
}

TEST_CASE("alternation invariants on the desk scenario") {
    const SystemConfig c = testsupport::desk_config();
    for (std::uint64_t s = 0; s < 4; ++s) {
        INFO("seed " << s);
        const auto ch = testsupport::draw_channels(c, s);
        const auto start = solve_beamforming(ch, ActiveSet::all(3), PhaseConfig::zero_phase(c, ActiveSet::all(3)), c);
        REQUIRE(start.status == BeamStatus::optimal);
        const double start_power = start.transmit_power_mw / c.eta + 3 * c.ris_power_mw(0);

        const auto r = alternating_optimize(ch, c, {}, s);
        REQUIRE(r.solution.status == SolveStatus::solved);
        CHECK(check_feasible(r.solution, c, ch, 1e-6).feasible);
        CHECK(r.solution.network_power_mw <= start_power + 1e-9);
        CHECK(static_cast<int>(r.trace.records.size()) <= 30);
        const auto& it = r.solution.iterations;
        REQUIRE(!it.empty());
        for (std::size_t i = 1; i < it.size(); ++i) CHECK(it[i] <= it[i - 1]);
        CHECK(it.back() == r.solution.network_power_mw);
        for (const auto& rec : r.trace.records)
            if (rec.flag) CHECK(rec.sdp_objective_mw <= rec.circuit_power_mw + 1e-6);

        const auto again = alternating_optimize(ch, c, {}, s);
        CHECK(again.solution.network_power_mw == r.solution.network_power_mw);

        const auto base = all_ris_active_baseline(ch, c, {}, s);
        REQUIRE(base.solution.status == SolveStatus::solved);
        CHECK(base.solution.active == ActiveSet::all(3));
        CHECK(base.solution.ris_circuit_power_mw == 3 * 8 * c.p_re_mw);
        CHECK(check_feasible(base.solution, c, ch, 1e-6).feasible);
        CHECK(base.solution.network_power_mw <= start_power + 1e-9);
        for (std::size_t i = 1; i < base.solution.iterations.size(); ++i)
            CHECK(base.solution.iterations[i] <= base.solution.iterations[i - 1]);
    }
}

TEST_CASE("exhaustive search covers every subset") {
    SystemConfig c = testsupport::small_config(4, 2, {4});
    const auto ch = testsupport::draw_channels(c, 2);
    const auto ex = exhaustive_search_baseline(ch, c);
    CHECK(ex.subsets_evaluated == 2);
    REQUIRE(ex.solution.status == SolveStatus::solved);
    CHECK(check_feasible(ex.solution, c, ch, 1e-6).feasible);
    CHECK(ex.solution.phases.theta.size() == 1);

    const SystemConfig d = testsupport::desk_config();
    for (std::uint64_t s = 0; s < 2; ++s) {
        const auto dch = testsupport::draw_channels(d, s);
        AlternationOptions opt;
        opt.threads = 2;
        const auto full = exhaustive_search_baseline(dch, d, opt, s);
        CHECK(full.subsets_evaluated == 8);
        REQUIRE(full.solution.status == SolveStatus::solved);
        CHECK(check_feasible(full.solution, d, dch, 1e-6).feasible);
        // The all-on subset is one of the candidates.
        const auto base = all_ris_active_baseline(dch, d, {}, s);
        CHECK(full.solution.network_power_mw <= base.solution.network_power_mw + 1e-6);
        // The empty subset too.
        const auto direct = solve_beamforming(dch, ActiveSet::none(3), PhaseConfig::zero_phase(d, ActiveSet::none(3)), d);
        if (direct.status == BeamStatus::optimal)
            CHECK(full.solution.network_power_mw <= direct.transmit_power_mw / d.eta + 1e-6);
    }

    SystemConfig big = testsupport::small_config(2, 1, std::vector<int>(13, 1));
    CHECK_THROWS_AS(exhaustive_search_baseline(testsupport::draw_channels(big, 0), big), ConfigError);
}

TEST_CASE("restriction keeps the selected RISs in order") {
    const SystemConfig c = testsupport::desk_config();
    const auto ch = testsupport::draw_channels(c, 0);
    const auto [sub, sc] = restrict_to(c, ch, {false, true, true});
    CHECK(sub.L == 2);
    sc.check_shapes(sub);
    CHECK(sc.G[0] == ch.G[1]);
    CHECK(sc.h[1][2] == ch.h[2][2]);
}

TEST_CASE("random initial phases are reproducible") {
    const SystemConfig c = testsupport::desk_config();
    const auto ch = testsupport::draw_channels(c, 9);
    AlternationOptions opt;
    opt.random_init = true;
    const auto a = alternating_optimize(ch, c, opt, 4);
    const auto b = alternating_optimize(ch, c, opt, 4);
    REQUIRE(a.solution.status == SolveStatus::solved);
    CHECK(a.solution.network_power_mw == b.solution.network_power_mw);
    CHECK(check_feasible(a.solution, c, ch, 1e-6).feasible);
}
