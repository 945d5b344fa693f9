#include "support.hpp"

#include <catch_amalgamated.hpp>

using namespace risgreen;

namespace {

SystemConfig direct_only(int M, int K) {
    SystemConfig c;
    c.M = M;
    c.K = K;
    c.L = 0;
    c.N.clear();
    c.rho.clear();
    c.geometry.ris.clear();
    c.sigma2_mw.assign(static_cast<std::size_t>(K), 1e-4);
    c.gamma.assign(static_cast<std::size_t>(K), 3.0);
    return c;
}

}  // namespace

TEST_CASE("socp structure") {
    std::vector<Eigen::VectorXcd> h{Eigen::VectorXcd::Ones(3)};
    const auto p = build_socp(h, {3.0}, {1e-4}, 1000.0);
    REQUIRE(p.blocks.size() == 3);  // epigraph, one SINR cone, power budget
    for (const auto& b : p.blocks) CHECK(b.kind == conic::ConeKind::soc);
    CHECK(p.num_vars() == 2 * 3 + 1);

    std::vector<Eigen::VectorXcd> h3(3, Eigen::VectorXcd::Ones(2));
    CHECK(build_socp(h3, {1, 1, 1}, {1, 1, 1}, 1.0).blocks.size() == 5);
    CHECK_THROWS_AS(build_socp(h3, {1, 1}, {1, 1, 1}, 1.0), DimensionError);
}

TEST_CASE("single user power is the matched filter closed form") {
    const SystemConfig c = direct_only(4, 1);
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto ch = testsupport::draw_channels(c, s);
        const auto r = solve_beamforming(ch, ActiveSet{}, PhaseConfig{}, c);
        REQUIRE(r.status == BeamStatus::optimal);
        const double ref = c.gamma[0] * c.sigma2_mw[0] / ch.g[0].squaredNorm();
        CHECK(testsupport::rel_err(r.transmit_power_mw, ref) < 1e-6);
        CHECK(testsupport::rel_err(r.objective_mw, ref / c.eta) < 1e-6);
        // Beam aligned with g.
        const double align = std::abs(ch.g[0].dot(r.beams.w[0])) / (ch.g[0].norm() * r.beams.w[0].norm());
        CHECK(align > 1.0 - 1e-6);
    }
}

TEST_CASE("orthogonal users decouple") {
    const SystemConfig c = direct_only(4, 2);
    testsupport::TestRng rng(5);
    for (int t = 0; t < 10; ++t) {
        Eigen::VectorXcd a = rng.vec(4), b = rng.vec(4);
        b -= a * (a.dot(b) / a.squaredNorm());
        const std::vector<Eigen::VectorXcd> h{1e-2 * a, 1e-2 * b};
        const auto r = solve_beamforming_composite(h, c);
        REQUIRE(r.status == BeamStatus::optimal);
        double ref = 0.0;
        for (int k = 0; k < 2; ++k) ref += c.gamma[static_cast<std::size_t>(k)] * c.sigma2_mw[static_cast<std::size_t>(k)] / h[static_cast<std::size_t>(k)].squaredNorm();
        CHECK(testsupport::rel_err(r.transmit_power_mw, ref) < 1e-6);
    }
}

TEST_CASE("zero budget is infeasible") {
    SystemConfig c = direct_only(4, 2);
    c.p_max_mw = 1e-12;
    const auto ch = testsupport::draw_channels(c, 1);
    CHECK(solve_beamforming(ch, ActiveSet{}, PhaseConfig{}, c).status == BeamStatus::infeasible);
}

TEST_CASE("vanishing targets need vanishing power") {
    SystemConfig c = direct_only(4, 3);
    c.gamma.assign(3, 1e-9);
    const auto ch = testsupport::draw_channels(c, 2);
    const auto r = solve_beamforming(ch, ActiveSet{}, PhaseConfig{}, c);
    REQUIRE(r.status == BeamStatus::optimal);
    SystemConfig d = direct_only(4, 3);
    const auto full = solve_beamforming(ch, ActiveSet{}, PhaseConfig{}, d);
    CHECK(r.transmit_power_mw < 1e-6 * full.transmit_power_mw);
}

TEST_CASE("solutions meet every SINR target and are tight") {
    for (std::uint64_t s = 0; s < 20; ++s) {
        SystemConfig c = testsupport::desk_config();
        c.K = 2 + static_cast<int>(s % 3);
        c.sigma2_mw.assign(static_cast<std::size_t>(c.K), 1e-4);
        c.gamma.assign(static_cast<std::size_t>(c.K), 1.0 + static_cast<double>(s % 4));
        const auto ch = testsupport::draw_channels(c, s);
        testsupport::TestRng rng(s);
        const ActiveSet a{{true, s % 2 == 0, true}};
        auto ph = testsupport::random_phases(rng, c.N, c.rho);
        ph.theta[1].setZero();
        if (a[1]) ph.theta[1].setConstant(1.0);
        const auto r = solve_beamforming(ch, a, ph, c);
        REQUIRE(r.status == BeamStatus::optimal);
        const auto sol = make_solution(a, r.beams, ph, c, SolveStatus::solved);
        CHECK(check_feasible(sol, c, ch, 1e-6).feasible);
        CHECK(r.transmit_power_mw <= c.p_max_mw + 1e-6);
        for (int k = 0; k < c.K; ++k) {
            const double v = sinr(ch, a, ph, r.beams, c, k);
            CHECK(v >= c.gamma[static_cast<std::size_t>(k)] * (1.0 - 1e-6));
            CHECK(testsupport::rel_err(v, c.gamma[static_cast<std::size_t>(k)]) < 1e-4);
        }
    }
}

TEST_CASE("power scales with the noise level") {
    SystemConfig c = testsupport::desk_config();
    const auto ch = testsupport::draw_channels(c, 4);
    const auto a = ActiveSet::all(3);
    const auto ph = PhaseConfig::zero_phase(c, a);
    const auto r1 = solve_beamforming(ch, a, ph, c);
    for (double s : {0.1, 7.0}) {
        SystemConfig d = c;
        for (auto& v : d.sigma2_mw) v *= s;
        d.p_max_mw *= s;
        const auto r2 = solve_beamforming(ch, a, ph, d);
        REQUIRE(r2.status == BeamStatus::optimal);
        CHECK(testsupport::rel_err(r2.transmit_power_mw, s * r1.transmit_power_mw) < 1e-6);
    }
}

TEST_CASE("adding an RIS with optimized phases does not raise the power") {
    // Single user, single RIS element per RIS: the best phase aligns the
    // reflected term with the direct term, and the closed form gives the power.
    SystemConfig c = testsupport::small_config(1, 1, {1});
    c.p_max_mw = 1e6;
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto ch = testsupport::draw_channels(c, s);
        const cplx direct = ch.g[0](0);
        const cplx refl = std::conj(ch.G[0](0, 0)) * ch.h[0][0](0);  // composite = g + conj(G) conj(theta) h
        const cplx theta = std::conj(std::polar(1.0, std::arg(direct) - std::arg(refl)));
        PhaseConfig ph{{Eigen::VectorXcd::Constant(1, theta)}};
        const auto with = solve_beamforming(ch, ActiveSet::all(1), ph, c);
        const auto without = solve_beamforming(ch, ActiveSet::none(1), PhaseConfig{{Eigen::VectorXcd::Zero(1)}}, c);
        CHECK(with.transmit_power_mw <= without.transmit_power_mw + 1e-8);
        const double ref = c.gamma[0] * c.sigma2_mw[0] / std::pow(std::abs(direct) + std::abs(refl), 2);
        CHECK(testsupport::rel_err(with.transmit_power_mw, ref) < 1e-6);
    }
}
