#pragma once

// Scenario builders and reference evaluators shared by the test binaries.
// The reference evaluators are written from the scalar definitions and do not
// call the library routines they are compared against.

#include "risgreen/risgreen.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace testsupport {

using risgreen::cplx;

/// The desk scenario: M=6, K=3, L=3, N_l=8, R=2 bit/s/Hz, sigma^2 = -40 dBm.
inline risgreen::SystemConfig desk_config(int M = 6, int K = 3, double rate = 2.0) {
    risgreen::SystemConfig c;
    c.M = M;
    c.K = K;
    c.L = 3;
    c.N = {8, 8, 8};
    c.rho = {1.0, 1.0, 1.0};
    c.sigma2_mw.assign(static_cast<std::size_t>(K), 1e-4);
    c.gamma.assign(static_cast<std::size_t>(K), risgreen::rate_to_sinr(rate));
    return c;
}

/// Config with arbitrary RIS sizes; RIS positions are spread along a line.
inline risgreen::SystemConfig small_config(int M, int K, std::vector<int> N) {
    risgreen::SystemConfig c;
    c.M = M;
    c.K = K;
    c.L = static_cast<int>(N.size());
    c.N = N;
    c.rho.assign(N.size(), 1.0);
    c.sigma2_mw.assign(static_cast<std::size_t>(K), 1e-4);
    c.gamma.assign(static_cast<std::size_t>(K), 3.0);
    c.geometry.ris.clear();
    for (std::size_t l = 0; l < N.size(); ++l) c.geometry.ris.push_back({20.0 * static_cast<double>(l), 40.0, 40.0});
    return c;
}

inline risgreen::ChannelSet draw_channels(const risgreen::SystemConfig& c, std::uint64_t seed) {
    return risgreen::generate_channels(c, risgreen::place_users(c, seed), seed);
}

/// Unit-variance complex Gaussian entries, independent of the library RNG.
struct TestRng {
    explicit TestRng(std::uint64_t seed) : eng(seed) {}
    std::mt19937_64 eng;
    std::normal_distribution<double> n{0.0, std::sqrt(0.5)};
    std::uniform_real_distribution<double> u{0.0, 1.0};

    cplx c() { return {n(eng), n(eng)}; }
    double uniform() { return u(eng); }
    Eigen::VectorXcd vec(Eigen::Index len) {
        Eigen::VectorXcd v(len);
        for (Eigen::Index i = 0; i < len; ++i) v(i) = c();
        return v;
    }
    Eigen::MatrixXcd mat(Eigen::Index r, Eigen::Index cols) {
        Eigen::MatrixXcd m(r, cols);
        for (Eigen::Index j = 0; j < cols; ++j)
            for (Eigen::Index i = 0; i < r; ++i) m(i, j) = c();
        return m;
    }
};

/// Random channel set with unit-variance entries and the given shapes.
inline risgreen::ChannelSet random_channels(TestRng& rng, int M, int K, const std::vector<int>& N) {
    risgreen::ChannelSet ch;
    for (int n : N) ch.G.push_back(rng.mat(n, M));
    ch.h.resize(N.size());
    for (std::size_t l = 0; l < N.size(); ++l)
        for (int k = 0; k < K; ++k) ch.h[l].push_back(rng.vec(N[l]));
    for (int k = 0; k < K; ++k) ch.g.push_back(rng.vec(M));
    return ch;
}

/// Unit-modulus-times-rho phases for every RIS.
inline risgreen::PhaseConfig random_phases(TestRng& rng, const std::vector<int>& N, const std::vector<double>& rho) {
    risgreen::PhaseConfig p;
    for (std::size_t l = 0; l < N.size(); ++l) {
        Eigen::VectorXcd t(N[l]);
        for (int n = 0; n < N[l]; ++n) t(n) = std::polar(rho[l], 2.0 * M_PI * rng.uniform());
        p.theta.push_back(t);
    }
    return p;
}

/// Row form of the effective channel: r_m = sum_l sum_n conj(h_{l,k,n}) theta_{l,n} G_l(n, m) + conj(g_{k,m}).
/// The composite channel is its entrywise conjugate.
inline Eigen::VectorXcd scalar_composite(const risgreen::ChannelSet& ch, const risgreen::ActiveSet& a,
                                         const risgreen::PhaseConfig& p, int k) {
    const auto M = ch.g[static_cast<std::size_t>(k)].size();
    Eigen::VectorXcd out(M);
    for (Eigen::Index m = 0; m < M; ++m) {
        cplx row = std::conj(ch.g[static_cast<std::size_t>(k)](m));
        for (std::size_t l = 0; l < ch.G.size(); ++l) {
            if (!a[static_cast<int>(l)]) continue;
            const auto& G = ch.G[l];
            const auto& h = ch.h[l][static_cast<std::size_t>(k)];
            for (Eigen::Index n = 0; n < G.rows(); ++n) row += std::conj(h(n)) * p.theta[l](n) * G(n, m);
        }
        out(m) = std::conj(row);
    }
    return out;
}

/// SINR from the scalar expansion |r w_k|^2 / (sum_{j != k} |r w_j|^2 + sigma^2).
inline double scalar_sinr(const risgreen::ChannelSet& ch, const risgreen::ActiveSet& a, const risgreen::PhaseConfig& p,
                          const std::vector<Eigen::VectorXcd>& w, int k, double sigma2) {
    const Eigen::VectorXcd comp = scalar_composite(ch, a, p, k);
    auto gain = [&](const Eigen::VectorXcd& v) {
        cplx s = 0.0;
        for (Eigen::Index m = 0; m < v.size(); ++m) s += std::conj(comp(m)) * v(m);
        return std::norm(s);
    };
    double interf = sigma2;
    for (std::size_t j = 0; j < w.size(); ++j)
        if (static_cast<int>(j) != k) interf += gain(w[j]);
    return gain(w[static_cast<std::size_t>(k)]) / interf;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1e-300, std::max(std::abs(a), std::abs(b))); }

}  // namespace testsupport
