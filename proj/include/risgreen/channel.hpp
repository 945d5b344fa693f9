#pragma once

// Scenario geometry, distance-based path loss and seeded Rayleigh channels.
//
// Randomness: every link draws from its own std::mt19937_64 stream whose seed
// is derived from the trial seed and a link tag with SplitMix64, so adding or
// removing a link never shifts the draws of another one.

#include "risgreen/model.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

namespace risgreen {

inline constexpr const char* rng_algorithm = "mt19937_64 seeded via splitmix64 link tags; Box-Muller normals";

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Child seed of `seed` along a path of tags.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t s = splitmix64(seed);
    for (auto t : tags) s = splitmix64(s ^ splitmix64(t + 0x632be59bd9b4e019ULL));
    return s;
}

/// Portable draws on top of mt19937_64 (std distributions are implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (the second value is cached).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    /// Circularly-symmetric complex Gaussian with E|z|^2 = 1.
    cplx complex_normal() {
        const double re = normal();
        const double im = normal();
        return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
    }

    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

struct Geometry {
    Eigen::Vector3d bs_pos = Eigen::Vector3d::Zero();
    std::vector<Eigen::Vector3d> ris_pos;
    Eigen::Vector3d region_min = Eigen::Vector3d::Zero();
    Eigen::Vector3d region_max = Eigen::Vector3d::Zero();
    std::vector<Eigen::Vector3d> user_pos;
};

/// Uniform i.i.d. user positions in the configured box; zero-extent axes are allowed.
inline Geometry place_users(const SystemConfig& cfg, std::uint64_t seed) {
    if (cfg.K < 1) throw ConfigError("K", "must be at least 1");
    const auto& gc = cfg.geometry;
    for (int a = 0; a < 3; ++a)
        if (gc.user_min(a) > gc.user_max(a)) throw ConfigError("geometry.user_region", "min must not exceed max");
    Geometry geo;
    geo.bs_pos = gc.bs;
    geo.ris_pos = gc.ris;
    geo.region_min = gc.user_min;
    geo.region_max = gc.user_max;
    Rng rng(derive_seed(seed, {4}));
    for (int k = 0; k < cfg.K; ++k) {
        Eigen::Vector3d p;
        for (int a = 0; a < 3; ++a) p(a) = rng.uniform(gc.user_min(a), gc.user_max(a));
        geo.user_pos.push_back(p);
    }
    return geo;
}

/// Linear power gain 10^(intercept/10) d^-alpha.
inline double path_loss(double d, double alpha, double intercept_db) {
    if (!(d > 0.0)) throw std::invalid_argument("path_loss: distance must be positive");
    return std::pow(10.0, intercept_db / 10.0) * std::pow(d, -alpha);
}

/// Channels of one realization. Entry draws: G_l uses tags {1, l} in column-major
/// order, h_{l,k} uses {2, l, k}, g_k uses {3, k}.
inline ChannelSet generate_channels(const SystemConfig& cfg, const Geometry& geo, std::uint64_t seed) {
    if (geo.ris_pos.size() != static_cast<std::size_t>(cfg.L) || geo.user_pos.size() != static_cast<std::size_t>(cfg.K))
        throw DimensionError("geometry does not match RIS/user counts");
    const auto& pl = cfg.pathloss;
    auto gain = [&](const Eigen::Vector3d& a, const Eigen::Vector3d& b, double alpha) {
        const double d = (a - b).norm();
        if (!(d > 0.0)) throw std::invalid_argument("generate_channels: coincident link endpoints");
        return path_loss(d, alpha, pl.intercept_db);
    };
    ChannelSet ch;
    for (int l = 0; l < cfg.L; ++l) {
        const int nl = cfg.N[static_cast<std::size_t>(l)];
        const double s = std::sqrt(gain(geo.bs_pos, geo.ris_pos[static_cast<std::size_t>(l)], pl.alpha_br));
        Rng rng(derive_seed(seed, {1, static_cast<std::uint64_t>(l)}));
        Eigen::MatrixXcd G(nl, cfg.M);
        for (int j = 0; j < cfg.M; ++j)
            for (int i = 0; i < nl; ++i) G(i, j) = s * rng.complex_normal();
        ch.G.push_back(std::move(G));
    }
    ch.h.resize(static_cast<std::size_t>(cfg.L));
    for (int l = 0; l < cfg.L; ++l) {
        const int nl = cfg.N[static_cast<std::size_t>(l)];
        for (int k = 0; k < cfg.K; ++k) {
            const double s = std::sqrt(
                gain(geo.ris_pos[static_cast<std::size_t>(l)], geo.user_pos[static_cast<std::size_t>(k)], pl.alpha_ru));
            Rng rng(derive_seed(seed, {2, static_cast<std::uint64_t>(l), static_cast<std::uint64_t>(k)}));
            Eigen::VectorXcd v(nl);
            for (int i = 0; i < nl; ++i) v(i) = s * rng.complex_normal();
            ch.h[static_cast<std::size_t>(l)].push_back(std::move(v));
        }
    }
    for (int k = 0; k < cfg.K; ++k) {
        const double s = std::sqrt(gain(geo.bs_pos, geo.user_pos[static_cast<std::size_t>(k)], pl.alpha_bu));
        Rng rng(derive_seed(seed, {3, static_cast<std::uint64_t>(k)}));
        Eigen::VectorXcd v(cfg.M);
        for (int i = 0; i < cfg.M; ++i) v(i) = s * rng.complex_normal();
        ch.g.push_back(std::move(v));
    }
    return ch;
}

}  // namespace risgreen
