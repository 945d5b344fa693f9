#pragma once

// Domain types and closed-form evaluators: composite channels, SINR, network
// power and feasibility of a joint beamforming / RIS configuration.
//
// Powers are linear mW throughout; beam entries are in sqrt(mW).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace risgreen {

using cplx = std::complex<double>;

/// Shape mismatch between configuration, channels and optimization variables.
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A configuration field violates its invariant. `path` names the field.
struct ConfigError : std::invalid_argument {
    ConfigError(std::string field, const std::string& message)
        : std::invalid_argument(field + ": " + message), path(std::move(field)) {}
    std::string path;
};

struct GeometryConfig {
    Eigen::Vector3d bs{0.0, 0.0, 50.0};
    std::vector<Eigen::Vector3d> ris{{0.0, 40.0, 40.0}, {40.0, 60.0, 40.0}, {60.0, 20.0, 40.0}};
    Eigen::Vector3d user_min{0.0, 0.0, 0.0};
    Eigen::Vector3d user_max{10.0, 10.0, 0.0};
};

struct PathLossConfig {
    double alpha_br = 2.5;
    double alpha_ru = 2.4;
    double alpha_bu = 3.5;
    double intercept_db = 0.0;
};

struct SystemConfig {
    int M = 10;
    int K = 6;
    int L = 3;
    std::vector<int> N{12, 12, 12};
    double eta = 0.6;
    double p_max_mw = 1000.0;
    double p_bs_mw = 0.0;
    double p_re_mw = 10.0;
    std::vector<double> rho{1.0, 1.0, 1.0};
    std::vector<double> sigma2_mw = std::vector<double>(6, 1e-4);
    std::vector<double> gamma = std::vector<double>(6, 3.0);
    GeometryConfig geometry;
    PathLossConfig pathloss;

    int total_elements() const {
        int n = 0;
        for (int v : N) n += v;
        return n;
    }

    double ris_power_mw(int l) const { return N.at(static_cast<std::size_t>(l)) * p_re_mw; }

    void validate() const {
        if (M < 1) throw ConfigError("M", "must be at least 1");
        if (K < 1) throw ConfigError("K", "must be at least 1");
        if (L < 0) throw ConfigError("L", "must be nonnegative");
        if (N.size() != static_cast<std::size_t>(L)) throw ConfigError("N", "needs one entry per RIS");
        for (std::size_t l = 0; l < N.size(); ++l)
            if (N[l] < 1) throw ConfigError("N[" + std::to_string(l) + "]", "must be at least 1");
        if (!(eta > 0.0 && eta <= 1.0)) throw ConfigError("eta", "must lie in (0, 1]");
        if (!(p_max_mw > 0.0)) throw ConfigError("P_max", "must be positive");
        if (!(p_bs_mw >= 0.0)) throw ConfigError("P_BS", "must be nonnegative");
        if (!(p_re_mw >= 0.0)) throw ConfigError("P_RE", "must be nonnegative");
        if (rho.size() != static_cast<std::size_t>(L)) throw ConfigError("rho", "needs one entry per RIS");
        for (std::size_t l = 0; l < rho.size(); ++l)
            if (!(rho[l] > 0.0 && rho[l] <= 1.0)) throw ConfigError("rho[" + std::to_string(l) + "]", "must lie in (0, 1]");
        if (sigma2_mw.size() != static_cast<std::size_t>(K)) throw ConfigError("sigma2", "needs one entry per user");
        for (std::size_t k = 0; k < sigma2_mw.size(); ++k)
            if (!(sigma2_mw[k] > 0.0)) throw ConfigError("sigma2[" + std::to_string(k) + "]", "must be positive");
        if (gamma.size() != static_cast<std::size_t>(K)) throw ConfigError("gamma", "needs one entry per user");
        for (std::size_t k = 0; k < gamma.size(); ++k)
            if (!(gamma[k] > 0.0)) throw ConfigError("gamma[" + std::to_string(k) + "]", "must be positive");
        if (geometry.ris.size() != static_cast<std::size_t>(L))
            throw ConfigError("geometry.ris", "needs one position per RIS");
        for (int a = 0; a < 3; ++a)
            if (geometry.user_min(a) > geometry.user_max(a))
                throw ConfigError("geometry.user_region", "min must not exceed max");
        if (!geometry.bs.allFinite() || !geometry.user_min.allFinite() || !geometry.user_max.allFinite())
            throw ConfigError("geometry", "coordinates must be finite");
        for (const auto& p : geometry.ris)
            if (!p.allFinite()) throw ConfigError("geometry.ris", "coordinates must be finite");
    }
};

/// Channels of one fading realization: G[l] is N_l x M (BS to RIS l),
/// h[l][k] has N_l entries (RIS l to user k), g[k] has M entries (BS to user k).
struct ChannelSet {
    std::vector<Eigen::MatrixXcd> G;
    std::vector<std::vector<Eigen::VectorXcd>> h;
    std::vector<Eigen::VectorXcd> g;

    int num_users() const { return static_cast<int>(g.size()); }
    int num_ris() const { return static_cast<int>(G.size()); }
    int num_antennas() const { return g.empty() ? 0 : static_cast<int>(g.front().size()); }

    void check_shapes(const SystemConfig& cfg) const {
        if (G.size() != static_cast<std::size_t>(cfg.L) || h.size() != static_cast<std::size_t>(cfg.L) ||
            g.size() != static_cast<std::size_t>(cfg.K))
            throw DimensionError("channel set does not match RIS/user counts");
        for (int l = 0; l < cfg.L; ++l) {
            const auto nl = cfg.N[static_cast<std::size_t>(l)];
            if (G[l].rows() != nl || G[l].cols() != cfg.M) throw DimensionError("G has wrong shape");
            if (h[l].size() != static_cast<std::size_t>(cfg.K)) throw DimensionError("h has wrong user count");
            for (const auto& v : h[l])
                if (v.size() != nl) throw DimensionError("h has wrong length");
        }
        for (const auto& v : g)
            if (v.size() != cfg.M) throw DimensionError("g has wrong length");
    }
};

struct Beamformer {
    std::vector<Eigen::VectorXcd> w;

    double transmit_power() const {
        double p = 0.0;
        for (const auto& v : w) p += v.squaredNorm();
        return p;
    }
};

struct ActiveSet {
    std::vector<bool> a;

    static ActiveSet all(int L) { return {std::vector<bool>(static_cast<std::size_t>(L), true)}; }
    static ActiveSet none(int L) { return {std::vector<bool>(static_cast<std::size_t>(L), false)}; }

    int size() const { return static_cast<int>(a.size()); }
    bool operator[](int l) const { return a[static_cast<std::size_t>(l)]; }
    int count() const { return static_cast<int>(std::count(a.begin(), a.end(), true)); }
    bool operator==(const ActiveSet&) const = default;
};

/// theta[l][n] = rho_l exp(j phi_{l,n}) on active RISs, zero on inactive ones.
struct PhaseConfig {
    std::vector<Eigen::VectorXcd> theta;

    /// Zero phase shifts (theta = rho) on every active RIS.
    static PhaseConfig zero_phase(const SystemConfig& cfg, const ActiveSet& active) {
        PhaseConfig p;
        for (int l = 0; l < cfg.L; ++l) {
            const auto nl = cfg.N[static_cast<std::size_t>(l)];
            p.theta.push_back(active[l] ? Eigen::VectorXcd::Constant(nl, cfg.rho[static_cast<std::size_t>(l)])
                                        : Eigen::VectorXcd::Zero(nl));
        }
        return p;
    }

    /// max | |theta_{l,n}| - rho_l | over active RISs.
    double modulus_deviation(const std::vector<double>& rho, const ActiveSet& active) const {
        double dev = 0.0;
        for (std::size_t l = 0; l < theta.size(); ++l)
            if (active[static_cast<int>(l)])
                for (Eigen::Index n = 0; n < theta[l].size(); ++n)
                    dev = std::max(dev, std::abs(std::abs(theta[l](n)) - rho[l]));
        return dev;
    }
};

enum class SolveStatus { solved, infeasible, numerical_failure };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::solved: return "solved";
        case SolveStatus::infeasible: return "infeasible";
        case SolveStatus::numerical_failure: return "numerical_failure";
    }
    return "?";
}

struct PowerBreakdown {
    double transmit_mw = 0.0;
    double ris_circuit_mw = 0.0;
    double network_mw = 0.0;  // transmit / eta + RIS circuit
    double total_mw = 0.0;    // network + BS circuit
};

struct NetworkSolution {
    ActiveSet active;
    Beamformer beams;
    PhaseConfig phases;
    double transmit_power_mw = 0.0;
    double ris_circuit_power_mw = 0.0;
    double network_power_mw = 0.0;
    double total_power_mw = 0.0;
    std::vector<double> iterations;  // network power after each accepted iterate
    SolveStatus status = SolveStatus::infeasible;
};

inline void check_active(const SystemConfig& cfg, const ActiveSet& active, const PhaseConfig& phases) {
    if (active.size() != cfg.L || phases.theta.size() != static_cast<std::size_t>(cfg.L))
        throw DimensionError("active set / phases do not match RIS count");
    for (int l = 0; l < cfg.L; ++l)
        if (phases.theta[static_cast<std::size_t>(l)].size() != cfg.N[static_cast<std::size_t>(l)])
            throw DimensionError("phase vector has wrong length");
}

/// h~_k = g_k + sum_{l active} G_l^H conj(Theta_l) h_{l,k}; h~_k^H is the
/// effective row channel seen by user k.
inline Eigen::VectorXcd composite_channel(const ChannelSet& ch, const ActiveSet& active, const PhaseConfig& phases,
                                          int k) {
    if (k < 0 || k >= ch.num_users()) throw DimensionError("user index out of range");
    if (active.size() != ch.num_ris() || phases.theta.size() != static_cast<std::size_t>(ch.num_ris()))
        throw DimensionError("active set / phases do not match RIS count");
    Eigen::VectorXcd out = ch.g[static_cast<std::size_t>(k)];
    for (int l = 0; l < ch.num_ris(); ++l) {
        if (!active[l]) continue;
        const auto& theta = phases.theta[static_cast<std::size_t>(l)];
        const auto& hk = ch.h[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)];
        const auto& G = ch.G[static_cast<std::size_t>(l)];
        if (theta.size() != G.rows() || hk.size() != G.rows() || G.cols() != out.size())
            throw DimensionError("composite channel shape mismatch");
        out.noalias() += G.adjoint() * theta.conjugate().cwiseProduct(hk);
    }
    return out;
}

inline std::vector<Eigen::VectorXcd> composite_channels(const ChannelSet& ch, const ActiveSet& active,
                                                        const PhaseConfig& phases) {
    std::vector<Eigen::VectorXcd> out;
    for (int k = 0; k < ch.num_users(); ++k) out.push_back(composite_channel(ch, active, phases, k));
    return out;
}

/// SINR of user k given its composite channel.
inline double sinr_from_composite(const Eigen::VectorXcd& hk, const Beamformer& beams, int k, double sigma2) {
    if (beams.w.empty() || k < 0 || k >= static_cast<int>(beams.w.size())) throw DimensionError("beam index out of range");
    double interference = 0.0;
    double signal = 0.0;
    for (std::size_t j = 0; j < beams.w.size(); ++j) {
        if (beams.w[j].size() != hk.size()) throw DimensionError("beam length mismatch");
        const double v = std::norm(hk.dot(beams.w[j]));
        if (static_cast<int>(j) == k) signal = v;
        else interference += v;
    }
    return signal / (interference + sigma2);
}

inline double sinr(const ChannelSet& ch, const ActiveSet& active, const PhaseConfig& phases, const Beamformer& beams,
                   int k, double sigma2) {
    return sinr_from_composite(composite_channel(ch, active, phases, k), beams, k, sigma2);
}

inline double sinr(const ChannelSet& ch, const ActiveSet& active, const PhaseConfig& phases, const Beamformer& beams,
                   const SystemConfig& cfg, int k) {
    return sinr(ch, active, phases, beams, k, cfg.sigma2_mw.at(static_cast<std::size_t>(k)));
}

inline PowerBreakdown network_power(const ActiveSet& active, const Beamformer& beams, const SystemConfig& cfg) {
    if (active.size() != cfg.L) throw DimensionError("active set does not match RIS count");
    PowerBreakdown p;
    p.transmit_mw = beams.transmit_power();
    for (int l = 0; l < cfg.L; ++l)
        if (active[l]) p.ris_circuit_mw += cfg.ris_power_mw(l);
    p.network_mw = p.transmit_mw / cfg.eta + p.ris_circuit_mw;
    p.total_mw = p.network_mw + cfg.p_bs_mw;
    return p;
}

/// SINR threshold for a target rate in bits per channel use.
inline double rate_to_sinr(double rate_bits) {
    if (!(rate_bits >= 0.0)) throw std::invalid_argument("target rate must be nonnegative");
    return std::exp2(rate_bits) - 1.0;
}

inline NetworkSolution make_solution(const ActiveSet& active, const Beamformer& beams, const PhaseConfig& phases,
                                     const SystemConfig& cfg, SolveStatus status) {
    NetworkSolution sol;
    sol.active = active;
    sol.beams = beams;
    sol.phases = phases;
    for (int l = 0; l < cfg.L; ++l)
        if (!active[l]) sol.phases.theta[static_cast<std::size_t>(l)].setZero();
    const auto p = network_power(active, beams, cfg);
    sol.transmit_power_mw = p.transmit_mw;
    sol.ris_circuit_power_mw = p.ris_circuit_mw;
    sol.network_power_mw = p.network_mw;
    sol.total_power_mw = p.total_mw;
    sol.status = status;
    return sol;
}

struct FeasibilityReport {
    std::vector<double> sinr_margin;  // SINR_k / gamma_k - 1
    double power_margin_mw = 0.0;     // P_max - sum ||w_k||^2
    double modulus_deviation = 0.0;
    bool feasible = false;

    double worst_sinr_margin() const {
        return sinr_margin.empty() ? 0.0 : *std::min_element(sinr_margin.begin(), sinr_margin.end());
    }
};

inline FeasibilityReport check_feasible(const NetworkSolution& sol, const SystemConfig& cfg, const ChannelSet& ch,
                                        double tol = 1e-6) {
    FeasibilityReport r;
    if (sol.beams.w.size() != static_cast<std::size_t>(cfg.K)) {
        r.sinr_margin.assign(static_cast<std::size_t>(cfg.K), -1.0);
        r.power_margin_mw = cfg.p_max_mw;
        return r;
    }
    for (int k = 0; k < cfg.K; ++k)
        r.sinr_margin.push_back(sinr(ch, sol.active, sol.phases, sol.beams, cfg, k) / cfg.gamma[static_cast<std::size_t>(k)] - 1.0);
    r.power_margin_mw = cfg.p_max_mw - sol.beams.transmit_power();
    r.modulus_deviation = sol.phases.modulus_deviation(cfg.rho, sol.active);
    r.feasible = r.worst_sinr_margin() >= -tol && r.power_margin_mw >= -tol && r.modulus_deviation <= tol;
    return r;
}

}  // namespace risgreen
