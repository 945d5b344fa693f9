#pragma once

// Scenario files, Monte Carlo sweeps and CSV / JSON metadata output.
//
// Scenario file: a JSON object. Every key is optional.
//
//   M, K, L            integers
//   N                  integer or list of L integers (elements per RIS)
//   eta                drain efficiency in (0, 1]
//   P_max, P_BS, P_RE  power: number in mW or string "<x> dBm" / "<x> mW"
//   sigma2             noise power, same forms as above; scalar or list of K
//   rho                amplitude reflection coefficient; scalar or list of L
//   gamma | rate       SINR target (linear or "<x> dB") or rate in bit/s/Hz;
//                      scalar or list of K; at most one of the two
//   geometry           {bs: [x,y,z], ris: [[x,y,z], ...], user_min: [...], user_max: [...]}
//   pathloss           {alpha_br, alpha_ru, alpha_bu, intercept_db (number or "<x> dB")}
//
// CSV columns, in order:
//   method,sweep,value,trial,seed,status,termination,network_power_mw,
//   transmit_power_mw,ris_power_mw,active_count,iterations,verified,wall_time_ms

#include "risgreen/channel.hpp"
#include "risgreen/model.hpp"
#include "risgreen/orchestrate.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace risgreen {

using json = nlohmann::json;

#ifdef RISGREEN_VERSION
inline constexpr const char* artifact_version = RISGREEN_VERSION;
#else
inline constexpr const char* artifact_version = "0.1.0";
#endif

/// Parses "<x> dBm", "<x> mW", "<x> dB" and plain numbers. A leading U+2212
/// minus sign is accepted.
struct Quantity {
    double value = 0.0;
    std::string unit;  // "", "dBm", "mW" or "dB"
};

inline Quantity parse_quantity(std::string s, const std::string& path) {
    const std::string uminus = "\xE2\x88\x92";
    for (auto pos = s.find(uminus); pos != std::string::npos; pos = s.find(uminus)) s.replace(pos, uminus.size(), "-");
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ConfigError(path, "cannot parse number from \"" + s + "\"");
    }
    std::string unit = s.substr(used);
    unit.erase(0, unit.find_first_not_of(" \t"));
    unit.erase(unit.find_last_not_of(" \t") + 1);
    if (unit != "" && unit != "dBm" && unit != "mW" && unit != "dB")
        throw ConfigError(path, "unknown unit \"" + unit + "\"");
    return {v, unit};
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

namespace detail {

inline double power_mw(const json& j, const std::string& path) {
    if (j.is_number()) return j.get<double>();
    if (!j.is_string()) throw ConfigError(path, "expected a number (mW) or a string such as \"-40 dBm\"");
    const auto q = parse_quantity(j.get<std::string>(), path);
    if (q.unit == "dBm") return db_to_linear(q.value);
    if (q.unit == "mW" || q.unit.empty()) return q.value;
    throw ConfigError(path, "power needs dBm or mW, got " + q.unit);
}

inline double ratio_linear(const json& j, const std::string& path) {
    if (j.is_number()) return j.get<double>();
    if (!j.is_string()) throw ConfigError(path, "expected a number or a string such as \"3 dB\"");
    const auto q = parse_quantity(j.get<std::string>(), path);
    if (q.unit == "dB") return db_to_linear(q.value);
    if (q.unit.empty()) return q.value;
    throw ConfigError(path, "ratio needs dB, got " + q.unit);
}

inline double decibels(const json& j, const std::string& path) {
    if (j.is_number()) return j.get<double>();
    if (!j.is_string()) throw ConfigError(path, "expected a number or a string such as \"-30 dB\"");
    const auto q = parse_quantity(j.get<std::string>(), path);
    if (q.unit == "dB" || q.unit.empty()) return q.value;
    throw ConfigError(path, "expected dB, got " + q.unit);
}

inline double number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path, "expected a number");
    return j.get<double>();
}

inline int integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
    return j.get<int>();
}

inline Eigen::Vector3d point(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 3) throw ConfigError(path, "expected [x, y, z]");
    Eigen::Vector3d p;
    for (int a = 0; a < 3; ++a) p(a) = number(j[static_cast<std::size_t>(a)], path + "[" + std::to_string(a) + "]");
    return p;
}

/// Scalar broadcast to `count` entries, or a list that must have exactly `count` entries.
template <typename T, typename F>
std::vector<T> per_item(const json& j, std::size_t count, const std::string& path, F conv) {
    if (!j.is_array()) return std::vector<T>(count, conv(j, path));
    if (j.size() != count)
        throw ConfigError(path, "expected " + std::to_string(count) + " entries, got " + std::to_string(j.size()));
    std::vector<T> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(conv(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

inline void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& prefix) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key())) throw ConfigError(prefix + it.key(), "unknown key");
}

inline json vec3(const Eigen::Vector3d& p) { return json::array({p(0), p(1), p(2)}); }

}  // namespace detail

struct ConfigReport {
    SystemConfig config;
    std::vector<std::string> defaulted;  // fields not present in the file
    double rate_bits = 2.0;              // target rate when gamma was derived from it
    bool gamma_from_rate = true;
};

/// Parses a scenario object, fills defaults and checks every invariant.
inline ConfigReport parse_config(const json& j) {
    if (!j.is_object()) throw ConfigError("$", "scenario must be a JSON object");
    detail::reject_unknown(j, {"M", "K", "L", "N", "eta", "P_max", "P_BS", "P_RE", "sigma2", "rho", "gamma", "rate",
                               "geometry", "pathloss"},
                           "");
    ConfigReport r;
    SystemConfig& c = r.config;
    auto has = [&](const char* key) {
        if (j.contains(key)) return true;
        r.defaulted.emplace_back(key);
        return false;
    };
    if (has("M")) c.M = detail::integer(j["M"], "M");
    if (has("K")) c.K = detail::integer(j["K"], "K");
    if (has("L")) c.L = detail::integer(j["L"], "L");
    if (c.M < 1) throw ConfigError("M", "must be at least 1");
    if (c.K < 1) throw ConfigError("K", "must be at least 1");
    if (c.L < 0) throw ConfigError("L", "must be nonnegative");
    const auto K = static_cast<std::size_t>(c.K);
    const auto L = static_cast<std::size_t>(c.L);

    c.N = has("N") ? detail::per_item<int>(j["N"], L, "N", detail::integer) : std::vector<int>(L, 12);
    if (has("eta")) c.eta = detail::number(j["eta"], "eta");
    if (has("P_max")) c.p_max_mw = detail::power_mw(j["P_max"], "P_max");
    if (has("P_BS")) c.p_bs_mw = detail::power_mw(j["P_BS"], "P_BS");
    if (has("P_RE")) c.p_re_mw = detail::power_mw(j["P_RE"], "P_RE");
    c.sigma2_mw = has("sigma2") ? detail::per_item<double>(j["sigma2"], K, "sigma2", detail::power_mw)
                                : std::vector<double>(K, 1e-4);
    c.rho = has("rho") ? detail::per_item<double>(j["rho"], L, "rho", detail::number) : std::vector<double>(L, 1.0);

    const bool g = j.contains("gamma"), rt = j.contains("rate");
    if (g && rt) throw ConfigError("gamma", "give either gamma or rate, not both");
    if (g) {
        r.gamma_from_rate = false;
        c.gamma = detail::per_item<double>(j["gamma"], K, "gamma", detail::ratio_linear);
    } else {
        if (!rt) r.defaulted.emplace_back("rate");
        const auto rates = rt ? detail::per_item<double>(j["rate"], K, "rate", detail::number) : std::vector<double>(K, 2.0);
        c.gamma.clear();
        for (std::size_t k = 0; k < K; ++k) {
            if (!(rates[k] >= 0.0)) throw ConfigError("rate[" + std::to_string(k) + "]", "must be nonnegative");
            c.gamma.push_back(rate_to_sinr(rates[k]));
        }
        r.rate_bits = rates.empty() ? 2.0 : rates.front();
    }

    if (has("geometry")) {
        const auto& gj = j["geometry"];
        if (!gj.is_object()) throw ConfigError("geometry", "expected an object");
        detail::reject_unknown(gj, {"bs", "ris", "user_min", "user_max"}, "geometry.");
        if (gj.contains("bs")) c.geometry.bs = detail::point(gj["bs"], "geometry.bs");
        else r.defaulted.emplace_back("geometry.bs");
        if (gj.contains("ris")) {
            if (!gj["ris"].is_array()) throw ConfigError("geometry.ris", "expected a list of [x, y, z]");
            c.geometry.ris.clear();
            for (std::size_t l = 0; l < gj["ris"].size(); ++l)
                c.geometry.ris.push_back(detail::point(gj["ris"][l], "geometry.ris[" + std::to_string(l) + "]"));
        } else {
            r.defaulted.emplace_back("geometry.ris");
        }
        if (gj.contains("user_min")) c.geometry.user_min = detail::point(gj["user_min"], "geometry.user_min");
        else r.defaulted.emplace_back("geometry.user_min");
        if (gj.contains("user_max")) c.geometry.user_max = detail::point(gj["user_max"], "geometry.user_max");
        else r.defaulted.emplace_back("geometry.user_max");
    }
    if (has("pathloss")) {
        const auto& pj = j["pathloss"];
        if (!pj.is_object()) throw ConfigError("pathloss", "expected an object");
        detail::reject_unknown(pj, {"alpha_br", "alpha_ru", "alpha_bu", "intercept_db"}, "pathloss.");
        auto field = [&](const char* key, double& dst, auto conv) {
            const std::string path = std::string("pathloss.") + key;
            if (pj.contains(key)) dst = conv(pj[key], path);
            else r.defaulted.push_back(path);
        };
        field("alpha_br", c.pathloss.alpha_br, detail::number);
        field("alpha_ru", c.pathloss.alpha_ru, detail::number);
        field("alpha_bu", c.pathloss.alpha_bu, detail::number);
        field("intercept_db", c.pathloss.intercept_db, detail::decibels);
    }
    c.validate();
    return r;
}

inline ConfigReport parse_config_text(const std::string& text) {
    json j;
    try {
        j = text.find_first_not_of(" \t\r\n") == std::string::npos ? json::object() : json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("$", std::string("invalid JSON: ") + e.what());
    }
    return parse_config(j);
}

/// Reads, parses and validates a scenario file.
inline ConfigReport validate_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("$", "cannot read " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

inline json to_json(const SystemConfig& c) {
    json ris = json::array();
    for (const auto& p : c.geometry.ris) ris.push_back(detail::vec3(p));
    return {{"M", c.M},
            {"K", c.K},
            {"L", c.L},
            {"N", c.N},
            {"eta", c.eta},
            {"P_max", c.p_max_mw},
            {"P_BS", c.p_bs_mw},
            {"P_RE", c.p_re_mw},
            {"sigma2", c.sigma2_mw},
            {"rho", c.rho},
            {"gamma", c.gamma},
            {"geometry",
             {{"bs", detail::vec3(c.geometry.bs)},
              {"ris", ris},
              {"user_min", detail::vec3(c.geometry.user_min)},
              {"user_max", detail::vec3(c.geometry.user_max)}}},
            {"pathloss",
             {{"alpha_br", c.pathloss.alpha_br},
              {"alpha_ru", c.pathloss.alpha_ru},
              {"alpha_bu", c.pathloss.alpha_bu},
              {"intercept_db", c.pathloss.intercept_db}}}};
}

enum class Method { proposed, all_active, exhaustive };

inline const char* to_string(Method m) {
    switch (m) {
        case Method::proposed: return "proposed";
        case Method::all_active: return "all_active";
        case Method::exhaustive: return "exhaustive";
    }
    return "?";
}

inline Method parse_method(const std::string& s) {
    if (s == "proposed") return Method::proposed;
    if (s == "all_active" || s == "all-active") return Method::all_active;
    if (s == "exhaustive") return Method::exhaustive;
    throw ConfigError("methods", "unknown method \"" + s + "\"");
}

enum class SweepVar { K, M, rate };

inline const char* to_string(SweepVar v) {
    switch (v) {
        case SweepVar::K: return "K";
        case SweepVar::M: return "M";
        case SweepVar::rate: return "rate";
    }
    return "?";
}

inline SweepVar parse_sweep(const std::string& s) {
    if (s == "K") return SweepVar::K;
    if (s == "M") return SweepVar::M;
    if (s == "rate" || s == "R") return SweepVar::rate;
    throw ConfigError("sweep", "unknown sweep variable \"" + s + "\" (K, M or rate)");
}

struct ExperimentSpec {
    SystemConfig base;
    SweepVar sweep = SweepVar::K;
    std::vector<double> values;
    std::vector<Method> methods{Method::proposed, Method::all_active, Method::exhaustive};
    int trials = 20;
    std::uint64_t seed = 1;
    bool fix_users = false;  // one user drop for every trial
    bool force_exhaustive = false;
    int threads = 1;
    AlternationOptions options{};

    void validate() const {
        base.validate();
        if (values.empty()) throw ConfigError("values", "at least one sweep value is required");
        for (std::size_t i = 1; i < values.size(); ++i)
            if (!(values[i] > values[i - 1])) throw ConfigError("values", "sweep values must be strictly increasing");
        for (double v : values) {
            if (sweep != SweepVar::rate && (v < 1.0 || v != std::floor(v)))
                throw ConfigError("values", std::string(to_string(sweep)) + " values must be positive integers");
            if (sweep == SweepVar::rate && !(v > 0.0)) throw ConfigError("values", "rates must be positive");
        }
        if (methods.empty()) throw ConfigError("methods", "at least one method is required");
        if (trials < 1) throw ConfigError("trials", "must be at least 1");
        if (threads < 1) throw ConfigError("threads", "must be at least 1");
    }
};

/// Base configuration with the sweep variable set. Per-user lists must be
/// uniform when K changes.
inline SystemConfig apply_sweep(const SystemConfig& base, SweepVar var, double value) {
    SystemConfig c = base;
    switch (var) {
        case SweepVar::M: c.M = static_cast<int>(value); break;
        case SweepVar::rate: std::fill(c.gamma.begin(), c.gamma.end(), rate_to_sinr(value)); break;
        case SweepVar::K: {
            auto uniform = [](const std::vector<double>& v) {
                return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
            };
            if (!uniform(c.gamma) || !uniform(c.sigma2_mw))
                throw ConfigError("K", "sweeping K needs the same gamma and sigma2 for every user");
            c.K = static_cast<int>(value);
            c.gamma.assign(static_cast<std::size_t>(c.K), base.gamma.front());
            c.sigma2_mw.assign(static_cast<std::size_t>(c.K), base.sigma2_mw.front());
            break;
        }
    }
    c.validate();
    return c;
}

struct ResultRow {
    Method method = Method::proposed;
    double value = 0.0;
    int trial = 0;
    std::uint64_t seed = 0;
    SolveStatus status = SolveStatus::infeasible;
    std::string termination;
    double network_power_mw = 0.0;
    double transmit_power_mw = 0.0;
    double ris_power_mw = 0.0;
    int active_count = 0;
    int iterations = 0;
    bool verified = false;  // passed check_feasible at 1e-6
    double wall_time_ms = 0.0;
};

struct PointSummary {
    Method method = Method::proposed;
    double value = 0.0;
    int trials = 0;
    int solved = 0;
    int infeasible = 0;
    int failed = 0;
    double mean_network_power_mw = 0.0;  // over solved trials
    double mean_transmit_power_mw = 0.0;
    double mean_active_count = 0.0;
};

/// Everything a method produced for one cell; handed to the observer.
struct TrialContext {
    Method method;
    double value;
    int trial;
    const SystemConfig& config;
    const ChannelSet& channels;
    const OptimizeResult& result;
};

struct ExperimentResult {
    std::vector<ResultRow> rows;
    std::vector<PointSummary> summaries;
    std::vector<Method> methods;  // after auto-disabling
    std::vector<std::string> warnings;

    bool any_solved() const {
        return std::any_of(rows.begin(), rows.end(), [](const ResultRow& r) { return r.status == SolveStatus::solved; });
    }
    bool any_failed() const {
        return std::any_of(rows.begin(), rows.end(),
                           [](const ResultRow& r) { return r.status == SolveStatus::numerical_failure; });
    }
    const PointSummary* summary(Method m, double value) const {
        for (const auto& s : summaries)
            if (s.method == m && s.value == value) return &s;
        return nullptr;
    }
};

using TrialObserver = std::function<void(const TrialContext&)>;

/// Seed of one trial; shared by every sweep value so the sweep uses common random numbers.
inline std::uint64_t trial_seed(std::uint64_t master, int trial) {
    return derive_seed(master, {100, static_cast<std::uint64_t>(trial)});
}

inline OptimizeResult run_method(Method m, const ChannelSet& ch, const SystemConfig& cfg, const AlternationOptions& opt,
                                 std::uint64_t seed) {
    switch (m) {
        case Method::proposed: return alternating_optimize(ch, cfg, opt, seed);
        case Method::all_active: return all_ris_active_baseline(ch, cfg, opt, seed);
        case Method::exhaustive: {
            auto ex = exhaustive_search_baseline(ch, cfg, opt, seed);
            OptimizeResult r;
            r.solution = std::move(ex.solution);
            r.trace.status = r.solution.status;
            r.trace.termination = std::to_string(ex.subsets_feasible) + "/" + std::to_string(ex.subsets_evaluated);
            return r;
        }
    }
    throw std::logic_error("unknown method");
}

inline std::vector<PointSummary> summarize(const std::vector<ResultRow>& rows) {
    std::map<std::pair<int, double>, PointSummary> acc;
    for (const auto& r : rows) {
        auto& s = acc[{static_cast<int>(r.method), r.value}];
        s.method = r.method;
        s.value = r.value;
        ++s.trials;
        if (r.status == SolveStatus::solved) {
            ++s.solved;
            s.mean_network_power_mw += r.network_power_mw;
            s.mean_transmit_power_mw += r.transmit_power_mw;
            s.mean_active_count += r.active_count;
        } else if (r.status == SolveStatus::infeasible) {
            ++s.infeasible;
        } else {
            ++s.failed;
        }
    }
    std::vector<PointSummary> out;
    for (auto& [key, s] : acc) {
        if (s.solved > 0) {
            s.mean_network_power_mw /= s.solved;
            s.mean_transmit_power_mw /= s.solved;
            s.mean_active_count /= s.solved;
        }
        out.push_back(s);
    }
    return out;
}

/// Runs every (value, trial) cell; all methods in a cell see the same channels.
inline ExperimentResult run_experiment(const ExperimentSpec& spec, const TrialObserver& observer = {}) {
    spec.validate();
    ExperimentResult res;
    for (Method m : spec.methods) {
        if (std::find(res.methods.begin(), res.methods.end(), m) != res.methods.end()) continue;
        if (m == Method::exhaustive && spec.base.L > 8 && !spec.force_exhaustive) {
            res.warnings.push_back("exhaustive search disabled for L = " + std::to_string(spec.base.L) +
                                   " > 8; force it to run anyway");
            continue;
        }
        res.methods.push_back(m);
    }
    std::vector<SystemConfig> configs;
    for (double v : spec.values) configs.push_back(apply_sweep(spec.base, spec.sweep, v));

    const std::size_t cells = spec.values.size() * static_cast<std::size_t>(spec.trials);
    std::vector<std::vector<ResultRow>> per_cell(cells);
    std::atomic<std::size_t> next{0};
    std::mutex observer_mutex;

    auto work = [&] {
        for (std::size_t cell = next++; cell < cells; cell = next++) {
            const std::size_t vi = cell / static_cast<std::size_t>(spec.trials);
            const int trial = static_cast<int>(cell % static_cast<std::size_t>(spec.trials));
            const SystemConfig& cfg = configs[vi];
            const std::uint64_t seed = trial_seed(spec.seed, trial);
            const auto geo = place_users(cfg, spec.fix_users ? derive_seed(spec.seed, {101}) : seed);
            const auto ch = generate_channels(cfg, geo, seed);
            for (Method m : res.methods) {
                ResultRow row;
                row.method = m;
                row.value = spec.values[vi];
                row.trial = trial;
                row.seed = seed;
                const auto t0 = std::chrono::steady_clock::now();
                OptimizeResult r;
                try {
                    r = run_method(m, ch, cfg, spec.options, seed);
                } catch (const std::exception& e) {
                    r.solution.status = SolveStatus::numerical_failure;
                    r.trace.termination = std::string("exception: ") + e.what();
                }
                row.wall_time_ms =
                    std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
                const auto& sol = r.solution;
                row.status = sol.status;
                row.termination = r.trace.termination;
                if (sol.status == SolveStatus::solved) {
                    row.network_power_mw = sol.network_power_mw;
                    row.transmit_power_mw = sol.transmit_power_mw;
                    row.ris_power_mw = sol.ris_circuit_power_mw;
                    row.active_count = sol.active.count();
                    row.iterations = static_cast<int>(sol.iterations.size()) - 1;
                    row.verified = check_feasible(sol, cfg, ch, 1e-6).feasible;
                }
                if (observer) {
                    std::lock_guard lock(observer_mutex);
                    observer(TrialContext{m, row.value, trial, cfg, ch, r});
                }
                per_cell[cell].push_back(std::move(row));
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for (int t = 1; t < spec.threads; ++t) pool.emplace_back(work);
        work();
    }

    for (auto& c : per_cell)
        for (auto& r : c) res.rows.push_back(std::move(r));
    std::stable_sort(res.rows.begin(), res.rows.end(), [](const ResultRow& a, const ResultRow& b) {
        if (a.method != b.method) return a.method < b.method;
        if (a.value != b.value) return a.value < b.value;
        return a.trial < b.trial;
    });
    res.summaries = summarize(res.rows);
    return res;
}

inline const char* csv_header =
    "method,sweep,value,trial,seed,status,termination,network_power_mw,transmit_power_mw,ris_power_mw,"
    "active_count,iterations,verified,wall_time_ms";

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_csv(std::ostream& os, const ExperimentResult& res, SweepVar sweep) {
    os << csv_header << '\n';
    for (const auto& r : res.rows) {
        os << to_string(r.method) << ',' << to_string(sweep) << ',' << format_double(r.value) << ',' << r.trial << ','
           << r.seed << ',' << to_string(r.status) << ',' << '"' << r.termination << '"' << ','
           << format_double(r.network_power_mw) << ',' << format_double(r.transmit_power_mw) << ','
           << format_double(r.ris_power_mw) << ',' << r.active_count << ',' << r.iterations << ','
           << (r.verified ? 1 : 0) << ',' << format_double(r.wall_time_ms) << '\n';
    }
}

inline json metadata(const ExperimentSpec& spec, const ExperimentResult& res) {
    json methods = json::array();
    for (Method m : res.methods) methods.push_back(to_string(m));
    json summaries = json::array();
    for (const auto& s : res.summaries)
        summaries.push_back({{"method", to_string(s.method)},
                             {"value", s.value},
                             {"trials", s.trials},
                             {"solved", s.solved},
                             {"infeasible", s.infeasible},
                             {"failed", s.failed},
                             {"mean_network_power_mw", s.mean_network_power_mw},
                             {"mean_transmit_power_mw", s.mean_transmit_power_mw},
                             {"mean_active_count", s.mean_active_count}});
    return {{"artifact_version", artifact_version},
            {"rng_algorithm", rng_algorithm},
            {"config", to_json(spec.base)},
            {"sweep", to_string(spec.sweep)},
            {"values", spec.values},
            {"methods", methods},
            {"trials", spec.trials},
            {"seed", spec.seed},
            {"fix_users", spec.fix_users},
            {"options",
             {{"epsilon_mw", spec.options.epsilon_mw},
              {"max_iter", spec.options.max_iter},
              {"samples", spec.options.samples},
              {"random_init", spec.options.random_init},
              {"feasibility", spec.options.mode == FeasibilityMode::resolve ? "resolve" : "evaluate"}}},
            {"columns", csv_header},
            {"warnings", res.warnings},
            {"summaries", summaries}};
}

/// Writes results.csv and results.json into `dir`, creating it if needed.
inline void write_outputs(const std::filesystem::path& dir, const ExperimentSpec& spec, const ExperimentResult& res) {
    std::filesystem::create_directories(dir);
    std::ofstream csv(dir / "results.csv");
    if (!csv) throw std::runtime_error("cannot write " + (dir / "results.csv").string());
    write_csv(csv, res, spec.sweep);
    std::ofstream meta(dir / "results.json");
    if (!meta) throw std::runtime_error("cannot write " + (dir / "results.json").string());
    meta << metadata(spec, res).dump(2) << '\n';
    if (!csv || !meta) throw std::runtime_error("write to " + dir.string() + " failed");
}

}  // namespace risgreen
