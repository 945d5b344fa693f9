// risgreen: scenario checks, Monte Carlo sweeps and a one-shot demo.
//
// Exit codes: 0 success, 1 configuration error, 2 every trial infeasible,
// 3 internal numerical failure.

#include "risgreen/risgreen.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <iostream>

namespace {

constexpr int kConfigError = 1;
constexpr int kAllInfeasible = 2;
constexpr int kNumerical = 3;

risgreen::ConfigReport load(const std::string& path) {
    if (path.empty()) return risgreen::parse_config_text("");
    return risgreen::validate_config(path);
}

void print_solution(const char* name, const risgreen::OptimizeResult& r) {
    const auto& s = r.solution;
    std::printf("%-11s status=%s", name, risgreen::to_string(s.status));
    if (s.status == risgreen::SolveStatus::solved) {
        std::printf(" network=%.3f mW (transmit %.3f mW, RIS circuit %.1f mW) total=%.3f mW active=",
                    s.network_power_mw, s.transmit_power_mw, s.ris_circuit_power_mw, s.total_power_mw);
        for (int l = 0; l < s.active.size(); ++l) std::printf("%d", s.active[l] ? 1 : 0);
    }
    if (!r.trace.termination.empty()) std::printf(" [%s]", r.trace.termination.c_str());
    std::printf("\n");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Joint beamforming and RIS selection for network power minimization"};
    app.require_subcommand(1);

    std::string config_path;
    auto* check = app.add_subcommand("check-config", "Parse a scenario file and report defaulted fields");
    check->add_option("--config", config_path, "Scenario JSON file")->required();

    risgreen::ExperimentSpec spec;
    std::string sweep = "K", feasibility = "resolve";
    std::vector<std::string> methods{"proposed", "all_active", "exhaustive"};
    std::string out_dir;
    auto* run = app.add_subcommand("run", "Monte Carlo sweep; writes results.csv and results.json");
    run->add_option("--config", config_path, "Scenario JSON file (defaults when omitted)");
    run->add_option("--sweep", sweep, "Sweep variable: K, M or rate")->capture_default_str();
    run->add_option("--values", spec.values, "Comma-separated sweep values")->delimiter(',')->required();
    run->add_option("--methods", methods, "Comma-separated subset of proposed,all_active,exhaustive")
        ->delimiter(',')
        ->capture_default_str();
    run->add_option("--trials", spec.trials, "Trials per sweep value")->capture_default_str();
    run->add_option("--seed", spec.seed, "Master seed")->capture_default_str();
    run->add_option("--out", out_dir, "Output directory (default: $RISGREEN_OUT_DIR, else ./results)");
    run->add_option("--threads", spec.threads, "Worker threads")->capture_default_str();
    run->add_option("--epsilon", spec.options.epsilon_mw, "Stop when the decrease is below this (mW)")
        ->capture_default_str();
    run->add_option("--max-iter", spec.options.max_iter, "Alternation iteration cap")->capture_default_str();
    run->add_option("--samples", spec.options.samples, "Gaussian randomization samples")->capture_default_str();
    run->add_option("--feasibility", feasibility, "Bisection probe test: resolve or evaluate")
        ->check(CLI::IsMember({"resolve", "evaluate"}))
        ->capture_default_str();
    run->add_flag("--random-init", spec.options.random_init, "Random initial phases");
    run->add_flag("--fix-users", spec.fix_users, "Use one user drop for every trial");
    run->add_flag("--force-exhaustive", spec.force_exhaustive, "Run exhaustive search even when L > 8");

    std::uint64_t demo_seed = 1;
    bool demo_exhaustive = false;
    auto* demo = app.add_subcommand("demo", "Default scenario once, with the power breakdown");
    demo->add_option("--config", config_path, "Scenario JSON file (defaults when omitted)");
    demo->add_option("--seed", demo_seed, "Seed")->capture_default_str();
    demo->add_flag("--exhaustive", demo_exhaustive, "Also run exhaustive search");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    try {
        if (*check) {
            const auto r = load(config_path);
            std::cout << "ok: " << config_path << '\n';
            for (const auto& f : r.defaulted) std::cout << "  default: " << f << '\n';
            std::cout << risgreen::to_json(r.config).dump(2) << '\n';
            return 0;
        }

        if (*run) {
            spec.base = load(config_path).config;
            spec.sweep = risgreen::parse_sweep(sweep);
            spec.methods.clear();
            for (const auto& m : methods) spec.methods.push_back(risgreen::parse_method(m));
            spec.options.mode =
                feasibility == "evaluate" ? risgreen::FeasibilityMode::evaluate : risgreen::FeasibilityMode::resolve;
            if (out_dir.empty()) {
                const char* env = std::getenv("RISGREEN_OUT_DIR");
                out_dir = env && *env ? env : "results";
            }
            const auto res = risgreen::run_experiment(spec);
            for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
            risgreen::write_outputs(out_dir, spec, res);
            for (const auto& s : res.summaries)
                std::printf("%-11s %s=%-6g solved %d/%d  mean network power %.3f mW  mean active %.2f\n",
                            risgreen::to_string(s.method), risgreen::to_string(spec.sweep), s.value, s.solved,
                            s.trials, s.mean_network_power_mw, s.mean_active_count);
            std::printf("wrote %s/results.csv and results.json\n", out_dir.c_str());
            if (res.any_failed()) return kNumerical;
            if (!res.any_solved()) return kAllInfeasible;
            return 0;
        }

        if (*demo) {
            const auto cfg = load(config_path).config;
            const auto geo = risgreen::place_users(cfg, demo_seed);
            const auto ch = risgreen::generate_channels(cfg, geo, demo_seed);
            std::printf("M=%d K=%d L=%d Nhat=%d seed=%llu\n", cfg.M, cfg.K, cfg.L, cfg.total_elements(),
                        static_cast<unsigned long long>(demo_seed));
            const auto p = risgreen::alternating_optimize(ch, cfg, {}, demo_seed);
            print_solution("proposed", p);
            for (std::size_t i = 0; i < p.trace.records.size(); ++i) {
                const auto& r = p.trace.records[i];
                std::printf("  iter %zu: network %.3f mW, active %d, relaxation %.2f mW%s\n", i + 1,
                            r.network_power_mw, r.active_count, r.sdp_objective_mw, r.accepted ? "" : " (rejected)");
            }
            const auto a = risgreen::all_ris_active_baseline(ch, cfg, {}, demo_seed);
            print_solution("all_active", a);
            bool failed = p.solution.status == risgreen::SolveStatus::numerical_failure ||
                          a.solution.status == risgreen::SolveStatus::numerical_failure;
            bool solved = p.solution.status == risgreen::SolveStatus::solved;
            if (demo_exhaustive) {
                risgreen::OptimizeResult e;
                e.solution = risgreen::exhaustive_search_baseline(ch, cfg, {}, demo_seed).solution;
                print_solution("exhaustive", e);
                failed = failed || e.solution.status == risgreen::SolveStatus::numerical_failure;
            }
            if (failed) return kNumerical;
            return solved ? 0 : kAllInfeasible;
        }
    } catch (const risgreen::ConfigError& e) {
        std::cerr << "config error at " << e.path << ": " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumerical;
    }
    return 0;
}
