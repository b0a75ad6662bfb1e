#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <iostream>
#include <sstream>
#include <thread>

#include "cbc/cli/commands.hpp"

using namespace cbc::cli;

namespace {

struct Flags {
    std::string config;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> system;
    std::optional<std::string> law;
    std::optional<double> mu;
    std::optional<double> x;
    bool log_trajectory = false;
    int replicas = 1;
    int jobs = 1;
};

void add_common(CLI::App* sub, Flags& f, bool fan_out) {
    sub->add_option("--config", f.config, "INI file with run settings")->check(CLI::ExistingFile);
    sub->add_option("--set", f.sets, "Override a config key, section.key=value (repeatable)");
    sub->add_option("--seed", f.seed, "Random seed");
    sub->add_option("--out", f.out, "Output directory");
    sub->add_option("--system", f.system, "crowd, fold, pitchfork or slowfast");
    sub->add_option("--law", f.law, "washout, param or zie");
    sub->add_flag("--log-trajectory", f.log_trajectory, "Also write trajectory.csv");
    if (fan_out) {
        sub->add_option("--replicas", f.replicas, "Number of seeds, seed .. seed+N-1, each in out/seed_<n>")
            ->check(CLI::PositiveNumber);
        sub->add_option("--jobs", f.jobs, "Replicas run in parallel")->check(CLI::PositiveNumber);
    }
}

RunConfig resolve(const Flags& f) {
    RunConfig cfg;
    if (!f.config.empty()) load_ini(cfg, f.config);
    for (const auto& s : f.sets) apply_override(cfg, s);
    if (f.seed) cfg.seed = *f.seed;
    if (f.out) cfg.out = *f.out;
    if (f.system) set_value(cfg, "run.system", *f.system);
    if (f.law) set_value(cfg, "control.law", *f.law);
    if (f.log_trajectory) cfg.log_trajectory = true;
    if (f.mu) {
        cfg.check.mu = *f.mu;
        cfg.control.mu_ref = *f.mu;
    }
    if (f.x) {
        cfg.check.x = *f.x;
        cfg.control.y_ref = *f.x;
    }
    validate(cfg);
    return cfg;
}

template <class Run>
int fan_out(const RunConfig& base, const Flags& f, Run run) {
    if (f.replicas == 1) {
        run(base, std::cout);
        return 0;
    }
    const auto n = static_cast<std::size_t>(f.replicas);
    std::vector<std::ostringstream> logs(n);
    std::vector<std::string> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k; (k = next++) < n;) {
            RunConfig cfg = base;
            cfg.seed = base.seed + k;
            cfg.out = (std::filesystem::path(base.out) / ("seed_" + std::to_string(cfg.seed))).string();
            try {
                run(cfg, logs[k]);
            } catch (const std::exception& e) {
                errors[k] = e.what();
            }
        }
    };
    const auto threads = std::min<std::size_t>(static_cast<std::size_t>(f.jobs), n);
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    int rc = 0;
    for (std::size_t k = 0; k < n; ++k) {
        std::cout << "[seed " << base.seed + k << "]\n" << logs[k].str();
        if (!errors[k].empty()) {
            std::cerr << "seed " << base.seed + k << ": " << errors[k] << '\n';
            rc = 1;
        }
    }
    return rc;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Control-based continuation of black-box equilibria"};
    app.require_subcommand(1);
    Flags f;

    auto* sweep = app.add_subcommand("sweep", "Quasi-stationary up and down parameter sweeps");
    add_common(sweep, f, true);
    auto* cbc = app.add_subcommand("cbc", "Control-based continuation of an equilibrium branch");
    add_common(cbc, f, true);
    auto* check = app.add_subcommand("check", "Controllability verdicts at a point");
    add_common(check, f, false);
    check->add_option("--mu", f.mu, "Parameter value");
    check->add_option("--x", f.x, "State value");
    auto* stab = app.add_subcommand("stabilize", "Stabilize one point at fixed references");
    add_common(stab, f, true);
    stab->add_option("--mu", f.mu, "Parameter reference");
    stab->add_option("--x", f.x, "Output reference");

    CLI11_PARSE(app, argc, argv);

    RunConfig cfg;
    try {
        cfg = resolve(f);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (check->parsed()) return cmd_check(cfg, std::cout);
        if (sweep->parsed()) return fan_out(cfg, f, [](const RunConfig& c, std::ostream& os) { cmd_sweep(c, os); });
        if (cbc->parsed()) return fan_out(cfg, f, [](const RunConfig& c, std::ostream& os) { cmd_cbc(c, os); });
        if (stab->parsed()) {
            int rc = 0;
            const int fo = fan_out(cfg, f, [&rc](const RunConfig& c, std::ostream& os) {
                if (!cmd_stabilize(c, os).converged()) rc = 1;
            });
            return std::max(rc, fo);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
