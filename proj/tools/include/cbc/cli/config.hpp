#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbc/continuation.hpp"
#include "cbc/pedsim.hpp"

namespace cbc::cli {

/// Bad config file, unknown key or unparsable value. The message names the
/// offending key.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct FoldConfig {
    double x0 = 1.0;
    double noise = 0.0;
};

struct PitchforkConfig {
    double a_wo = 1.0;
    double x0 = 0.0;
};

struct SlowFastConfig {
    double eps = 0.01;
    double x0 = 1.0;
    double noise = 0.0;
};

struct ControlConfig {
    LawKind law = LawKind::zie;
    double a_zie = 50.0;
    double a_washout = 1.0;
    double k_st = -5.0;
    double k_wo = 0.1;
    double k_st_y = kSecantGainY;
    double k_st_mu = 0.0;  // stabilize only; continuation derives it from the secant
    double gain_cap = kSecantGainCap;
    double runaway_radius = 0.2;
    int sigma = -1;
    double y_ref = 0.0;
    double mu_ref = 0.0;
    bool check_controllability = true;
};

struct BranchConfig {
    double h = 0.1;
    int max_halvings = 3;
    int max_points = 100;
    int max_failures = 3;
    double mu_min = -1.2;
    double mu_max = 1.2;
    /// Parameter values settled before continuing; empty means the system default.
    std::vector<double> anchors;
    double direction_mu = -1.0;
    double direction_y = 0.0;
    /// Crowd only: the anchors are reached by a sweep from here.
    double settle_from = -1.2;
    double settle_time = 100.0;
};

struct CheckConfig {
    double mu = 0.0;
    double x = 0.0;
    double fd_step = 1e-4;
};

struct RunConfig {
    std::string system = "crowd";
    std::uint64_t seed = 1;
    std::string out = "out";
    double dt = 0.0;  // 0: the system's own step
    double max_time = 600.0;
    int n_min = 200;
    /// 0: 0.05 for the crowd and noisy normal forms, 1e-6 for noise-free ones.
    double tol_std = 0.0;
    double tol_std_mu = 0.0;  // 0: 0.02 for the crowd, else min(tol_std, 1e-3)
    double divergence_bound = 1e6;
    bool log_trajectory = false;

    ped::PedParams model;
    ped::FluxParams flux;
    ped::InputBox input;
    FoldConfig fold;
    PitchforkConfig pitchfork;
    SlowFastConfig slowfast;
    SweepSchedule sweep;
    ControlConfig control;
    BranchConfig continuation;
    CheckConfig check;
};

/// Sets `section.key` from its text form. Throws ConfigError for unknown keys
/// and bad values.
void set_value(RunConfig& cfg, const std::string& dotted_key, const std::string& value);

/// Reads an INI file (`;` comments, `[section]` headers) on top of `cfg`.
void load_ini(RunConfig& cfg, const std::string& path);

/// Applies `section.key=value`.
void apply_override(RunConfig& cfg, const std::string& assignment);

/// Checks ranges and cross-field consistency.
void validate(const RunConfig& cfg);

/// Every known key with its current value, in registry order.
std::vector<std::pair<std::string, std::string>> dump(const RunConfig& cfg);

/// All keys the registry knows.
std::vector<std::string> known_keys();

/// FNV-1a over the canonical dump, leaving out run.seed and run.out so that
/// replicas of one experiment share a hash.
std::uint64_t config_hash(const RunConfig& cfg);
std::string hash_hex(std::uint64_t h);

}  // namespace cbc::cli
