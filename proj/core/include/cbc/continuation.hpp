#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cbc/dynsys.hpp"
#include "cbc/feedback.hpp"

namespace cbc {

/// A point in the (mu, y) plane.
struct Point2 {
    double mu = 0.0;
    double y = 0.0;
};

struct Prediction {
    double mu_ref = 0.0;
    double y_ref = 0.0;
    Secant secant;
};

/// ref = curr + h (curr - prev) / |curr - prev|. Throws InputError on
/// coincident points ("degenerate secant").
Prediction secant_predict(Point2 prev, Point2 curr, double h);
/// First step: ref = curr + h * direction / |direction|.
Prediction direction_predict(Point2 curr, Point2 direction, double h);

enum class Stability { stable, unstable, unknown };
std::string to_string(Stability s);

enum class LawKind { washout, param, zie };
std::string to_string(LawKind k);

/// Gains in effect when a point was accepted. For washout branches k_st_y
/// holds K_st and k_st_mu holds K_wo.
struct GainSet {
    LawKind law = LawKind::zie;
    double k_st_y = 0.0;
    double k_st_mu = 0.0;
    double a = 0.0;
};

struct BranchPoint {
    double mu = 0.0;
    double y = 0.0;
    Stability stability = Stability::unknown;
    double residual_std = 0.0;
    double mu_std = 0.0;
    GainSet gains;
    double time_to_converge = 0.0;  // simulated seconds
    double mu_ref = 0.0;
    double y_ref = 0.0;
    /// Secondary output at acceptance (NaN when the system has none).
    double secondary = std::numeric_limits<double>::quiet_NaN();
};

struct StepFailure {
    std::size_t after_point = 0;  // number of accepted points when it happened
    double mu_ref = 0.0;
    double y_ref = 0.0;
    double h = 0.0;
    std::string reason;
};

struct Branch {
    std::vector<BranchPoint> points;
    std::vector<StepFailure> failures;
    std::string termination;
    State final_state;
};

/// Where a branch run starts: the plant state at `seeds.back()`, one or two
/// accepted points, and the initial direction used when there is only one.
struct BranchStart {
    State state;
    std::vector<Point2> seeds;
    Point2 direction{1.0, 0.0};
};

struct ContinuationOptions {
    double h = 0.1;
    int max_halvings = 3;
    std::size_t max_points = 100;
    /// The branch stops once an accepted point leaves [mu_min, mu_max].
    double mu_min = -std::numeric_limits<double>::infinity();
    double mu_max = std::numeric_limits<double>::infinity();
    RunOptions run;
    /// Receives the closed-loop record of every attempt (accepted or not).
    /// Setting it turns on run.record.
    std::function<void(const Trajectory&)> on_trajectory;
};

struct WashoutOptions {
    WashoutGains gains;  // y_ref and y_wo_ref are ignored, set to 0
    double a = 1.0;
    /// Consecutive failed attempts (with h halved after each) before the
    /// branch segment terminates.
    int max_failures = 3;
};

struct ZieOptions {
    double a = 50.0;
    double k_st_y = kSecantGainY;
    double gain_cap = kSecantGainCap;
    double runaway_radius = 0.2;
    int sigma = 1;
    /// Refuse steps where the system's own linearization at the prediction
    /// fails the ZIE controllability test.
    bool check_controllability = true;
    double rank_tol = kDefaultRankTol;
};

/// Control-based continuation with the washout law: mu is held at the
/// prediction, y_wo starts where u vanishes, stability tag follows sign(K_wo).
Branch cbc_washout_branch(ControlledSystem& sys, const BranchStart& start, const ContinuationOptions& opt,
                          const WashoutOptions& wo);

/// Control-based continuation with the zero-in-equilibrium law (a = 0 is
/// control through the parameter). K_st,mu follows the secant; mu is
/// dynamic. Failed steps are retried from the last accepted state with h
/// halved, up to opt.max_halvings times.
Branch cbc_zie_branch(ControlledSystem& sys, const BranchStart& start, const ContinuationOptions& opt,
                      const ZieOptions& zo);

/// Folds sit where the mu-increments change sign; segments alternate
/// stable/unstable starting from the anchor point, which is known stable.
/// Without an anchor or with fewer than 3 points every tag is unknown.
void classify_stability(std::vector<BranchPoint>& points, std::optional<std::size_t> stable_anchor);

/// Indices of fold points (turning points in mu) along a branch.
std::vector<std::size_t> fold_indices(const std::vector<BranchPoint>& points);

struct SweepSchedule {
    double mu_start = -1.2;
    double mu_end = 1.2;
    double step = 0.1;
    double hold_time = 300.0;

    std::size_t count() const;
    double mu_at(std::size_t k) const;
    SweepSchedule reversed() const { return {mu_end, mu_start, step, hold_time}; }
};

struct SweepRow {
    double mu = 0.0;
    double y_end = 0.0;
    double dphi_end = std::numeric_limits<double>::quiet_NaN();
    bool diverged = false;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    State final_state;
    bool diverged = false;
};

/// Quasi-stationary sweep: hold each mu for hold_time, record the output at
/// the end of the hold. The first divergent hold is recorded with its marker
/// and ends the sweep. `on_hold`, when set, receives each hold's record.
SweepResult run_sweep(ControlledSystem& sys, State x0, const SweepSchedule& schedule, const RunOptions& opt,
                      const std::function<void(const Trajectory&)>& on_hold = {});

/// Largest contiguous run of grid values where sign(y_up) != sign(y_down).
struct BistabilityInterval {
    double mu_lo = 0.0;
    double mu_hi = 0.0;
    double width = 0.0;
    bool found = false;
};
BistabilityInterval bistability_interval(const std::vector<SweepRow>& up, const std::vector<SweepRow>& down);

void write_branch_csv(std::ostream& os, const Branch& branch, const std::string& header_comment = {});
void write_sweep_csv(std::ostream& os, const SweepResult& sweep, const std::string& header_comment = {});

}  // namespace cbc
