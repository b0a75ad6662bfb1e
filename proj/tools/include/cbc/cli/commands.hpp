#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>

#include "cbc/cli/config.hpp"
#include "cbc/continuation.hpp"
#include "cbc/dynsys.hpp"

namespace cbc::cli {

/// The system selected by cfg.system. `placement_mu` positions the crowd's
/// initial pedestrians around the obstacle and is ignored elsewhere.
std::unique_ptr<ControlledSystem> make_system(const RunConfig& cfg, double placement_mu);

/// Integration and stationarity settings. For the crowd, mu is additionally
/// confined to positions where the obstacle fits between the walls.
RunOptions run_options(const RunConfig& cfg, const ControlledSystem& sys);

/// `config_hash=<hex> seed=<n> system=<name> law=<law>`; the first line of
/// every output file (as a `#` comment).
std::string header_line(const RunConfig& cfg);

/// manifest.json with the command, the resolved config and its hash.
void write_manifest(const RunConfig& cfg, const std::string& command, const std::filesystem::path& dir);

struct SweepOutcome {
    SweepResult up;
    SweepResult down;
    BistabilityInterval interval;
};

/// Up-sweep then down-sweep from the up-sweep's final state; writes
/// sweep_up.csv and sweep_down.csv. A down-sweep after a divergent up-sweep
/// starts from a fresh initial state at sweep.mu_end.
SweepOutcome cmd_sweep(const RunConfig& cfg, std::ostream& log);

/// Settles the anchors, then runs continuation with control.law; writes
/// branch.csv and failures.csv.
Branch cmd_cbc(const RunConfig& cfg, std::ostream& log);

/// Finite-difference linearization at (check.x, check.mu) and the verdicts of
/// the three laws. Returns the process exit code. Not available for the crowd.
int cmd_check(const RunConfig& cfg, std::ostream& out);

/// Single closed-loop run at the fixed references (control.mu_ref,
/// control.y_ref); writes stabilize.csv.
RunResult cmd_stabilize(const RunConfig& cfg, std::ostream& log);

}  // namespace cbc::cli
