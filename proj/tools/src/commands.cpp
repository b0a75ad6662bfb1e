#include "cbc/cli/commands.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "cbc/controllability.hpp"
#include "cbc/laws.hpp"
#include "cbc/normalforms.hpp"
#include "cbc/pedsim.hpp"

namespace cbc::cli {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write '" + path.string() + "'");
    return os;
}

fs::path out_dir(const RunConfig& cfg) {
    fs::path dir(cfg.out);
    fs::create_directories(dir);
    return dir;
}

/// Collects closed-loop records as `segment,t,y,mu,u` with t running on
/// across segments.
class TrajectorySink {
public:
    void add(const Trajectory& tr) {
        for (std::size_t i = 0; i < tr.size(); ++i)
            rows_ += std::to_string(segment_) + ',' + num(t0_ + tr.t[i]) + ',' + num(tr.y[i]) + ',' +
                     num(tr.mu[i]) + ',' + num(tr.u[i]) + '\n';
        if (tr.size() > 0) t0_ += tr.t.back();
        ++segment_;
    }
    void write(const fs::path& path, const std::string& header) const {
        auto os = open_out(path);
        os << "# " << header << '\n' << "segment,t,y,mu,u\n" << rows_;
    }

private:
    std::string rows_;
    std::size_t segment_ = 0;
    double t0_ = 0.0;
};

std::vector<double> default_anchors(const std::string& system) {
    if (system == "crowd") return {0.2, 0.3};
    if (system == "pitchfork") return {-0.5};
    return {1.0};
}

}  // namespace

std::unique_ptr<ControlledSystem> make_system(const RunConfig& cfg, double placement_mu) {
    if (cfg.system == "crowd")
        return std::make_unique<ped::CrowdSystem>(cfg.model, cfg.flux, cfg.input, cfg.seed, cfg.dt > 0.0 ? cfg.dt : 0.1,
                                                  placement_mu);
    if (cfg.system == "fold") return std::make_unique<FoldSystem>(cfg.fold.x0, cfg.fold.noise, cfg.seed);
    if (cfg.system == "pitchfork") return std::make_unique<PitchforkSystem>(cfg.pitchfork.a_wo, cfg.pitchfork.x0);
    if (cfg.system == "slowfast")
        return std::make_unique<SlowFastSystem>(cfg.slowfast.eps, cfg.slowfast.x0, cfg.slowfast.noise, cfg.seed);
    throw ConfigError("invalid value for 'run.system': '" + cfg.system + "'");
}

RunOptions run_options(const RunConfig& cfg, const ControlledSystem& sys) {
    RunOptions o;
    o.dt = cfg.dt > 0.0 ? cfg.dt : sys.recommended_dt();
    o.max_time = cfg.max_time;
    o.n_min = static_cast<std::size_t>(cfg.n_min);
    const double noise = cfg.system == "fold" ? cfg.fold.noise : cfg.system == "slowfast" ? cfg.slowfast.noise : 0.0;
    const bool crowd = cfg.system == "crowd";
    o.tol_std = cfg.tol_std;
    if (o.tol_std == 0.0) o.tol_std = crowd || noise > 0.0 ? 0.05 : 1e-6;
    // mu has no measurement noise of its own, so its window spread is mostly
    // slow drift. The crowd's mu integrates large flux fluctuations.
    o.tol_std_mu = cfg.tol_std_mu;
    if (o.tol_std_mu == 0.0) o.tol_std_mu = crowd ? 0.02 : std::min(o.tol_std, 1e-3);
    o.divergence_bound = cfg.divergence_bound;
    if (cfg.system == "crowd") {
        const double room = 0.5 * (cfg.model.corridor_width - cfg.model.base_length);
        o.mu_min = -room;
        o.mu_max = room;
    }
    return o;
}

std::string header_line(const RunConfig& cfg) {
    return "config_hash=" + hash_hex(config_hash(cfg)) + " seed=" + std::to_string(cfg.seed) +
           " system=" + cfg.system + " law=" + to_string(cfg.control.law);
}

void write_manifest(const RunConfig& cfg, const std::string& command, const fs::path& dir) {
    nlohmann::ordered_json j;
    const std::string hash = hash_hex(config_hash(cfg));
    j["command"] = command;
    j["system"] = cfg.system;
    j["law"] = to_string(cfg.control.law);
    j["seed"] = cfg.seed;
    j["config_hash"] = hash;
    j["version"] = "cbc/0.1.0+cfg." + hash;
    nlohmann::ordered_json c;
    for (const auto& [k, v] : dump(cfg))
        if (k != "run.out") c[k] = v;
    j["config"] = c;
    auto os = open_out(dir / "manifest.json");
    os << j.dump(2) << '\n';
}

SweepOutcome cmd_sweep(const RunConfig& cfg, std::ostream& log) {
    validate(cfg);
    const fs::path dir = out_dir(cfg);
    const std::string header = header_line(cfg);
    auto sys = make_system(cfg, cfg.sweep.mu_start);
    const RunOptions opt = run_options(cfg, *sys);
    TrajectorySink sink;
    std::function<void(const Trajectory&)> on_hold;
    if (cfg.log_trajectory) on_hold = [&sink](const Trajectory& t) { sink.add(t); };

    SweepOutcome res;
    res.up = run_sweep(*sys, sys->initial_state(), cfg.sweep, opt, on_hold);
    State start = res.up.final_state;
    if (res.up.diverged) {
        log << "up-sweep diverged at mu = " << num(res.up.rows.back().mu)
            << "; down-sweep starts from a fresh state\n";
        sys = make_system(cfg, cfg.sweep.mu_end);
        start = sys->initial_state();
    }
    res.down = run_sweep(*sys, std::move(start), cfg.sweep.reversed(), opt, on_hold);
    res.interval = bistability_interval(res.up.rows, res.down.rows);

    auto up = open_out(dir / "sweep_up.csv");
    write_sweep_csv(up, res.up, header);
    auto down = open_out(dir / "sweep_down.csv");
    write_sweep_csv(down, res.down, header);
    if (cfg.log_trajectory) sink.write(dir / "trajectory.csv", header);
    write_manifest(cfg, "sweep", dir);

    if (res.interval.found)
        log << "bistability interval [" << num(res.interval.mu_lo) << ", " << num(res.interval.mu_hi)
            << "], width " << num(res.interval.width) << '\n';
    else
        log << "no bistability interval\n";
    return res;
}

Branch cmd_cbc(const RunConfig& cfg, std::ostream& log) {
    validate(cfg);
    const fs::path dir = out_dir(cfg);
    const std::string header = header_line(cfg);
    const auto& cc = cfg.continuation;
    const std::vector<double> anchors = cc.anchors.empty() ? default_anchors(cfg.system) : cc.anchors;
    const bool crowd = cfg.system == "crowd";
    const bool washout = cfg.control.law == LawKind::washout;

    auto sys = make_system(cfg, crowd ? cc.settle_from : anchors.front());
    const RunOptions opt = run_options(cfg, *sys);
    TrajectorySink sink;

    // Anchors: open-loop equilibria (or washout-stabilized ones when the law
    // is washout). The crowd walks there by a sweep first.
    State state = sys->initial_state();
    double mu_prev = cc.settle_from;
    std::vector<Point2> seeds;
    for (double mu : anchors) {
        if (crowd) {
            const SweepSchedule walk{mu_prev, mu, cfg.sweep.step, cc.settle_time};
            SweepResult sw;
            if (mu >= mu_prev) sw = run_sweep(*sys, std::move(state), walk, opt);
            else sw = run_sweep(*sys, std::move(state), SweepSchedule{mu, mu_prev, cfg.sweep.step, cc.settle_time}.reversed(), opt);
            if (sw.diverged) throw std::runtime_error("walking to anchor mu = " + num(mu) + " diverged");
            state = std::move(sw.final_state);
            mu_prev = mu;
        }
        RunResult r;
        if (washout) {
            WashoutLaw law({cfg.control.k_st, cfg.control.k_wo, 0.0, 0.0}, cfg.control.a_washout, 0.0);
            r = run_until_stationary(*sys, law, std::move(state), mu, opt);
        } else {
            OpenLoop law;
            r = run_until_stationary(*sys, law, std::move(state), mu, opt);
        }
        if (!r.converged())
            throw std::runtime_error("anchor at mu = " + num(mu) + " did not settle: " + to_string(r.status) +
                                     (r.diagnostic.empty() ? "" : " (" + r.diagnostic + ")"));
        log << "anchor mu = " << num(mu) << "  y = " << num(r.y_mean) << '\n';
        seeds.push_back({mu, r.y_mean});
        state = std::move(r.state);
    }

    ContinuationOptions co;
    co.h = cc.h;
    co.max_halvings = cc.max_halvings;
    co.max_points = static_cast<std::size_t>(cc.max_points);
    co.mu_min = cc.mu_min;
    co.mu_max = cc.mu_max;
    co.run = opt;
    if (cfg.log_trajectory) co.on_trajectory = [&sink](const Trajectory& t) { sink.add(t); };
    const BranchStart start{std::move(state), seeds, {cc.direction_mu, cc.direction_y}};

    Branch br;
    if (washout) {
        WashoutOptions wo;
        wo.gains = {cfg.control.k_st, cfg.control.k_wo, 0.0, 0.0};
        wo.a = cfg.control.a_washout;
        wo.max_failures = cc.max_failures;
        br = cbc_washout_branch(*sys, start, co, wo);
    } else {
        ZieOptions zo;
        zo.a = cfg.control.law == LawKind::param ? 0.0 : cfg.control.a_zie;
        zo.k_st_y = cfg.control.k_st_y;
        zo.gain_cap = cfg.control.gain_cap;
        zo.runaway_radius = cfg.control.runaway_radius;
        zo.sigma = cfg.control.sigma;
        zo.check_controllability = cfg.control.check_controllability;
        br = cbc_zie_branch(*sys, start, co, zo);
    }

    auto os = open_out(dir / "branch.csv");
    write_branch_csv(os, br, header);
    auto fo = open_out(dir / "failures.csv");
    fo << "# " << header << '\n' << "after_point,mu_ref,y_ref,h,reason\n";
    for (const auto& f : br.failures)
        fo << f.after_point << ',' << num(f.mu_ref) << ',' << num(f.y_ref) << ',' << num(f.h) << ",\"" << f.reason
           << "\"\n";
    if (cfg.log_trajectory) sink.write(dir / "trajectory.csv", header);
    write_manifest(cfg, "cbc", dir);
    log << br.points.size() << " points, " << br.failures.size() << " failed attempts; " << br.termination << '\n';
    return br;
}

int cmd_check(const RunConfig& cfg, std::ostream& out) {
    validate(cfg);
    if (cfg.system == "crowd") {
        out << "check: the crowd has no low-dimensional state to linearize; use fold, pitchfork or slowfast\n";
        return 2;
    }
    auto sys = make_system(cfg, cfg.check.mu);
    State x(sys->state_dim(), 0.0);
    x[0] = cfg.check.x;
    if (cfg.system == "slowfast") x[1] = cfg.check.x;  // fast variable slaved to x
    const Linearization lin = finite_difference_linearization(*sys, x, cfg.check.mu, cfg.check.fd_step);
    const ControllabilityReport rep = check_all(lin);
    auto verdict = [](bool ok) { return ok ? "controllable" : "NOT controllable"; };
    out << "system: " << cfg.system << "  mu = " << num(cfg.check.mu) << "  x = " << num(cfg.check.x) << '\n';
    out << "linearization: central finite differences, relative step " << num(cfg.check.fd_step) << '\n';
    out << "washout: " << verdict(rep.washout) << "; parameter: " << verdict(rep.parameter)
        << "; ZIE: " << verdict(rep.zie) << '\n';
    out << "ZIE at a = " << num(cfg.control.a_zie) << ": "
        << verdict(zie_controllable(lin.f_x, lin.f_mu, lin.f_u, cfg.control.a_zie)) << '\n';
    out << "pencil: " << (rep.pencil.regular ? "regular" : "singular") << ", sample a = " << num(rep.pencil.sample_a)
        << '\n';
    for (const auto& [lambda, det] : rep.pencil.probe_dets)
        out << "  det at " << num(lambda) << " = " << num(det) << '\n';
    return 0;
}

RunResult cmd_stabilize(const RunConfig& cfg, std::ostream& log) {
    validate(cfg);
    const fs::path dir = out_dir(cfg);
    const std::string header = header_line(cfg);
    const auto& c = cfg.control;
    auto sys = make_system(cfg, c.mu_ref);
    RunOptions opt = run_options(cfg, *sys);
    opt.record = cfg.log_trajectory;
    State x0 = sys->initial_state();
    if (cfg.system == "crowd") {
        RunResult pre = hold(*sys, std::move(x0), c.mu_ref, cfg.continuation.settle_time, opt);
        if (pre.status == RunStatus::diverged) throw std::runtime_error("warm-up hold diverged");
        x0 = std::move(pre.state);
    }
    RunResult r;
    if (c.law == LawKind::washout) {
        WashoutLaw law({c.k_st, c.k_wo, 0.0, 0.0}, c.a_washout, -c.y_ref * c.k_st / c.k_wo);
        r = run_until_stationary(*sys, law, std::move(x0), c.mu_ref, opt);
    } else {
        const double a = c.law == LawKind::param ? 0.0 : c.a_zie;
        ZieLaw law({a, c.k_st_y, c.k_st_mu, c.y_ref, c.mu_ref}, c.runaway_radius);
        r = run_until_stationary(*sys, law, std::move(x0), c.mu_ref, opt);
    }
    auto os = open_out(dir / "stabilize.csv");
    os << "# " << header << '\n' << "status,mu,y,residual_std,mu_std,u_last,elapsed\n";
    os << to_string(r.status) << ',' << num(r.mu_mean) << ',' << num(r.y_mean) << ',' << num(r.y_std) << ','
       << num(r.mu_std) << ',' << num(r.u_last) << ',' << num(r.elapsed) << '\n';
    if (cfg.log_trajectory) {
        TrajectorySink sink;
        sink.add(r.trajectory);
        sink.write(dir / "trajectory.csv", header);
    }
    write_manifest(cfg, "stabilize", dir);
    log << to_string(r.status) << ": mu = " << num(r.mu_mean) << "  y = " << num(r.y_mean);
    if (!r.diagnostic.empty()) log << "  (" << r.diagnostic << ')';
    log << '\n';
    return r;
}

}  // namespace cbc::cli
