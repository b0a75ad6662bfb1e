#include "cbc/continuation.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "cbc/laws.hpp"

namespace cbc {

Prediction secant_predict(Point2 prev, Point2 curr, double h) {
    const double dmu = curr.mu - prev.mu;
    const double dy = curr.y - prev.y;
    const double len = std::hypot(dmu, dy);
    if (len == 0.0) throw InputError("secant_predict: degenerate secant (coincident points)");
    const Secant s{dmu / len, dy / len};
    return {curr.mu + h * s.v_mu, curr.y + h * s.v_y, s};
}

Prediction direction_predict(Point2 curr, Point2 direction, double h) {
    const double len = std::hypot(direction.mu, direction.y);
    if (len == 0.0) throw InputError("direction_predict: zero initial direction");
    const Secant s{direction.mu / len, direction.y / len};
    return {curr.mu + h * s.v_mu, curr.y + h * s.v_y, s};
}

std::string to_string(Stability s) {
    switch (s) {
        case Stability::stable: return "stable";
        case Stability::unstable: return "unstable";
        case Stability::unknown: return "unknown";
    }
    return "unknown";
}

std::string to_string(LawKind k) {
    switch (k) {
        case LawKind::washout: return "washout";
        case LawKind::param: return "param";
        case LawKind::zie: return "zie";
    }
    return "unknown";
}

namespace {

struct Walker {
    Point2 prev{};
    Point2 curr{};
    bool have_prev = false;
    Point2 direction{};

    Prediction predict(double h) const {
        return have_prev ? secant_predict(prev, curr, h) : direction_predict(curr, direction, h);
    }
    void accept(Point2 p) {
        prev = curr;
        curr = p;
        have_prev = true;
    }
};

Walker make_walker(const BranchStart& start) {
    if (start.seeds.empty()) throw InputError("branch start needs at least one seed point");
    Walker w;
    w.curr = start.seeds.back();
    if (start.seeds.size() >= 2) {
        w.prev = start.seeds[start.seeds.size() - 2];
        w.have_prev = true;
    }
    w.direction = start.direction;
    return w;
}

std::string failure_reason(const RunResult& r) {
    std::string s = to_string(r.status);
    if (!r.diagnostic.empty()) s += ": " + r.diagnostic;
    return s;
}

bool outside(double mu, const ContinuationOptions& opt) { return mu < opt.mu_min || mu > opt.mu_max; }

}  // namespace

Branch cbc_washout_branch(ControlledSystem& sys, const BranchStart& start, const ContinuationOptions& opt,
                          const WashoutOptions& wo) {
    if (wo.gains.k_wo == 0.0) throw InputError("cbc_washout_branch: K_wo must be non-zero");
    Walker walk = make_walker(start);
    Branch br;
    State state = start.state;
    RunOptions run_opt = opt.run;
    if (opt.on_trajectory) run_opt.record = true;
    double h = opt.h;
    int failures = 0;
    const Stability tag = wo.gains.k_wo > 0.0 ? Stability::unstable : Stability::stable;
    WashoutGains g = wo.gains;
    g.y_ref = 0.0;
    g.y_wo_ref = 0.0;

    while (true) {
        if (br.points.size() >= opt.max_points) {
            br.termination = "max_points reached";
            break;
        }
        const Prediction pred = walk.predict(h);
        WashoutLaw law(g, wo.a, -pred.y_ref * g.k_st / g.k_wo);
        RunResult r = run_until_stationary(sys, law, state, pred.mu_ref, run_opt);
        if (opt.on_trajectory) opt.on_trajectory(r.trajectory);
        if (!r.converged()) {
            br.failures.push_back({br.points.size(), pred.mu_ref, pred.y_ref, h, failure_reason(r)});
            if (++failures >= wo.max_failures) {
                br.termination = "consecutive failures near mu = " + std::to_string(pred.mu_ref);
                break;
            }
            h *= 0.5;
            continue;
        }
        if (std::hypot(pred.mu_ref - walk.curr.mu, r.y_mean - walk.curr.y) > 2.0 * opt.h) {
            br.failures.push_back({br.points.size(), pred.mu_ref, pred.y_ref, h, "jumped away from the branch"});
            if (++failures >= wo.max_failures) {
                br.termination = "consecutive failures near mu = " + std::to_string(pred.mu_ref);
                break;
            }
            h *= 0.5;
            continue;
        }
        BranchPoint p;
        p.mu = pred.mu_ref;
        p.y = r.y_mean;
        p.stability = tag;
        p.residual_std = r.y_std;
        p.gains = {LawKind::washout, g.k_st, g.k_wo, wo.a};
        p.time_to_converge = r.elapsed;
        p.mu_ref = pred.mu_ref;
        p.y_ref = pred.y_ref;
        if (auto s = sys.secondary_output()) p.secondary = *s;
        br.points.push_back(p);
        walk.accept({p.mu, p.y});
        state = std::move(r.state);
        h = opt.h;
        failures = 0;
        if (outside(p.mu, opt)) {
            br.termination = "left parameter window";
            break;
        }
    }
    br.final_state = std::move(state);
    return br;
}

Branch cbc_zie_branch(ControlledSystem& sys, const BranchStart& start, const ContinuationOptions& opt,
                      const ZieOptions& zo) {
    Walker walk = make_walker(start);
    Branch br;
    State state = start.state;
    RunOptions run_opt = opt.run;
    if (opt.on_trajectory) run_opt.record = true;
    double mu_state = walk.curr.mu;
    double h = opt.h;
    int halvings = 0;
    const LawKind kind = zo.a == 0.0 ? LawKind::param : LawKind::zie;

    while (true) {
        if (br.points.size() >= opt.max_points) {
            br.termination = "max_points reached";
            break;
        }
        const Prediction pred = walk.predict(h);
        if (zo.check_controllability) {
            if (auto lin = sys.reference_linearization(pred.y_ref, pred.mu_ref)) {
                if (!zie_controllable(lin->f_x, lin->f_mu, lin->f_u, zo.a, zo.rank_tol)) {
                    br.failures.push_back({br.points.size(), pred.mu_ref, pred.y_ref, h,
                                           "refused: linearization at the prediction is not ZIE-controllable"});
                    br.termination = "not controllable";
                    break;
                }
            }
        }
        const SecantGains sg = zie_gains_from_secant(pred.secant, zo.sigma, false, zo.gain_cap, zo.k_st_y);
        const ZieGains g{zo.a, sg.k_st_y, sg.k_st_mu, pred.y_ref, pred.mu_ref};
        ZieLaw law(g, zo.runaway_radius);
        RunResult r = run_until_stationary(sys, law, state, mu_state, run_opt);
        if (opt.on_trajectory) opt.on_trajectory(r.trajectory);
        if (!r.converged()) {
            br.failures.push_back({br.points.size(), pred.mu_ref, pred.y_ref, h, failure_reason(r)});
            if (++halvings > opt.max_halvings) {
                br.termination = "step failed after " + std::to_string(opt.max_halvings) + " halvings";
                break;
            }
            h *= 0.5;
            continue;
        }
        if (std::hypot(r.mu_mean - walk.curr.mu, r.y_mean - walk.curr.y) > 2.0 * opt.h) {
            // Settled, but on some other branch far from the last point.
            br.failures.push_back({br.points.size(), pred.mu_ref, pred.y_ref, h, "jumped away from the branch"});
            if (++halvings > opt.max_halvings) {
                br.termination = "step failed after " + std::to_string(opt.max_halvings) + " halvings";
                break;
            }
            h *= 0.5;
            continue;
        }
        const ZieGains& used = law.controller().gains();
        BranchPoint p;
        p.mu = r.mu_mean;
        p.y = r.y_mean;
        p.residual_std = r.y_std;
        p.mu_std = r.mu_std;
        p.gains = {kind, used.k_st_y, used.k_st_mu, used.a};
        p.time_to_converge = r.elapsed;
        p.mu_ref = pred.mu_ref;
        p.y_ref = pred.y_ref;
        if (auto s = sys.secondary_output()) p.secondary = *s;
        br.points.push_back(p);
        walk.accept({p.mu, p.y});
        state = std::move(r.state);
        mu_state = r.mu;
        h = opt.h;
        halvings = 0;
        if (outside(p.mu, opt)) {
            br.termination = "left parameter window";
            break;
        }
    }
    classify_stability(br.points, br.points.empty() ? std::nullopt : std::optional<std::size_t>(0));
    br.final_state = std::move(state);
    return br;
}

std::vector<std::size_t> fold_indices(const std::vector<BranchPoint>& points) {
    std::vector<std::size_t> folds;
    int last = 0;
    for (std::size_t k = 1; k < points.size(); ++k) {
        const double d = points[k].mu - points[k - 1].mu;
        const int s = (d > 0.0) - (d < 0.0);
        if (s == 0) continue;
        if (last != 0 && s != last) folds.push_back(k - 1);
        last = s;
    }
    return folds;
}

void classify_stability(std::vector<BranchPoint>& points, std::optional<std::size_t> stable_anchor) {
    if (!stable_anchor || points.size() < 3 || *stable_anchor >= points.size()) {
        for (auto& p : points) p.stability = Stability::unknown;
        return;
    }
    const auto folds = fold_indices(points);
    // A fold point is counted with the segment that leads into it.
    auto segment = [&](std::size_t i) {
        std::size_t s = 0;
        for (std::size_t f : folds) s += f < i ? 1 : 0;
        return s;
    };
    const std::size_t anchor_seg = segment(*stable_anchor);
    for (std::size_t i = 0; i < points.size(); ++i) {
        const std::size_t d = segment(i) > anchor_seg ? segment(i) - anchor_seg : anchor_seg - segment(i);
        points[i].stability = d % 2 == 0 ? Stability::stable : Stability::unstable;
    }
}

// ---------------------------------------------------------------------------

std::size_t SweepSchedule::count() const {
    if (!(step > 0.0)) throw InputError("SweepSchedule: step must be positive");
    return static_cast<std::size_t>(std::llround(std::abs(mu_end - mu_start) / step)) + 1;
}

double SweepSchedule::mu_at(std::size_t k) const {
    const double dir = mu_end >= mu_start ? 1.0 : -1.0;
    const double mu = mu_start + dir * static_cast<double>(k) * step;
    // Round-off leaves grid points like 1e-16 instead of 0.
    return std::abs(mu) < 1e-9 * step ? 0.0 : mu;
}

SweepResult run_sweep(ControlledSystem& sys, State x0, const SweepSchedule& schedule, const RunOptions& opt,
                      const std::function<void(const Trajectory&)>& on_hold) {
    if (!(schedule.hold_time > 0.0)) throw InputError("run_sweep: hold_time must be positive");
    RunOptions hold_opt = opt;
    if (on_hold) hold_opt.record = true;
    SweepResult out;
    State state = std::move(x0);
    const std::size_t n = schedule.count();
    for (std::size_t k = 0; k < n; ++k) {
        const double mu = schedule.mu_at(k);
        RunResult r = hold(sys, std::move(state), mu, schedule.hold_time, hold_opt);
        if (on_hold) on_hold(r.trajectory);
        SweepRow row;
        row.mu = mu;
        row.y_end = r.y_mean;
        if (auto s = sys.secondary_output()) row.dphi_end = *s;
        row.diverged = r.status == RunStatus::diverged;
        out.rows.push_back(row);
        state = std::move(r.state);
        if (row.diverged) {
            out.diverged = true;
            break;
        }
    }
    out.final_state = std::move(state);
    return out;
}

BistabilityInterval bistability_interval(const std::vector<SweepRow>& up, const std::vector<SweepRow>& down) {
    auto sgn = [](double v) { return (v > 0.0) - (v < 0.0); };
    std::vector<std::pair<double, bool>> grid;  // (mu, disagree) in the order of `up`
    for (const auto& u : up) {
        if (u.diverged) continue;
        for (const auto& d : down) {
            if (d.diverged || std::abs(d.mu - u.mu) > 1e-9) continue;
            grid.emplace_back(u.mu, sgn(u.y_end) != sgn(d.y_end));
            break;
        }
    }
    BistabilityInterval best;
    std::size_t i = 0;
    while (i < grid.size()) {
        if (!grid[i].second) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < grid.size() && grid[j + 1].second) ++j;
        const double lo = std::min(grid[i].first, grid[j].first);
        const double hi = std::max(grid[i].first, grid[j].first);
        if (!best.found || hi - lo > best.width) best = {lo, hi, hi - lo, true};
        i = j + 1;
    }
    return best;
}

namespace {

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

void write_branch_csv(std::ostream& os, const Branch& branch, const std::string& header_comment) {
    if (!header_comment.empty()) os << "# " << header_comment << '\n';
    os << "index,mu,y,stability,residual_std,K_st_y,K_st_mu,a\n";
    for (std::size_t i = 0; i < branch.points.size(); ++i) {
        const auto& p = branch.points[i];
        os << i << ',' << num(p.mu) << ',' << num(p.y) << ',' << to_string(p.stability) << ','
           << num(p.residual_std) << ',' << num(p.gains.k_st_y) << ',' << num(p.gains.k_st_mu) << ','
           << num(p.gains.a) << '\n';
    }
}

void write_sweep_csv(std::ostream& os, const SweepResult& sweep, const std::string& header_comment) {
    if (!header_comment.empty()) os << "# " << header_comment << '\n';
    os << "mu,y_end,dphi_end,status\n";
    for (const auto& r : sweep.rows)
        os << num(r.mu) << ',' << num(r.y_end) << ',' << num(r.dphi_end) << ',' << (r.diverged ? "diverged" : "ok")
           << '\n';
}

}  // namespace cbc
