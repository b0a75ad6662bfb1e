#include "cbc/dynsys.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace cbc {

namespace {

void require_finite(std::span<const double> v, const char* stage) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) {
            std::ostringstream msg;
            msg << "non-finite derivative in RK4 stage " << stage << " at component " << i;
            throw NonFiniteError(msg.str());
        }
    }
}

}  // namespace

State rk4_step(const ControlledSystem& sys, std::span<const double> x, double mu, double input, double dt) {
    if (!(dt > 0.0)) throw InputError("rk4_step: dt must be positive");
    const std::size_t n = x.size();
    State k1(n), k2(n), k3(n), k4(n), tmp(n);

    sys.rhs(x, mu, input, k1);
    require_finite(k1, "1");
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
    sys.rhs(tmp, mu, input, k2);
    require_finite(k2, "2");
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
    sys.rhs(tmp, mu, input, k3);
    require_finite(k3, "3");
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + dt * k3[i];
    sys.rhs(tmp, mu, input, k4);
    require_finite(k4, "4");

    State out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

// ---------------------------------------------------------------------------

StationarityDetector::StationarityDetector(std::size_t n_min, double tol_std)
    : window_(std::max<std::size_t>(n_min, 2)), tol_std_(tol_std) {}

void StationarityDetector::push(double value) {
    window_[next_] = value;
    next_ = (next_ + 1) % window_.size();
    ++count_;
}

void StationarityDetector::clear() noexcept {
    next_ = 0;
    count_ = 0;
}

double StationarityDetector::mean() const {
    const std::size_t n = size();
    if (n == 0) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += window_[i];
    return sum / static_cast<double>(n);
}

double StationarityDetector::std_dev() const {
    const std::size_t n = size();
    if (n < 2) return 0.0;
    const double m = mean();
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) ss += (window_[i] - m) * (window_[i] - m);
    return std::sqrt(ss / static_cast<double>(n - 1));
}

bool StationarityDetector::is_stationary() const { return ready() && std_dev() <= tol_std_; }

// ---------------------------------------------------------------------------

void Trajectory::push(double t_, double y_, double mu_, double u_) {
    t.push_back(t_);
    y.push_back(y_);
    mu.push_back(mu_);
    u.push_back(u_);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const std::string& comment) {
    if (!comment.empty()) os << "# " << comment << '\n';
    os << "t,y,mu,u\n";
    const auto old_precision = os.precision(12);
    for (std::size_t i = 0; i < traj.size(); ++i)
        os << traj.t[i] << ',' << traj.y[i] << ',' << traj.mu[i] << ',' << traj.u[i] << '\n';
    os.precision(old_precision);
}

std::string to_string(RunStatus s) {
    switch (s) {
        case RunStatus::converged: return "converged";
        case RunStatus::timeout: return "timeout";
        case RunStatus::diverged: return "diverged";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------

RunResult run_until_stationary(ControlledSystem& sys, FeedbackLaw& law, State x0, double mu0,
                               const RunOptions& opt) {
    if (!(opt.max_time > 0.0)) throw InputError("run_until_stationary: max_time must be positive");
    RunResult res;
    StationarityDetector y_det(opt.n_min, opt.tol_std);
    StationarityDetector mu_det(opt.n_min, opt.tol_std_mu);
    const bool dynamic_mu = law.drives_parameter();

    State x = std::move(x0);
    double mu = mu0;
    double t = 0.0;
    const auto max_steps = static_cast<std::size_t>(std::ceil(opt.max_time / opt.dt - 1e-9));

    auto finish = [&](RunStatus status, std::string diagnostic) {
        res.status = status;
        res.diagnostic = std::move(diagnostic);
        res.state = x;
        res.mu = mu;
        res.elapsed = t;
        res.y_mean = y_det.mean();
        res.y_std = y_det.std_dev();
        res.mu_mean = dynamic_mu ? mu_det.mean() : mu;
        res.mu_std = dynamic_mu ? mu_det.std_dev() : 0.0;
        return std::move(res);
    };

    for (std::size_t step = 0;; ++step) {
        const double y = sys.output(x);
        if (!std::isfinite(y) || std::abs(y) > opt.divergence_bound)
            return finish(RunStatus::diverged, "output left the admissible range");
        const double u = law.control(y, mu);
        res.u_last = u;
        if (opt.record) res.trajectory.push(t, y, mu, u);
        y_det.push(y);
        if (dynamic_mu) mu_det.push(mu);
        if (y_det.is_stationary() && (!dynamic_mu || mu_det.is_stationary()))
            return finish(RunStatus::converged, {});
        if (step >= max_steps) return finish(RunStatus::timeout, "no convergence within max_time");

        try {
            x = rk4_step(sys, x, mu, law.input_scale() * u, opt.dt);
        } catch (const NonFiniteError& e) {
            return finish(RunStatus::diverged, e.what());
        }
        if (dynamic_mu) {
            mu += opt.dt * u;
            if (!std::isfinite(mu) || std::abs(mu) > opt.divergence_bound || mu < opt.mu_min || mu > opt.mu_max)
                return finish(RunStatus::diverged, "parameter left the admissible range");
        }
        law.advance(u, opt.dt);
        sys.post_step(x, mu);
        t += opt.dt;
    }
}

RunResult hold(ControlledSystem& sys, State x0, double mu, double duration, const RunOptions& opt) {
    RunResult res;
    State x = std::move(x0);
    const auto steps = static_cast<std::size_t>(std::llround(duration / opt.dt));
    double t = 0.0;
    res.status = RunStatus::converged;
    for (std::size_t k = 0; k < steps; ++k) {
        const double y = sys.output(x);
        if (opt.record) res.trajectory.push(t, y, mu, 0.0);
        if (!std::isfinite(y) || std::abs(y) > opt.divergence_bound) {
            res.status = RunStatus::diverged;
            res.diagnostic = "output left the admissible range";
            break;
        }
        try {
            x = rk4_step(sys, x, mu, 0.0, opt.dt);
        } catch (const NonFiniteError& e) {
            res.status = RunStatus::diverged;
            res.diagnostic = e.what();
            break;
        }
        sys.post_step(x, mu);
        t += opt.dt;
    }
    res.y_mean = sys.output(x);
    if (res.status != RunStatus::diverged && (!std::isfinite(res.y_mean) || std::abs(res.y_mean) > opt.divergence_bound)) {
        res.status = RunStatus::diverged;
        res.diagnostic = "output left the admissible range";
    }
    if (opt.record && res.status != RunStatus::diverged) res.trajectory.push(t, res.y_mean, mu, 0.0);
    res.state = std::move(x);
    res.mu = mu;
    res.mu_mean = mu;
    res.elapsed = t;
    return res;
}

Linearization finite_difference_linearization(const ControlledSystem& sys, std::span<const double> x,
                                              double mu, double rel_step) {
    const std::size_t n = x.size();
    Linearization lin{Matrix(n, n), Matrix(n, 1), Matrix(n, 1)};
    State xp(x.begin(), x.end()), xm(x.begin(), x.end()), fp(n), fm(n);
    auto step_for = [rel_step](double v) { return rel_step * std::max(1.0, std::abs(v)); };

    for (std::size_t j = 0; j < n; ++j) {
        const double h = step_for(x[j]);
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        sys.rhs(xp, mu, 0.0, fp);
        sys.rhs(xm, mu, 0.0, fm);
        for (std::size_t i = 0; i < n; ++i) lin.f_x(i, j) = (fp[i] - fm[i]) / (2.0 * h);
        xp[j] = xm[j] = x[j];
    }
    const double hm = step_for(mu);
    sys.rhs(x, mu + hm, 0.0, fp);
    sys.rhs(x, mu - hm, 0.0, fm);
    for (std::size_t i = 0; i < n; ++i) lin.f_mu(i, 0) = (fp[i] - fm[i]) / (2.0 * hm);
    const double hu = rel_step;
    sys.rhs(x, mu, hu, fp);
    sys.rhs(x, mu, -hu, fm);
    for (std::size_t i = 0; i < n; ++i) lin.f_u(i, 0) = (fp[i] - fm[i]) / (2.0 * hu);
    return lin;
}

}  // namespace cbc
