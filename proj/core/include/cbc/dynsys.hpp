#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbc/controllability.hpp"

namespace cbc {

using State = std::vector<double>;

/// Raised when a right-hand side evaluation produces NaN or infinity.
class NonFiniteError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Black-box plant x' = f(x, mu, v) with scalar output y = g(x).
///
/// `v` is the plant input as it enters f; feedback laws scale their control
/// signal before handing it over. Implementations must be deterministic
/// given state, parameter, input and their own RNG state.
class ControlledSystem {
public:
    virtual ~ControlledSystem() = default;

    virtual std::size_t state_dim() const = 0;
    virtual void rhs(std::span<const double> x, double mu, double input, std::span<double> dxdt) const = 0;
    /// Sampled output. Non-const: measurement noise draws from the system RNG.
    virtual double output(std::span<const double> x) = 0;
    /// Event handling at step boundaries (e.g. re-injection of particles).
    virtual void post_step(std::span<double> /*x*/, double /*mu*/) {}
    /// Auxiliary measurement reported alongside the output (e.g. a
    /// time-averaged count). Empty when the system has none.
    virtual std::optional<double> secondary_output() const { return std::nullopt; }
    /// Analytic linearization at the equilibrium candidate with output y and
    /// parameter mu, for systems that know their own derivatives.
    virtual std::optional<Linearization> reference_linearization(double /*y*/, double /*mu*/) const {
        return std::nullopt;
    }
    virtual State initial_state() = 0;
    virtual double recommended_dt() const { return 0.1; }
    virtual std::string name() const = 0;
};

/// Classical fourth-order Runge-Kutta step with mu and input held constant.
/// Throws NonFiniteError if any stage derivative is not finite.
State rk4_step(const ControlledSystem& sys, std::span<const double> x, double mu, double input, double dt);

/// Rolling window of the last n_min samples; stationary once full and the
/// sample standard deviation does not exceed tol_std.
class StationarityDetector {
public:
    explicit StationarityDetector(std::size_t n_min = 200, double tol_std = 0.05);

    void push(double value);
    void clear() noexcept;

    bool ready() const noexcept { return count_ >= window_.size(); }
    bool is_stationary() const;
    /// Sample standard deviation (n - 1 denominator) of the samples held.
    double std_dev() const;
    double mean() const;
    std::size_t size() const noexcept { return std::min(count_, window_.size()); }
    std::size_t n_min() const noexcept { return window_.size(); }
    double tol_std() const noexcept { return tol_std_; }

private:
    std::vector<double> window_;
    std::size_t next_ = 0;
    std::size_t count_ = 0;
    double tol_std_;
};

/// Uniformly sampled closed-loop record.
struct Trajectory {
    std::vector<double> t;
    std::vector<double> y;
    std::vector<double> mu;
    std::vector<double> u;

    void push(double t_, double y_, double mu_, double u_);
    std::size_t size() const noexcept { return t.size(); }
};

/// CSV `t,y,mu,u`, preceded by `comment` as a `# ` line when non-empty.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const std::string& comment = {});

/// A feedback law closing the loop around a ControlledSystem.
class FeedbackLaw {
public:
    virtual ~FeedbackLaw() = default;
    /// Control signal from the sampled output and current parameter.
    virtual double control(double y, double mu) = 0;
    /// Factor applied to u before it enters the plant.
    virtual double input_scale() const = 0;
    /// Whether mu evolves by mu' = u.
    virtual bool drives_parameter() const = 0;
    /// Advances internal filter states over one held sample.
    virtual void advance(double /*u*/, double /*dt*/) {}
};

/// u = 0.
class OpenLoop final : public FeedbackLaw {
public:
    double control(double, double) override { return 0.0; }
    double input_scale() const override { return 0.0; }
    bool drives_parameter() const override { return false; }
};

enum class RunStatus { converged, timeout, diverged };
std::string to_string(RunStatus s);

struct RunOptions {
    double dt = 0.1;
    double max_time = 600.0;
    std::size_t n_min = 200;
    double tol_std = 0.05;
    /// Quiescence tolerance on mu, applied when the law drives mu.
    double tol_std_mu = 0.02;
    /// |y| (or a driven |mu|) beyond this counts as divergence.
    double divergence_bound = 1e6;
    double mu_min = -std::numeric_limits<double>::infinity();
    double mu_max = std::numeric_limits<double>::infinity();
    bool record = false;
};

struct RunResult {
    RunStatus status = RunStatus::timeout;
    State state;
    double mu = 0.0;
    double y_mean = 0.0;
    double mu_mean = 0.0;
    double y_std = 0.0;
    double mu_std = 0.0;
    double u_last = 0.0;
    double elapsed = 0.0;  // simulated seconds
    std::string diagnostic;
    Trajectory trajectory;

    bool converged() const noexcept { return status == RunStatus::converged; }
};

/// Steps the closed loop from (x0, mu0) with a zero-order hold on u until the
/// output (and mu, when driven) is stationary or max_time elapses. Accepted
/// values are the means over the final window.
RunResult run_until_stationary(ControlledSystem& sys, FeedbackLaw& law, State x0, double mu0,
                               const RunOptions& opt);

/// Open-loop simulation at fixed mu for `duration` seconds. Returns the last
/// sampled output in y_mean (no averaging); status is diverged on blow-up.
RunResult hold(ControlledSystem& sys, State x0, double mu, double duration, const RunOptions& opt);

/// Central finite-difference linearization around (x, mu, input = 0), used
/// only for offline diagnostics. Step is relative with floor `rel_step`.
Linearization finite_difference_linearization(const ControlledSystem& sys, std::span<const double> x,
                                              double mu, double rel_step = 1e-4);

}  // namespace cbc
