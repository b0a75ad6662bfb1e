#pragma once

#include "cbc/dynsys.hpp"

namespace testsys {

/// x' = k x + v.
class Linear final : public cbc::ControlledSystem {
public:
    explicit Linear(double k, double x0 = 1.0) : k_(k), x0_(x0) {}
    std::size_t state_dim() const override { return 1; }
    void rhs(std::span<const double> x, double, double v, std::span<double> dx) const override { dx[0] = k_ * x[0] + v; }
    double output(std::span<const double> x) override { return x[0]; }
    cbc::State initial_state() override { return {x0_}; }
    std::string name() const override { return "linear"; }

private:
    double k_, x0_;
};

/// x' = c.
class Drift final : public cbc::ControlledSystem {
public:
    explicit Drift(double c) : c_(c) {}
    std::size_t state_dim() const override { return 1; }
    void rhs(std::span<const double>, double, double, std::span<double> dx) const override { dx[0] = c_; }
    double output(std::span<const double> x) override { return x[0]; }
    cbc::State initial_state() override { return {0.0}; }
    std::string name() const override { return "drift"; }

private:
    double c_;
};

/// A fixed input for run_until_stationary.
class ConstantLaw final : public cbc::FeedbackLaw {
public:
    explicit ConstantLaw(double u) : u_(u) {}
    double control(double, double) override { return u_; }
    double input_scale() const override { return 1.0; }
    bool drives_parameter() const override { return false; }

private:
    double u_;
};

}  // namespace testsys
