#pragma once

#include "cbc/dynsys.hpp"
#include "cbc/feedback.hpp"

namespace cbc {

/// Washout filter law with mu held fixed. The plant receives a * u.
class WashoutLaw final : public FeedbackLaw {
public:
    WashoutLaw(WashoutGains gains, double a, double y_wo0) : gains_(gains), a_(a), y_wo_(y_wo0) {}

    double control(double y, double /*mu*/) override { return washout_u(y, y_wo_, gains_); }
    double input_scale() const override { return a_; }
    bool drives_parameter() const override { return false; }
    void advance(double u, double dt) override { y_wo_ += dt * u; }

    double y_wo() const noexcept { return y_wo_; }
    const WashoutGains& gains() const noexcept { return gains_; }

private:
    WashoutGains gains_;
    double a_;
    double y_wo_;
};

/// Zero-in-equilibrium law: mu' = u and a * u into the plant. a = 0 gives
/// control through the parameter only.
class ZieLaw final : public FeedbackLaw {
public:
    ZieLaw(ZieGains gains, double runaway_radius) : ctl_(gains, runaway_radius) {}

    double control(double y, double mu) override { return ctl_.control(y, mu); }
    double input_scale() const override { return ctl_.gains().a; }
    bool drives_parameter() const override { return true; }

    const ZieController& controller() const noexcept { return ctl_; }

private:
    ZieController ctl_;
};

}  // namespace cbc
