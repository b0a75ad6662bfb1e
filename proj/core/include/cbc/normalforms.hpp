#pragma once

#include <cstdint>
#include <random>

#include "cbc/dynsys.hpp"
#include "cbc/random.hpp"

namespace cbc {

/// x' = mu - x^2 + v, y = x + xi * N(0,1).
class FoldSystem final : public ControlledSystem {
public:
    explicit FoldSystem(double x0 = 1.0, double noise = 0.0, std::uint64_t seed = 0);

    std::size_t state_dim() const override { return 1; }
    void rhs(std::span<const double> x, double mu, double input, std::span<double> dxdt) const override;
    double output(std::span<const double> x) override;
    std::optional<Linearization> reference_linearization(double y, double mu) const override;
    State initial_state() override { return {x0_}; }
    std::string name() const override { return "fold"; }

private:
    double x0_;
    double noise_;
    std::mt19937_64 rng_;
};

struct FoldBranch {
    double x_stable;
    double x_unstable;
    double lambda_stable;
    double lambda_unstable;
};

/// Equilibria x = +-sqrt(mu) with slow eigenvalue -2x. Throws InputError
/// for mu < 0.
FoldBranch fold_branch_oracle(double mu);

/// x' = mu x + x^3 + v + a_wo x_wo, x_wo' = -2x (the symmetry defect x - Rx
/// with R = -1). With a_wo = 0 the filter is dropped and the state is x alone.
class PitchforkSystem final : public ControlledSystem {
public:
    explicit PitchforkSystem(double a_wo = 1.0, double x0 = 0.0);

    std::size_t state_dim() const override { return a_wo_ == 0.0 ? 1 : 2; }
    void rhs(std::span<const double> x, double mu, double input, std::span<double> dxdt) const override;
    double output(std::span<const double> x) override { return x[0]; }
    std::optional<Linearization> reference_linearization(double y, double mu) const override;
    State initial_state() override;
    std::string name() const override { return "pitchfork"; }

private:
    double a_wo_;
    double x0_;
};

/// Rank test of the extended pitchfork linearization at the origin with
/// state (x, mu, x_wo): A = [[0,0,a_wo],[0,0,0],[-2,0,0]], B = (a_u, 1, 0).
bool pitchfork_ext_controllable(double a_u, double a_wo, double tol = kDefaultRankTol);

/// x1' = mu - x1^2 + v, x2' = -(x2 - x1)/eps, y = x1.
class SlowFastSystem final : public ControlledSystem {
public:
    explicit SlowFastSystem(double eps = 0.01, double x0 = 1.0, double noise = 0.0, std::uint64_t seed = 0);

    std::size_t state_dim() const override { return 2; }
    void rhs(std::span<const double> x, double mu, double input, std::span<double> dxdt) const override;
    double output(std::span<const double> x) override;
    std::optional<Linearization> reference_linearization(double y, double mu) const override;
    State initial_state() override { return {x0_, x0_}; }
    double recommended_dt() const override { return 0.001; }
    std::string name() const override { return "slowfast"; }

    double eps() const noexcept { return eps_; }

private:
    double eps_;
    double x0_;
    double noise_;
    std::mt19937_64 rng_;
};

}  // namespace cbc
