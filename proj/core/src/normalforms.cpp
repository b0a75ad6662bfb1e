#include "cbc/normalforms.hpp"

#include <cmath>

namespace cbc {

FoldSystem::FoldSystem(double x0, double noise, std::uint64_t seed) : x0_(x0), noise_(noise), rng_(seed) {
    if (noise < 0.0) throw InputError("FoldSystem: noise amplitude must be non-negative");
}

void FoldSystem::rhs(std::span<const double> x, double mu, double input, std::span<double> dxdt) const {
    dxdt[0] = mu - x[0] * x[0] + input;
}

double FoldSystem::output(std::span<const double> x) {
    if (noise_ == 0.0) return x[0];
    return x[0] + noise_ * standard_normal(rng_);
}

std::optional<Linearization> FoldSystem::reference_linearization(double y, double /*mu*/) const {
    return Linearization{Matrix{{-2.0 * y}}, Matrix{{1.0}}, Matrix{{1.0}}};
}

FoldBranch fold_branch_oracle(double mu) {
    if (mu < 0.0) throw InputError("fold_branch_oracle: no equilibria for mu < 0");
    const double r = std::sqrt(mu);
    return {r, -r, -2.0 * r, 2.0 * r};
}

// ---------------------------------------------------------------------------

PitchforkSystem::PitchforkSystem(double a_wo, double x0) : a_wo_(a_wo), x0_(x0) {}

void PitchforkSystem::rhs(std::span<const double> x, double mu, double input, std::span<double> dxdt) const {
    const double v = x[0];
    dxdt[0] = mu * v + v * v * v + input;
    if (a_wo_ != 0.0) {
        dxdt[0] += a_wo_ * x[1];
        dxdt[1] = -2.0 * v;
    }
}

std::optional<Linearization> PitchforkSystem::reference_linearization(double y, double mu) const {
    if (a_wo_ == 0.0) return Linearization{Matrix{{mu + 3.0 * y * y}}, Matrix{{y}}, Matrix{{1.0}}};
    return Linearization{Matrix{{mu + 3.0 * y * y, a_wo_}, {-2.0, 0.0}}, Matrix{{y}, {0.0}}, Matrix{{1.0}, {0.0}}};
}

State PitchforkSystem::initial_state() {
    if (a_wo_ == 0.0) return {x0_};
    return {x0_, 0.0};
}

bool pitchfork_ext_controllable(double a_u, double a_wo, double tol) {
    const Matrix A{{0.0, 0.0, a_wo}, {0.0, 0.0, 0.0}, {-2.0, 0.0, 0.0}};
    const Matrix B{{a_u}, {1.0}, {0.0}};
    return mat_rank(controllability_matrix(A, B), tol) == 3;
}

// ---------------------------------------------------------------------------

SlowFastSystem::SlowFastSystem(double eps, double x0, double noise, std::uint64_t seed)
    : eps_(eps), x0_(x0), noise_(noise), rng_(seed) {
    if (!(eps > 0.0)) throw InputError("SlowFastSystem: eps must be positive");
    if (noise < 0.0) throw InputError("SlowFastSystem: noise amplitude must be non-negative");
}

void SlowFastSystem::rhs(std::span<const double> x, double mu, double input, std::span<double> dxdt) const {
    dxdt[0] = mu - x[0] * x[0] + input;
    dxdt[1] = -(x[1] - x[0]) / eps_;
}

double SlowFastSystem::output(std::span<const double> x) {
    if (noise_ == 0.0) return x[0];
    return x[0] + noise_ * standard_normal(rng_);
}

std::optional<Linearization> SlowFastSystem::reference_linearization(double y, double /*mu*/) const {
    return Linearization{Matrix{{-2.0 * y, 0.0}, {1.0 / eps_, -1.0 / eps_}}, Matrix{{1.0}, {0.0}},
                         Matrix{{1.0}, {0.0}}};
}

}  // namespace cbc
