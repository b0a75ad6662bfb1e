#include "cbc/feedback.hpp"

#include <cmath>
#include <limits>

namespace cbc {

double washout_u(double y, double y_wo, const WashoutGains& g) noexcept {
    return g.k_st * (y - g.y_ref) + g.k_wo * (y_wo - g.y_wo_ref);
}

double zie_u(double y, double mu, const ZieGains& g) noexcept {
    return g.k_st_y * (y - g.y_ref) + g.k_st_mu * (mu - g.mu_ref);
}

Jacobian2 washout_slow_jacobian(const SlowDirectionInfo& info, const WashoutGains& g) noexcept {
    return {info.lambda_c + info.wfu * g.k_st, info.wfu * g.k_wo, g.k_st, g.k_wo};
}

Jacobian2 zie_slow_jacobian(const SlowDirectionInfo& info, const ZieGains& g) noexcept {
    return {info.lambda_c + g.a * info.wfu * g.k_st_y, info.wfmu + g.a * info.wfu * g.k_st_mu, g.k_st_y,
            g.k_st_mu};
}

bool washout_gains_admissible(const SlowDirectionInfo& info, const WashoutGains& g) noexcept {
    if (info.lambda_c == 0.0 || g.k_wo == 0.0) return false;
    const bool same_sign = (g.k_wo > 0.0) == (info.lambda_c > 0.0);
    return info.lambda_c + g.k_wo < -info.wfu * g.k_st && same_sign;
}

bool zie_gains_admissible(const SlowDirectionInfo& info, const ZieGains& g) noexcept {
    if (g.k_st_y == 0.0 && g.k_st_mu == 0.0) return info.lambda_c < 0.0;
    return g.k_st_mu + g.a * info.wfu * g.k_st_y < -info.lambda_c &&
           info.lambda_c * g.k_st_mu - info.wfmu * g.k_st_y > 0.0;
}

bool zie_geometric_criterion(const Secant& secant, int sigma, double k_st_y, double k_st_mu) noexcept {
    return sigma * (secant.v_mu * k_st_mu + secant.v_y * k_st_y) > 0.0;
}

SecantGains zie_gains_from_secant(const Secant& secant, int sigma, bool flipped, double cap, double k_st_y) {
    SecantGains out;
    out.k_st_y = k_st_y;
    double k_mu;
    if (secant.v_y == 0.0) {
        const double lim = k_st_y * secant.v_mu;
        k_mu = lim == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), lim);
    } else {
        k_mu = k_st_y * secant.v_mu / secant.v_y;
    }
    if (flipped) k_mu = -k_mu;
    if (std::abs(k_mu) > cap) {
        k_mu = std::copysign(cap, k_mu);
        out.capped = true;
    }
    out.k_st_mu = k_mu;
    out.geometric_ok = zie_geometric_criterion(secant, sigma, out.k_st_y, out.k_st_mu);
    return out;
}

ZieController::ZieController(ZieGains gains, double runaway_radius)
    : gains_(gains), runaway_radius_(runaway_radius) {}

double ZieController::control(double y, double mu) {
    if (!flipped_ && runaway_radius_ > 0.0) {
        const double dist = std::hypot(mu - gains_.mu_ref, y - gains_.y_ref);
        if (dist > runaway_radius_) {
            gains_.k_st_mu = -gains_.k_st_mu;
            flipped_ = true;
        }
    }
    return zie_u(y, mu, gains_);
}

}  // namespace cbc
