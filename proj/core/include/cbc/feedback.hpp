#pragma once

#include <string>

namespace cbc {

/// Washout-filter law u = K_st (y - y_ref) + K_wo (y_wo - y_wo_ref) with
/// filter state y_wo' = u.
struct WashoutGains {
    double k_st = -5.0;
    double k_wo = 0.1;
    double y_ref = 0.0;
    double y_wo_ref = 0.0;
};

/// Zero-in-equilibrium law u = K_st,y (y - y_ref) + K_st,mu (mu - mu_ref)
/// with mu' = u and a * u entering the plant. a = 0 is control through the
/// parameter alone.
struct ZieGains {
    double a = 50.0;
    double k_st_y = -0.2;
    double k_st_mu = 0.0;
    double y_ref = 0.0;
    double mu_ref = 0.0;
};

/// Unit vector in the (mu, y) plane.
struct Secant {
    double v_mu = 0.0;
    double v_y = 1.0;
};

/// Coefficients of the single slow direction of an equilibrium: slow
/// eigenvalue, projections of the input and parameter derivatives onto its
/// left eigenvector, input orientation and the branch secant.
struct SlowDirectionInfo {
    double lambda_c = 0.0;
    double wfu = 0.0;
    double wfmu = 0.0;
    int sigma = 1;
    Secant secant;
};

double washout_u(double y, double y_wo, const WashoutGains& g) noexcept;
double zie_u(double y, double mu, const ZieGains& g) noexcept;

/// 2x2 slow-plane Jacobians of the closed loop in (y, y_wo) and (y, mu).
struct Jacobian2 {
    double a11, a12, a21, a22;
    double trace() const noexcept { return a11 + a22; }
    double det() const noexcept { return a11 * a22 - a12 * a21; }
    bool hurwitz() const noexcept { return trace() < 0.0 && det() > 0.0; }
};

Jacobian2 washout_slow_jacobian(const SlowDirectionInfo& info, const WashoutGains& g) noexcept;
Jacobian2 zie_slow_jacobian(const SlowDirectionInfo& info, const ZieGains& g) noexcept;

/// lambda_c + K_wo < -wfu K_st and sign(K_wo) = sign(lambda_c). Always false
/// at a fold (lambda_c = 0).
bool washout_gains_admissible(const SlowDirectionInfo& info, const WashoutGains& g) noexcept;

/// K_mu + a wfu K_y < -lambda_c and lambda_c K_mu - wfmu K_y > 0. With both
/// gains zero on a stable equilibrium (lambda_c < 0) the loop reduces to the
/// uncontrolled plant with mu frozen and is accepted.
bool zie_gains_admissible(const SlowDirectionInfo& info, const ZieGains& g) noexcept;

/// Geometric form of the second ZIE criterion:
/// sigma * (v_mu K_mu + v_y K_y) > 0.
bool zie_geometric_criterion(const Secant& secant, int sigma, double k_st_y, double k_st_mu) noexcept;

inline constexpr double kSecantGainY = -0.2;
inline constexpr double kSecantGainCap = 10.0;

struct SecantGains {
    double k_st_y = kSecantGainY;
    double k_st_mu = 0.0;
    bool capped = false;         // |K_mu| was limited to the cap
    bool geometric_ok = false;   // zie_geometric_criterion for the returned pair
};

/// Gains from the branch secant: K_y fixed (default -0.2) and
/// K_mu = K_y v_mu / v_y, which puts the line u = 0 perpendicular to the
/// secant. `flipped` selects the opposite sign of K_mu. |K_mu| is capped at
/// `cap`; v_y = 0 yields the cap with the sign of the ratio limit.
SecantGains zie_gains_from_secant(const Secant& secant, int sigma, bool flipped, double cap = kSecantGainCap,
                                  double k_st_y = kSecantGainY);

/// Stateful ZIE controller for one continuation step. Monitors the distance
/// of (mu, y) from the reference point and flips the sign of K_mu once when
/// it first exceeds the runaway radius.
class ZieController {
public:
    ZieController(ZieGains gains, double runaway_radius);

    /// Computes u at the sampled output and parameter. May flip K_mu.
    double control(double y, double mu);

    const ZieGains& gains() const noexcept { return gains_; }
    bool flipped() const noexcept { return flipped_; }

private:
    ZieGains gains_;
    double runaway_radius_;
    bool flipped_ = false;
};

}  // namespace cbc
