#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

#include "cbc/dynsys.hpp"
#include "cbc/random.hpp"

namespace cbc::ped {

/// x across the corridor, y along it.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2& operator+=(Vec2 o) noexcept { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(Vec2 o) noexcept { x -= o.x; y -= o.y; return *this; }
    Vec2& operator*=(double s) noexcept { x *= s; y *= s; return *this; }
    friend Vec2 operator+(Vec2 a, Vec2 b) noexcept { return a += b; }
    friend Vec2 operator-(Vec2 a, Vec2 b) noexcept { return a -= b; }
    friend Vec2 operator*(double s, Vec2 a) noexcept { return a *= s; }
    friend Vec2 operator*(Vec2 a, double s) noexcept { return a *= s; }
    friend bool operator==(Vec2, Vec2) = default;
};

inline double dot(Vec2 a, Vec2 b) noexcept { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) noexcept { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) noexcept { return std::hypot(a.x, a.y); }

/// What the angle in the alignment weight measures.
///  bearing: direction of the neighbour's position seen from i, relative to
///           i's walking direction (a field of view).
///  heading: difference of the two walking directions.
enum class AlignmentAngle { bearing, heading };

/// Social-force model parameters. Defaults reproduce the reference scenario.
struct PedParams {
    double corridor_length = 20.0;   // C_len
    double corridor_width = 10.0;    // C_wth
    int n_ped = 100;
    double base_length = 4.0;        // L_base
    double leg_length = 3.0;         // L_iso
    double v_trg = 1.34;
    Vec2 x_trg{0.0, 20.0};
    double tau = 0.22;
    double V_ped = 15.0;
    double sigma_ped = 1.0;
    double V_obj = 10.0;
    double sigma_obj = 2.0;
    double p_al = 0.75;
    double gamma = 2.718281828459045;
    double beta = 0.9;
    double alpha = 15.0;
    double sigma_al = 5.0;
    AlignmentAngle alignment_angle = AlignmentAngle::bearing;

    /// Distance from the obstacle tip to its base.
    double obstacle_height() const { return std::sqrt(leg_length * leg_length - 0.25 * base_length * base_length); }
};

struct FluxParams {
    double d = 4.0;
    double eta = 1.0 / 12.0;
    double x_c_phi = 5.0;
    double y_c_phi = 0.0;
    double y_len_Phi = 0.5;
    double y_c_Phi = std::sqrt(5.0) + 0.5;
    double tau_max = 10.0;
};

/// Support of the bias force; centred on the obstacle tip in x.
struct InputBox {
    double y_len = 0.25;
    double x_wth = 10.0 / 3.0;
    double y_c = -1.75;
};

/// Target (or alignment) force (v_trg e - v) / tau toward x_trg.
Vec2 target_force(Vec2 pos, Vec2 vel, const PedParams& p);

/// Repulsion magnitude -V [tan g - g], g = (pi/2)(r/sigma - 1), zero for
/// r >= sigma. r is clamped to 1e-6 from below.
double repulsion_magnitude(double r, double V, double sigma);

/// Force on i from an entity whose nearest point is at i + r_vec. Points
/// away from the entity.
Vec2 repulsion_force(Vec2 r_vec, double V, double sigma);

/// Triangle with tip (mu, 0) pointing upstream and base at y = h.
struct Triangle {
    Vec2 tip, left, right;
};
Triangle obstacle_triangle(double mu, const PedParams& p);
bool inside_triangle(Vec2 pos, const Triangle& tri);
/// Closest point on the triangle boundary.
Vec2 triangle_closest_point(Vec2 pos, const Triangle& tri);

/// Alignment weight for a neighbour at distance r and angle theta.
double kappa(double r, double theta, const PedParams& p);

/// 1 iff |x - mu| <= x_wth and |y - y_c| <= y_len.
int bias_indicator(Vec2 pos, double mu, const InputBox& box);

/// Exponential integral E1(z) for z > 0.
double exp_integral_E1(double z);

/// Weight kernel of the space-averaged flux measure.
double flux_weight(double x, double y, const FluxParams& f);

/// Counts in the boxes right (+) and left (-) of the obstacle end.
struct BoxCounts {
    int plus = 0;
    int minus = 0;
};

/// Per-pedestrian view into the flat state vector [x, y, vx, vy] * N.
inline Vec2 pos_of(std::span<const double> s, std::size_t i) { return {s[4 * i], s[4 * i + 1]}; }
inline Vec2 vel_of(std::span<const double> s, std::size_t i) { return {s[4 * i + 2], s[4 * i + 3]}; }

/// phi = sum_i w_pos(x_i, y_i) v_i,y.
double flux_phi(std::span<const double> state, const FluxParams& f);
BoxCounts flux_box_counts(std::span<const double> state, double mu, const FluxParams& f);

/// Angle fed to kappa for neighbour j at offset d = x_j - x_i.
double alignment_angle(Vec2 vi, Vec2 vj, Vec2 d, AlignmentAngle kind);

/// e_al for pedestrian i given the full crowd state.
Vec2 alignment_direction(std::size_t i, std::span<const double> state, const PedParams& p);

/// Diagnostics from the last right-hand-side evaluation.
struct ForceDiagnostics {
    std::uint64_t overlaps = 0;         // pairs or walls closer than 1e-6 m
    std::uint64_t inside_obstacle = 0;  // pedestrians found inside the triangle
};

/// Writes the accelerations of all pedestrians into acc (2 per pedestrian).
/// `input` is the scaled control a*u applied as bias force.
void accelerations(std::span<const double> state, double mu, double input, const PedParams& p,
                   const InputBox& box, std::span<double> acc, ForceDiagnostics* diag = nullptr);

/// Pedestrian corridor as a ControlledSystem. Output is phi; the secondary
/// output is Delta Phi over the trailing tau_max window.
class CrowdSystem final : public ControlledSystem {
public:
    CrowdSystem(PedParams p, FluxParams f, InputBox box, std::uint64_t seed, double dt = 0.1,
                double placement_mu = 0.0);

    std::size_t state_dim() const override { return 4 * static_cast<std::size_t>(params_.n_ped); }
    void rhs(std::span<const double> x, double mu, double input, std::span<double> dxdt) const override;
    double output(std::span<const double> x) override { return flux_phi(x, flux_); }
    void post_step(std::span<double> x, double mu) override;
    std::optional<double> secondary_output() const override { return delta_phi(); }
    State initial_state() override;
    double recommended_dt() const override { return dt_; }
    std::string name() const override { return "crowd"; }

    double delta_phi() const;
    std::uint64_t reinjections() const noexcept { return reinjections_; }
    /// Re-injections where no draw found the requested clearance.
    std::uint64_t crowded_entries() const noexcept { return entry_crowded_; }

    static constexpr double kEntryClearance = 0.3;
    static constexpr int kEntryDraws = 20;
    const ForceDiagnostics& diagnostics() const noexcept { return diag_; }
    const PedParams& params() const noexcept { return params_; }
    const FluxParams& flux() const noexcept { return flux_; }
    const InputBox& box() const noexcept { return box_; }

private:
    double entry_x(std::span<const double> x, std::size_t self);

    PedParams params_;
    FluxParams flux_;
    InputBox box_;
    double dt_;
    double placement_mu_;
    std::mt19937_64 rng_;
    std::vector<int> dphi_window_;
    std::size_t dphi_next_ = 0;
    std::size_t dphi_count_ = 0;
    std::uint64_t reinjections_ = 0;
    std::uint64_t entry_crowded_ = 0;
    mutable ForceDiagnostics diag_;
};

/// CSV `id,x,y,vx,vy`.
void write_snapshot_csv(std::ostream& os, std::span<const double> state);

}  // namespace cbc::ped
