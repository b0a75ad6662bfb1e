#include "cbc/pedsim.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <ostream>

namespace cbc::ped {

namespace {

constexpr double kMinDistance = 1e-6;

Vec2 target_direction(Vec2 pos, const PedParams& p) {
    const Vec2 d = p.x_trg - pos;
    const double n = norm(d);
    if (n == 0.0) throw InputError("target_direction: pedestrian sits on the target point");
    return (1.0 / n) * d;
}

Vec2 closest_on_segment(Vec2 pos, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    double t = len2 > 0.0 ? dot(pos - a, ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return a + t * ab;
}

}  // namespace

Vec2 target_force(Vec2 pos, Vec2 vel, const PedParams& p) {
    const Vec2 e = target_direction(pos, p);
    return (1.0 / p.tau) * (p.v_trg * e - vel);
}

double repulsion_magnitude(double r, double V, double sigma) {
    if (r >= sigma) return 0.0;
    r = std::max(r, kMinDistance);
    const double g = 0.5 * std::numbers::pi * (r / sigma - 1.0);
    return -V * (std::tan(g) - g);
}

Vec2 repulsion_force(Vec2 r_vec, double V, double sigma) {
    const double r = norm(r_vec);
    if (r >= sigma) return {};
    if (r == 0.0) return {};  // no direction to push along
    return (-repulsion_magnitude(r, V, sigma) / r) * r_vec;
}

Triangle obstacle_triangle(double mu, const PedParams& p) {
    const double h = p.obstacle_height();
    const double half = 0.5 * p.base_length;
    return {{mu, 0.0}, {mu - half, h}, {mu + half, h}};
}

bool inside_triangle(Vec2 pos, const Triangle& tri) {
    const double d1 = cross(tri.left - tri.tip, pos - tri.tip);
    const double d2 = cross(tri.right - tri.left, pos - tri.left);
    const double d3 = cross(tri.tip - tri.right, pos - tri.right);
    const bool has_neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
    const bool has_pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
    return !(has_neg && has_pos);
}

Vec2 triangle_closest_point(Vec2 pos, const Triangle& tri) {
    const Vec2 c[3] = {closest_on_segment(pos, tri.tip, tri.left), closest_on_segment(pos, tri.left, tri.right),
                       closest_on_segment(pos, tri.right, tri.tip)};
    Vec2 best = c[0];
    double best_d = norm(c[0] - pos);
    for (int k = 1; k < 3; ++k) {
        const double d = norm(c[k] - pos);
        if (d < best_d) {
            best_d = d;
            best = c[k];
        }
    }
    return best;
}

double kappa(double r, double theta, const PedParams& p) {
    const double s2 = p.sigma_al * p.sigma_al;
    // Test the square: r < sigma_al can still round to r * r == s2.
    if (r * r >= s2) return 0.0;
    return p.gamma / (1.0 + std::exp(-p.alpha * std::cos(p.beta * theta))) * std::exp(s2 / (r * r - s2));
}

int bias_indicator(Vec2 pos, double mu, const InputBox& box) {
    return std::abs(pos.x - mu) <= box.x_wth && std::abs(pos.y - box.y_c) <= box.y_len ? 1 : 0;
}

double exp_integral_E1(double z) {
    if (!(z > 0.0)) throw InputError("exp_integral_E1: argument must be positive");
    if (std::isinf(z)) return 0.0;
    constexpr double eps = 1e-16;
    if (z <= 1.0) {
        // -gamma - ln z - sum_{k>=1} (-z)^k / (k k!)
        double sum = 0.0;
        double term = 1.0;  // (-z)^k / k!
        for (int k = 1; k < 200; ++k) {
            term *= -z / k;
            const double add = term / k;
            sum += add;
            if (std::abs(add) < eps * std::abs(sum)) break;
        }
        return -std::numbers::egamma - std::log(z) - sum;
    }
    // Continued fraction, modified Lentz.
    const double tiny = std::numeric_limits<double>::min() / eps;
    double b = z + 1.0;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 1000; ++i) {
        const double an = -static_cast<double>(i) * i;
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        const double del = c * d;
        h *= del;
        if (std::abs(del - 1.0) < eps) break;
    }
    return h * std::exp(-z);
}

namespace {

double kernel_E(double x, double r2, const FluxParams& f) {
    const double d2 = f.d * f.d;
    if (r2 >= d2) return 0.0;
    return f.eta * std::abs(x) * exp_integral_E1(d2 / (d2 - r2));
}

}  // namespace

double flux_weight(double x, double y, const FluxParams& f) {
    const double dy2 = (y - f.y_c_phi) * (y - f.y_c_phi);
    const double r_minus2 = (x - f.x_c_phi) * (x - f.x_c_phi) + dy2;
    const double r_plus2 = (x + f.x_c_phi) * (x + f.x_c_phi) + dy2;
    return kernel_E(x, r_minus2, f) - kernel_E(x, r_plus2, f);
}

double flux_phi(std::span<const double> state, const FluxParams& f) {
    const std::size_t n = state.size() / 4;
    double phi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = flux_weight(state[4 * i], state[4 * i + 1], f);
        if (w != 0.0) phi += w * state[4 * i + 3];
    }
    return phi;
}

BoxCounts flux_box_counts(std::span<const double> state, double mu, const FluxParams& f) {
    BoxCounts c;
    const std::size_t n = state.size() / 4;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 pos = pos_of(state, i);
        if (std::abs(pos.y - f.y_c_Phi) > f.y_len_Phi) continue;
        if (pos.x > mu) ++c.plus;
        else if (pos.x < mu) ++c.minus;
    }
    return c;
}

namespace {

Vec2 blend_direction(Vec2 e_trg, double weight_sum, Vec2 weighted_v, const PedParams& p) {
    if (!(weight_sum > 0.0)) return e_trg;
    // Divide componentwise: the weights can be subnormal far out in the
    // kernel tail and 1 / weight_sum would overflow.
    const Vec2 mean_v{weighted_v.x / weight_sum, weighted_v.y / weight_sum};
    const Vec2 mix = (1.0 - p.p_al) * e_trg + p.p_al * mean_v;
    const double n = norm(mix);
    if (n < 1e-9) return e_trg;
    return (1.0 / n) * mix;
}

}  // namespace

double alignment_angle(Vec2 vi, Vec2 vj, Vec2 d, AlignmentAngle kind) {
    const Vec2 other = kind == AlignmentAngle::bearing ? d : vj;
    return std::atan2(cross(vi, other), dot(vi, other));
}

Vec2 alignment_direction(std::size_t i, std::span<const double> state, const PedParams& p) {
    const std::size_t n = state.size() / 4;
    const Vec2 pi = pos_of(state, i);
    const Vec2 vi = vel_of(state, i);
    double wsum = 0.0;
    Vec2 wv;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double r = norm(pos_of(state, j) - pi);
        if (r >= p.sigma_al) continue;
        const Vec2 vj = vel_of(state, j);
        const double k = kappa(r, alignment_angle(vi, vj, pos_of(state, j) - pi, p.alignment_angle), p);
        wsum += k;
        wv += k * vj;
    }
    return blend_direction(target_direction(pi, p), wsum, wv, p);
}

void accelerations(std::span<const double> state, double mu, double input, const PedParams& p,
                   const InputBox& box, std::span<double> acc, ForceDiagnostics* diag) {
    const std::size_t n = state.size() / 4;
    std::fill(acc.begin(), acc.end(), 0.0);

    // Pair loop: each unordered pair once, both partners updated. The bearing
    // angle differs for i and j so kappa is evaluated per side.
    std::vector<double> wsum(n, 0.0);
    std::vector<Vec2> wv(n);
    const double sp2 = p.sigma_ped * p.sigma_ped;
    const double sa2 = p.sigma_al * p.sigma_al;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 pi = pos_of(state, i);
        const Vec2 vi = vel_of(state, i);
        for (std::size_t j = i + 1; j < n; ++j) {
            const Vec2 d = pos_of(state, j) - pi;
            const double r2 = dot(d, d);
            if (r2 >= sa2 && r2 >= sp2) continue;
            const double r = std::sqrt(r2);
            if (r2 < sp2) {
                if (r < kMinDistance && diag) ++diag->overlaps;
                if (r > 0.0) {
                    const double m = repulsion_magnitude(r, p.V_ped, p.sigma_ped) / r;
                    acc[2 * i] -= m * d.x;
                    acc[2 * i + 1] -= m * d.y;
                    acc[2 * j] += m * d.x;
                    acc[2 * j + 1] += m * d.y;
                }
            }
            if (r2 < sa2) {
                const Vec2 vj = vel_of(state, j);
                const double ki = kappa(r, alignment_angle(vi, vj, d, p.alignment_angle), p);
                const double kj = p.alignment_angle == AlignmentAngle::heading
                                      ? ki
                                      : kappa(r, alignment_angle(vj, vi, -1.0 * d, p.alignment_angle), p);
                wsum[i] += ki;
                wv[i] += ki * vj;
                wsum[j] += kj;
                wv[j] += kj * vi;
            }
        }
    }

    const Triangle tri = obstacle_triangle(mu, p);
    const double half_w = 0.5 * p.corridor_width;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 pi = pos_of(state, i);
        const Vec2 vi = vel_of(state, i);
        const Vec2 e_al = blend_direction(target_direction(pi, p), wsum[i], wv[i], p);
        Vec2 f = (1.0 / p.tau) * (p.v_trg * e_al - vi);

        // Walls act along their inward normal, also on anyone who has
        // slipped past them.
        const double r_right = std::abs(half_w - pi.x);
        const double r_left = std::abs(pi.x + half_w);
        if (diag && (r_right < kMinDistance || r_left < kMinDistance)) ++diag->overlaps;
        f.x -= repulsion_magnitude(r_right, p.V_obj, p.sigma_obj);
        f.x += repulsion_magnitude(r_left, p.V_obj, p.sigma_obj);

        const Vec2 cp = triangle_closest_point(pi, tri);
        const Vec2 to_cp = cp - pi;
        const double r = norm(to_cp);
        if (r < p.sigma_obj && r > 0.0) {
            const double m = repulsion_magnitude(r, p.V_obj, p.sigma_obj) / r;
            if (inside_triangle(pi, tri)) {
                if (diag) ++diag->inside_obstacle;
                f += m * to_cp;  // push out through the nearest edge
            } else {
                f -= m * to_cp;
            }
        } else if (r == 0.0 && diag) {
            ++diag->overlaps;
        }

        if (bias_indicator(pi, mu, box)) f.x += input;
        acc[2 * i] += f.x;
        acc[2 * i + 1] += f.y;
    }
}

// ---------------------------------------------------------------------------

CrowdSystem::CrowdSystem(PedParams p, FluxParams f, InputBox box, std::uint64_t seed, double dt,
                         double placement_mu)
    : params_(p), flux_(f), box_(box), dt_(dt), placement_mu_(placement_mu), rng_(seed) {
    if (params_.n_ped < 0) throw InputError("CrowdSystem: pedestrian count must be non-negative");
    if (!(dt_ > 0.0)) throw InputError("CrowdSystem: dt must be positive");
    const auto window = static_cast<std::size_t>(std::max(1.0, std::round(flux_.tau_max / dt_)));
    dphi_window_.assign(window, 0);
}

void CrowdSystem::rhs(std::span<const double> x, double mu, double input, std::span<double> dxdt) const {
    const std::size_t n = x.size() / 4;
    std::vector<double> acc(2 * n);
    accelerations(x, mu, input, params_, box_, acc, &diag_);
    for (std::size_t i = 0; i < n; ++i) {
        dxdt[4 * i] = x[4 * i + 2];
        dxdt[4 * i + 1] = x[4 * i + 3];
        dxdt[4 * i + 2] = acc[2 * i];
        dxdt[4 * i + 3] = acc[2 * i + 1];
    }
}

void CrowdSystem::post_step(std::span<double> x, double mu) {
    const std::size_t n = x.size() / 4;
    const double exit_y = 0.5 * params_.corridor_length;
    for (std::size_t i = 0; i < n; ++i) {
        if (x[4 * i + 1] <= exit_y) continue;
        x[4 * i] = entry_x(x, i);
        x[4 * i + 1] = -exit_y;
        x[4 * i + 2] = 0.0;
        x[4 * i + 3] = params_.v_trg;
        ++reinjections_;
    }
    const BoxCounts c = flux_box_counts(x, mu, flux_);
    dphi_window_[dphi_next_] = c.plus - c.minus;
    dphi_next_ = (dphi_next_ + 1) % dphi_window_.size();
    ++dphi_count_;
}

double CrowdSystem::entry_x(std::span<const double> x, std::size_t self) {
    // Uniform draw on [-0.5, 0.5], redrawn while it lands on top of someone
    // already standing at the entry; the repulsion pole would otherwise blow
    // up the fixed-step integrator. Falls back to the roomiest draw.
    const std::size_t n = x.size() / 4;
    const Vec2 entry{0.0, -0.5 * params_.corridor_length};
    double best_x = 0.0;
    double best_gap = -1.0;
    for (int attempt = 0; attempt < kEntryDraws; ++attempt) {
        const double cand = -0.5 + uniform01(rng_);
        double gap = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (j == self) continue;
            gap = std::min(gap, norm(pos_of(x, j) - Vec2{cand, entry.y}));
        }
        if (gap >= kEntryClearance) return cand;
        if (gap > best_gap) {
            best_gap = gap;
            best_x = cand;
        }
    }
    ++entry_crowded_;
    return best_x;
}

double CrowdSystem::delta_phi() const {
    const std::size_t n = std::min(dphi_count_, dphi_window_.size());
    if (n == 0) return 0.0;
    long sum = 0;
    for (std::size_t k = 0; k < n; ++k) sum += dphi_window_[k];
    return static_cast<double>(sum) / static_cast<double>(n);
}

State CrowdSystem::initial_state() {
    // Rejection sampling with a minimum spacing, relaxed if the corridor
    // gets too crowded to place the next pedestrian.
    const auto n = static_cast<std::size_t>(params_.n_ped);
    const Triangle tri = obstacle_triangle(placement_mu_, params_);
    const double half_len = 0.5 * params_.corridor_length - 0.5;
    const double half_w = 0.5 * params_.corridor_width - 0.7;
    double spacing = 0.8;
    std::vector<Vec2> placed;
    placed.reserve(n);
    while (placed.size() < n) {
        bool ok = false;
        for (int attempt = 0; attempt < 2000 && !ok; ++attempt) {
            const Vec2 c{-half_w + 2.0 * half_w * uniform01(rng_), -half_len + 2.0 * half_len * uniform01(rng_)};
            if (inside_triangle(c, tri) || norm(triangle_closest_point(c, tri) - c) < 0.5) continue;
            ok = std::all_of(placed.begin(), placed.end(), [&](Vec2 q) { return norm(q - c) >= spacing; });
            if (ok) placed.push_back(c);
        }
        if (!ok) spacing *= 0.8;
    }
    State s(4 * n);
    for (std::size_t i = 0; i < n; ++i) {
        s[4 * i] = placed[i].x;
        s[4 * i + 1] = placed[i].y;
        s[4 * i + 2] = 0.0;
        s[4 * i + 3] = params_.v_trg;
    }
    return s;
}

void write_snapshot_csv(std::ostream& os, std::span<const double> state) {
    os << "id,x,y,vx,vy\n";
    const auto old_precision = os.precision(10);
    for (std::size_t i = 0; i < state.size() / 4; ++i)
        os << i << ',' << state[4 * i] << ',' << state[4 * i + 1] << ',' << state[4 * i + 2] << ','
           << state[4 * i + 3] << '\n';
    os.precision(old_precision);
}

}  // namespace cbc::ped
