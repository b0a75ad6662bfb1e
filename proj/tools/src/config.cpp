#include "cbc/cli/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>

namespace cbc::cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
    if (t == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || std::isnan(v))
        throw ConfigError("invalid number for '" + key + "': '" + text + "'");
    return v;
}

template <class Int>
Int parse_int(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    Int v{};
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
        throw ConfigError("invalid integer for '" + key + "': '" + text + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw ConfigError("invalid boolean for '" + key + "': '" + text + "'");
}

std::string fmt(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Binding {
    std::string key;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

// Accessors return a reference into a mutable config; the getter side casts
// constness away since it only reads.
template <class F>
Binding real(std::string key, F field) {
    return {key, [field, key](RunConfig& c, const std::string& s) { field(c) = parse_double(key, s); },
            [field](const RunConfig& c) { return fmt(field(const_cast<RunConfig&>(c))); }};
}

template <class F>
Binding integer(std::string key, F field) {
    using T = std::remove_reference_t<decltype(field(std::declval<RunConfig&>()))>;
    return {key, [field, key](RunConfig& c, const std::string& s) { field(c) = parse_int<T>(key, s); },
            [field](const RunConfig& c) { return std::to_string(field(const_cast<RunConfig&>(c))); }};
}

template <class F>
Binding boolean(std::string key, F field) {
    return {key, [field, key](RunConfig& c, const std::string& s) { field(c) = parse_bool(key, s); },
            [field](const RunConfig& c) { return std::string(field(const_cast<RunConfig&>(c)) ? "true" : "false"); }};
}

std::vector<Binding> make_bindings() {
    std::vector<Binding> b;
    // [run]
    b.push_back({"run.system",
                 [](RunConfig& c, const std::string& s) {
                     const std::string t = trim(s);
                     if (t != "crowd" && t != "fold" && t != "pitchfork" && t != "slowfast")
                         throw ConfigError("invalid value for 'run.system': '" + s +
                                           "' (expected crowd, fold, pitchfork or slowfast)");
                     c.system = t;
                 },
                 [](const RunConfig& c) { return c.system; }});
    b.push_back(integer("run.seed", [](RunConfig& c) -> std::uint64_t& { return c.seed; }));
    b.push_back({"run.out", [](RunConfig& c, const std::string& s) { c.out = trim(s); },
                 [](const RunConfig& c) { return c.out; }});
    b.push_back(real("run.dt", [](RunConfig& c) -> double& { return c.dt; }));
    b.push_back(real("run.max_time", [](RunConfig& c) -> double& { return c.max_time; }));
    b.push_back(integer("run.n_min", [](RunConfig& c) -> int& { return c.n_min; }));
    b.push_back(real("run.tol_std", [](RunConfig& c) -> double& { return c.tol_std; }));
    b.push_back(real("run.tol_std_mu", [](RunConfig& c) -> double& { return c.tol_std_mu; }));
    b.push_back(real("run.divergence_bound", [](RunConfig& c) -> double& { return c.divergence_bound; }));
    b.push_back(boolean("run.log_trajectory", [](RunConfig& c) -> bool& { return c.log_trajectory; }));

    // [corridor]
    b.push_back(real("corridor.length", [](RunConfig& c) -> double& { return c.model.corridor_length; }));
    b.push_back(real("corridor.width", [](RunConfig& c) -> double& { return c.model.corridor_width; }));
    b.push_back(integer("corridor.n_ped", [](RunConfig& c) -> int& { return c.model.n_ped; }));
    b.push_back(real("corridor.base_length", [](RunConfig& c) -> double& { return c.model.base_length; }));
    b.push_back(real("corridor.leg_length", [](RunConfig& c) -> double& { return c.model.leg_length; }));
    b.push_back(real("corridor.target_x", [](RunConfig& c) -> double& { return c.model.x_trg.x; }));
    b.push_back(real("corridor.target_y", [](RunConfig& c) -> double& { return c.model.x_trg.y; }));

    // [model]
    b.push_back(real("model.v_trg", [](RunConfig& c) -> double& { return c.model.v_trg; }));
    b.push_back(real("model.tau", [](RunConfig& c) -> double& { return c.model.tau; }));
    b.push_back(real("model.V_ped", [](RunConfig& c) -> double& { return c.model.V_ped; }));
    b.push_back(real("model.sigma_ped", [](RunConfig& c) -> double& { return c.model.sigma_ped; }));
    b.push_back(real("model.V_obj", [](RunConfig& c) -> double& { return c.model.V_obj; }));
    b.push_back(real("model.sigma_obj", [](RunConfig& c) -> double& { return c.model.sigma_obj; }));
    b.push_back(real("model.p_al", [](RunConfig& c) -> double& { return c.model.p_al; }));
    b.push_back(real("model.gamma", [](RunConfig& c) -> double& { return c.model.gamma; }));
    b.push_back(real("model.beta", [](RunConfig& c) -> double& { return c.model.beta; }));
    b.push_back(real("model.alpha", [](RunConfig& c) -> double& { return c.model.alpha; }));
    b.push_back(real("model.sigma_al", [](RunConfig& c) -> double& { return c.model.sigma_al; }));
    b.push_back({"model.alignment_angle",
                 [](RunConfig& c, const std::string& s) {
                     const std::string t = trim(s);
                     if (t == "bearing") c.model.alignment_angle = ped::AlignmentAngle::bearing;
                     else if (t == "heading") c.model.alignment_angle = ped::AlignmentAngle::heading;
                     else throw ConfigError("invalid value for 'model.alignment_angle': '" + s +
                                            "' (expected bearing or heading)");
                 },
                 [](const RunConfig& c) {
                     return std::string(c.model.alignment_angle == ped::AlignmentAngle::bearing ? "bearing"
                                                                                               : "heading");
                 }});

    // [flux]
    b.push_back(real("flux.d", [](RunConfig& c) -> double& { return c.flux.d; }));
    b.push_back(real("flux.eta", [](RunConfig& c) -> double& { return c.flux.eta; }));
    b.push_back(real("flux.x_c_phi", [](RunConfig& c) -> double& { return c.flux.x_c_phi; }));
    b.push_back(real("flux.y_c_phi", [](RunConfig& c) -> double& { return c.flux.y_c_phi; }));
    b.push_back(real("flux.y_len_Phi", [](RunConfig& c) -> double& { return c.flux.y_len_Phi; }));
    b.push_back(real("flux.y_c_Phi", [](RunConfig& c) -> double& { return c.flux.y_c_Phi; }));
    b.push_back(real("flux.tau_max", [](RunConfig& c) -> double& { return c.flux.tau_max; }));

    // [input]
    b.push_back(real("input.y_len", [](RunConfig& c) -> double& { return c.input.y_len; }));
    b.push_back(real("input.x_wth", [](RunConfig& c) -> double& { return c.input.x_wth; }));
    b.push_back(real("input.y_c", [](RunConfig& c) -> double& { return c.input.y_c; }));

    // normal forms
    b.push_back(real("fold.x0", [](RunConfig& c) -> double& { return c.fold.x0; }));
    b.push_back(real("fold.noise", [](RunConfig& c) -> double& { return c.fold.noise; }));
    b.push_back(real("pitchfork.a_wo", [](RunConfig& c) -> double& { return c.pitchfork.a_wo; }));
    b.push_back(real("pitchfork.x0", [](RunConfig& c) -> double& { return c.pitchfork.x0; }));
    b.push_back(real("slowfast.eps", [](RunConfig& c) -> double& { return c.slowfast.eps; }));
    b.push_back(real("slowfast.x0", [](RunConfig& c) -> double& { return c.slowfast.x0; }));
    b.push_back(real("slowfast.noise", [](RunConfig& c) -> double& { return c.slowfast.noise; }));

    // [sweep]
    b.push_back(real("sweep.mu_start", [](RunConfig& c) -> double& { return c.sweep.mu_start; }));
    b.push_back(real("sweep.mu_end", [](RunConfig& c) -> double& { return c.sweep.mu_end; }));
    b.push_back(real("sweep.step", [](RunConfig& c) -> double& { return c.sweep.step; }));
    b.push_back(real("sweep.hold_time", [](RunConfig& c) -> double& { return c.sweep.hold_time; }));

    // [control]
    b.push_back({"control.law",
                 [](RunConfig& c, const std::string& s) {
                     const std::string t = trim(s);
                     if (t == "washout") c.control.law = LawKind::washout;
                     else if (t == "param") c.control.law = LawKind::param;
                     else if (t == "zie") c.control.law = LawKind::zie;
                     else throw ConfigError("invalid value for 'control.law': '" + s +
                                            "' (expected washout, param or zie)");
                 },
                 [](const RunConfig& c) { return to_string(c.control.law); }});
    b.push_back(real("control.a_zie", [](RunConfig& c) -> double& { return c.control.a_zie; }));
    b.push_back(real("control.a_washout", [](RunConfig& c) -> double& { return c.control.a_washout; }));
    b.push_back(real("control.k_st", [](RunConfig& c) -> double& { return c.control.k_st; }));
    b.push_back(real("control.k_wo", [](RunConfig& c) -> double& { return c.control.k_wo; }));
    b.push_back(real("control.k_st_y", [](RunConfig& c) -> double& { return c.control.k_st_y; }));
    b.push_back(real("control.k_st_mu", [](RunConfig& c) -> double& { return c.control.k_st_mu; }));
    b.push_back(real("control.gain_cap", [](RunConfig& c) -> double& { return c.control.gain_cap; }));
    b.push_back(real("control.runaway_radius", [](RunConfig& c) -> double& { return c.control.runaway_radius; }));
    b.push_back(integer("control.sigma", [](RunConfig& c) -> int& { return c.control.sigma; }));
    b.push_back(real("control.y_ref", [](RunConfig& c) -> double& { return c.control.y_ref; }));
    b.push_back(real("control.mu_ref", [](RunConfig& c) -> double& { return c.control.mu_ref; }));
    b.push_back(boolean("control.check_controllability",
                        [](RunConfig& c) -> bool& { return c.control.check_controllability; }));

    // [continuation]
    b.push_back(real("continuation.h", [](RunConfig& c) -> double& { return c.continuation.h; }));
    b.push_back(integer("continuation.max_halvings", [](RunConfig& c) -> int& { return c.continuation.max_halvings; }));
    b.push_back(integer("continuation.max_points", [](RunConfig& c) -> int& { return c.continuation.max_points; }));
    b.push_back(integer("continuation.max_failures", [](RunConfig& c) -> int& { return c.continuation.max_failures; }));
    b.push_back(real("continuation.mu_min", [](RunConfig& c) -> double& { return c.continuation.mu_min; }));
    b.push_back(real("continuation.mu_max", [](RunConfig& c) -> double& { return c.continuation.mu_max; }));
    b.push_back({"continuation.anchors",
                 [](RunConfig& c, const std::string& s) {
                     c.continuation.anchors.clear();
                     std::string item;
                     std::size_t pos = 0;
                     const std::string t = trim(s);
                     if (t.empty()) return;
                     while (pos <= t.size()) {
                         const auto comma = t.find(',', pos);
                         item = t.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
                         c.continuation.anchors.push_back(parse_double("continuation.anchors", item));
                         if (comma == std::string::npos) break;
                         pos = comma + 1;
                     }
                 },
                 [](const RunConfig& c) {
                     std::string out;
                     for (std::size_t i = 0; i < c.continuation.anchors.size(); ++i)
                         out += (i ? "," : "") + fmt(c.continuation.anchors[i]);
                     return out;
                 }});
    b.push_back(real("continuation.direction_mu", [](RunConfig& c) -> double& { return c.continuation.direction_mu; }));
    b.push_back(real("continuation.direction_y", [](RunConfig& c) -> double& { return c.continuation.direction_y; }));
    b.push_back(real("continuation.settle_from", [](RunConfig& c) -> double& { return c.continuation.settle_from; }));
    b.push_back(real("continuation.settle_time", [](RunConfig& c) -> double& { return c.continuation.settle_time; }));

    // [check]
    b.push_back(real("check.mu", [](RunConfig& c) -> double& { return c.check.mu; }));
    b.push_back(real("check.x", [](RunConfig& c) -> double& { return c.check.x; }));
    b.push_back(real("check.fd_step", [](RunConfig& c) -> double& { return c.check.fd_step; }));
    return b;
}

const std::vector<Binding>& bindings() {
    static const std::vector<Binding> b = make_bindings();
    return b;
}

}  // namespace

void set_value(RunConfig& cfg, const std::string& dotted_key, const std::string& value) {
    const auto& b = bindings();
    const auto it = std::find_if(b.begin(), b.end(), [&](const Binding& x) { return x.key == dotted_key; });
    if (it == b.end()) throw ConfigError("unknown config key '" + dotted_key + "'");
    it->set(cfg, value);
}

void load_ini(RunConfig& cfg, const std::string& path) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(path, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(e.what());
    }
    for (const auto& [section, body] : tree) {
        if (body.empty()) throw ConfigError("config key '" + section + "' is outside any [section]");
        for (const auto& [key, node] : body) set_value(cfg, section + "." + key, node.data());
    }
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not of the form section.key=value");
    set_value(cfg, trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

void validate(const RunConfig& c) {
    auto need = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError(msg);
    };
    need(c.dt >= 0.0, "'run.dt' must be >= 0 (0 selects the system default)");
    need(c.max_time > 0.0, "'run.max_time' must be positive");
    need(c.n_min >= 2, "'run.n_min' must be at least 2");
    need(c.tol_std >= 0.0, "'run.tol_std' must be >= 0 (0 selects the system default)");
    need(c.tol_std_mu >= 0.0, "'run.tol_std_mu' must be non-negative (0 selects the system default)");
    need(c.divergence_bound > 0.0, "'run.divergence_bound' must be positive");
    need(c.model.n_ped >= 0, "'corridor.n_ped' must be >= 0");
    need(c.model.leg_length > 0.5 * c.model.base_length, "'corridor.leg_length' must exceed half the base length");
    need(c.sweep.step > 0.0, "'sweep.step' must be positive");
    need(c.sweep.hold_time > 0.0, "'sweep.hold_time' must be positive");
    need(c.sweep.mu_end >= c.sweep.mu_start, "'sweep.mu_end' must not be below 'sweep.mu_start'");
    need(c.control.k_wo != 0.0, "'control.k_wo' must be non-zero");
    need(c.control.gain_cap > 0.0, "'control.gain_cap' must be positive");
    need(c.control.sigma == 1 || c.control.sigma == -1, "'control.sigma' must be 1 or -1");
    need(c.continuation.h > 0.0, "'continuation.h' must be positive");
    need(c.continuation.max_halvings >= 0, "'continuation.max_halvings' must be >= 0");
    need(c.continuation.max_points > 0, "'continuation.max_points' must be positive");
    need(c.continuation.max_failures > 0, "'continuation.max_failures' must be positive");
    need(c.continuation.mu_min < c.continuation.mu_max, "'continuation.mu_min' must be below 'continuation.mu_max'");
    need(c.continuation.settle_time > 0.0, "'continuation.settle_time' must be positive");
    need(c.continuation.direction_mu != 0.0 || c.continuation.direction_y != 0.0,
         "'continuation.direction_mu' and 'continuation.direction_y' cannot both be zero");
    need(c.check.fd_step > 0.0, "'check.fd_step' must be positive");
    need(c.fold.noise >= 0.0, "'fold.noise' must be >= 0");
    need(c.slowfast.noise >= 0.0, "'slowfast.noise' must be >= 0");
    need(c.slowfast.eps > 0.0, "'slowfast.eps' must be positive");
}

std::vector<std::pair<std::string, std::string>> dump(const RunConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& b : bindings()) out.emplace_back(b.key, b.get(cfg));
    return out;
}

std::vector<std::string> known_keys() {
    std::vector<std::string> out;
    for (const auto& b : bindings()) out.push_back(b.key);
    return out;
}

std::uint64_t config_hash(const RunConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto feed = [&h](const std::string& s) {
        for (unsigned char ch : s) {
            h ^= ch;
            h *= 0x100000001b3ull;
        }
    };
    for (const auto& [k, v] : dump(cfg)) {
        if (k == "run.seed" || k == "run.out") continue;
        feed(k);
        feed("=");
        feed(v);
        feed("\n");
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace cbc::cli
