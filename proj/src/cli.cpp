#include "surf4/cli.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <utility>

#include "surf4/errors.hpp"
#include "surf4/version.hpp"

namespace surf4 {

namespace {

const double kPi = 3.14159265358979323846;

const Vec4 kPlaneNormal{1, 0, 0, 0};
const Vec4 kCircleAxis{0, 1, 0, 0};

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& raw, double* out) {
    const std::string v = trim(raw);
    if (v.empty()) return false;
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end != v.c_str() + v.size()) return false;
    *out = x;
    return true;
}

bool parse_int(const std::string& raw, int* out) {
    const std::string v = trim(raw);
    if (v.empty()) return false;
    char* end = nullptr;
    const long x = std::strtol(v.c_str(), &end, 10);
    if (end != v.c_str() + v.size()) return false;
    *out = static_cast<int>(x);
    return true;
}

std::vector<std::string> split_list(const std::string& raw) {
    std::vector<std::string> out;
    std::string piece;
    std::istringstream in(raw);
    while (std::getline(in, piece, ',')) {
        piece = trim(piece);
        if (!piece.empty()) out.push_back(piece);
    }
    return out;
}

bool known_check(const std::string& name) {
    static const char* kNames[] = {"CR", "T_constant", "N_constant", "GCR",
                                   "CSS"};
    for (const char* n : kNames) {
        if (name == n) return true;
    }
    return false;
}

bool set_key(RunConfig& c, const std::string& key, const std::string& value,
             std::string* err);

// Presets, written in the config language itself so overrides compose.
struct BuiltinDef {
    const char* name;
    std::vector<std::pair<const char*, const char*>> keys;
};

const std::vector<BuiltinDef>& builtin_table() {
    static const char* kTwoPi = "6.2831853071795865";
    static const std::vector<BuiltinDef> table = {
        {"css_pi6",
         {{"surface.family", "css"},
          {"surface.theta", "0.52359877559829887"},
          {"surface.radius", "1"},
          {"grid.s_min", "1.25"},
          {"grid.s_max", "2"},
          {"grid.t_min", "0"},
          {"grid.t_max", kTwoPi}}},
        {"css_pi4",
         {{"surface.family", "css"},
          {"surface.theta", "0.78539816339744831"},
          {"surface.radius", "1"},
          {"grid.s_min", "1.25"},
          {"grid.s_max", "2"},
          {"grid.t_min", "0"},
          {"grid.t_max", kTwoPi}}},
        {"css_pi3",
         {{"surface.family", "css"},
          {"surface.theta", "1.0471975511965976"},
          {"surface.radius", "1"},
          {"grid.s_min", "1.25"},
          {"grid.s_max", "2"},
          {"grid.t_min", "0"},
          {"grid.t_max", kTwoPi}}},
        {"gcr_u_eq_s",
         {{"surface.family", "gcr"},
          {"surface.profile", "linear"},
          {"surface.profile_a", "1"},
          {"surface.profile_b", "0"},
          {"surface.radius", "0.5"},
          {"grid.s_min", "1"},
          {"grid.s_max", "2"},
          {"grid.t_min", "0"},
          {"grid.t_max", kTwoPi}}},
        {"gcr_u_eq_s2",
         {{"surface.family", "gcr"},
          {"surface.profile", "quadratic"},
          {"surface.profile_a", "1"},
          {"surface.profile_b", "0"},
          {"surface.radius", "0.5"},
          {"grid.s_min", "1"},
          {"grid.s_max", "2"},
          {"grid.t_min", "0"},
          {"grid.t_max", kTwoPi}}},
        {"gcr_u_log",
         {{"surface.family", "gcr"},
          {"surface.profile", "log_linear"},
          {"surface.profile_a", "2"},
          {"surface.profile_b", "1"},
          {"surface.radius", "0.5"},
          {"grid.s_min", "1"},
          {"grid.s_max", "2"},
          {"grid.t_min", "0"},
          {"grid.t_max", kTwoPi}}},
        {"cylinder",
         {{"surface.family", "cylinder"},
          {"grid.s_min", "0.25"},
          {"grid.s_max", "1.25"},
          {"grid.t_min", "0"},
          {"grid.t_max", "1.5"}}},
        {"plane",
         {{"surface.family", "plane"},
          {"grid.s_min", "0.5"},
          {"grid.s_max", "1.5"},
          {"grid.t_min", "0.5"},
          {"grid.t_max", "1.5"}}},
        {"sphere",
         {{"surface.family", "sphere"},
          {"grid.s_min", "0.2"},
          {"grid.s_max", "1.2"},
          {"grid.t_min", "0.2"},
          {"grid.t_max", "1.2"}}},
    };
    return table;
}

bool apply_builtin(RunConfig& c, const std::string& name, std::string* err) {
    for (const BuiltinDef& def : builtin_table()) {
        if (name != def.name) continue;
        for (const auto& [k, v] : def.keys) {
            if (!set_key(c, k, v, err)) return false;  // presets are vetted
        }
        c.builtin = name;
        return true;
    }
    *err = "unknown builtin '" + name + "'";
    return false;
}

bool set_double(const std::string& value, double* field, const char* key,
                std::string* err) {
    if (!parse_double(value, field)) {
        *err = std::string("invalid number for ") + key + ": '" + value + "'";
        return false;
    }
    return true;
}

bool set_positive(const std::string& value, double* field, const char* key,
                  std::string* err) {
    if (!set_double(value, field, key, err)) return false;
    if (!(*field > 0.0)) {
        *err = std::string(key) + " must be positive";
        return false;
    }
    return true;
}

bool set_key(RunConfig& c, const std::string& key, const std::string& value,
             std::string* err) {
    if (key == "surface.builtin") return apply_builtin(c, value, err);
    if (key == "surface.family") {
        static const char* kFamilies[] = {"css", "gcr", "cylinder", "plane",
                                          "sphere"};
        for (const char* f : kFamilies) {
            if (value == f) {
                c.family = value;
                return true;
            }
        }
        *err = "unknown surface.family '" + value + "'";
        return false;
    }
    if (key == "surface.theta") return set_double(value, &c.theta, key.c_str(), err);
    if (key == "surface.profile") {
        if (value != "linear" && value != "quadratic" && value != "log_linear") {
            *err = "unknown surface.profile '" + value + "'";
            return false;
        }
        c.profile = value;
        return true;
    }
    if (key == "surface.profile_a")
        return set_double(value, &c.profile_a, key.c_str(), err);
    if (key == "surface.profile_b")
        return set_double(value, &c.profile_b, key.c_str(), err);
    if (key == "surface.radius")
        return set_double(value, &c.radius, key.c_str(), err);
    if (key == "surface.bump") {
        if (!set_double(value, &c.bump, key.c_str(), err)) return false;
        if (c.bump < 0.0) {
            *err = "surface.bump must be >= 0";
            return false;
        }
        return true;
    }
    if (key == "surface.alpha") return set_double(value, &c.alpha, key.c_str(), err);
    if (key == "surface.beta") return set_double(value, &c.beta, key.c_str(), err);
    if (key == "grid.s_min") return set_double(value, &c.s_min, key.c_str(), err);
    if (key == "grid.s_max") return set_double(value, &c.s_max, key.c_str(), err);
    if (key == "grid.t_min") return set_double(value, &c.t_min, key.c_str(), err);
    if (key == "grid.t_max") return set_double(value, &c.t_max, key.c_str(), err);
    if (key == "grid.ns" || key == "grid.nt") {
        int n = 0;
        if (!parse_int(value, &n)) {
            *err = "invalid integer for " + key + ": '" + value + "'";
            return false;
        }
        if (n < 5) {
            *err = key + " must be at least 5";
            return false;
        }
        (key == "grid.ns" ? c.ns : c.nt) = n;
        return true;
    }
    if (key == "scheme.kind") {
        if (value != "analytic" && value != "central" && value != "richardson") {
            *err = "unknown scheme.kind '" + value + "'";
            return false;
        }
        c.scheme = value;
        return true;
    }
    if (key == "scheme.h") {
        if (!set_double(value, &c.scheme_h, key.c_str(), err)) return false;
        if (c.scheme_h < 0.0) {
            *err = "scheme.h must be >= 0";
            return false;
        }
        return true;
    }
    if (key == "checks") {
        std::vector<std::string> tokens = split_list(value);
        if (tokens.empty()) {
            *err = "checks must list at least one detector";
            return false;
        }
        for (const std::string& t : tokens) {
            if (!known_check(t)) {
                *err = "unknown check '" + t + "'";
                return false;
            }
        }
        c.checks = std::move(tokens);
        return true;
    }
    if (key == "tol.class") return set_positive(value, &c.tol_class, key.c_str(), err);
    if (key == "tol.vanish")
        return set_positive(value, &c.tol_vanish, key.c_str(), err);
    if (key == "tol.flat") return set_positive(value, &c.tol_flat, key.c_str(), err);
    if (key == "tol.path") return set_positive(value, &c.tol_path, key.c_str(), err);
    if (key == "project.mode") {
        if (value != "orthogonal" && value != "stereographic") {
            *err = "unknown project.mode '" + value + "'";
            return false;
        }
        c.project_mode = value;
        return true;
    }
    if (key == "project.drop") {
        int a = 0;
        if (!parse_int(value, &a) || a < 1 || a > 4) {
            *err = "project.drop must be an axis index in 1..4";
            return false;
        }
        c.project_drop = a;
        return true;
    }
    if (key == "output.path") {
        c.out_path = value;
        return true;
    }
    *err = "unknown key '" + key + "'";
    return false;
}

bool eq(double a, double b) {
    return (std::isnan(a) && std::isnan(b)) || a == b;
}

bool grid_range_set(double lo, double hi) {
    return !std::isnan(lo) && !std::isnan(hi);
}

SlopeProfile profile_from(const RunConfig& c) {
    if (c.family == "css") return SlopeProfile::constant_theta(c.theta);
    if (c.profile == "linear") return profile_linear(c.profile_a, c.profile_b);
    if (c.profile == "quadratic")
        return profile_quadratic(c.profile_a, c.profile_b);
    return profile_log_linear(c.profile_a, c.profile_b);
}

using DetectorFn = ClassVerdict (*)(const ImmersionPatch&,
                                    const DetectorOptions&);

DetectorFn detector_for(const std::string& name) {
    if (name == "CR") return &is_constant_ratio;
    if (name == "T_constant") return &is_T_constant;
    if (name == "N_constant") return &is_N_constant;
    if (name == "GCR") return &is_GCR;
    return &is_CSS;
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
    std::string out;
    for (const std::string& p : parts) {
        if (!out.empty()) out += sep;
        out += p;
    }
    return out;
}

// Table cells must stay single-token; notes may carry "; " joins.
std::string compact_note(std::string note) {
    std::string out;
    for (std::size_t i = 0; i < note.size(); ++i) {
        if (note[i] == ' ') {
            if (i > 0 && note[i - 1] == ';') continue;
            out += '_';
        } else {
            out += note[i];
        }
    }
    return out.empty() ? std::string("-") : out;
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] =
            lo + (hi - lo) * i / static_cast<double>(n - 1);
    }
    return out;
}

void write_environment(const RunConfig& c, std::ostream& os) {
    os << "[environment]\n";
    os << "version = " << kVersion << "\n";
    os << "scheme = " << c.scheme << "\n";
    os << "scheme.h = " << num(c.scheme_h) << "\n";
    os << "tol.class = " << (c.tol_class > 0.0 ? num(c.tol_class) : "auto")
       << "\n";
    os << "tol.vanish = " << num(c.tol_vanish) << "\n";
    os << "tol.flat = " << num(c.tol_flat) << "\n";
    os << "tol.path = " << num(c.tol_path) << "\n";
}

void write_surface(const RunConfig& c, const std::string& label,
                   std::ostream& os) {
    os << "[surface]\n";
    os << "label = " << label << "\n";
    os << "family = " << c.family << "\n";
    if (!c.builtin.empty()) os << "builtin = " << c.builtin << "\n";
    if (c.bump > 0.0) os << "bump = " << num(c.bump) << "\n";
}

void write_grid(const DetectorGrid& g, std::ostream& os) {
    os << "[grid]\n";
    os << "ns = " << g.s.size() << "\n";
    os << "nt = " << g.t.size() << "\n";
    os << "s_min = " << num(g.s.front()) << "\n";
    os << "s_max = " << num(g.s.back()) << "\n";
    os << "t_min = " << num(g.t.front()) << "\n";
    os << "t_max = " << num(g.t.back()) << "\n";
}

void write_verdict(const ClassVerdict& v, std::ostream& os) {
    os << "[verdict " << v.class_name << "]\n";
    os << "holds = " << (v.holds ? "true" : "false") << "\n";
    os << "max_deviation = " << num(v.max_deviation) << "\n";
    os << "tolerance = " << num(v.tolerance) << "\n";
    os << "excluded_points = " << v.excluded_points << "\n";
    os << "total_points = " << v.total_points << "\n";
    os << "witness_angle = " << num(v.witness_angle) << "\n";
    os << "witness_phi = " << num(v.witness_phi) << "\n";
    os << "witness_value = " << num(v.witness_value) << "\n";
    os << "flags = " << (v.flags.empty() ? "-" : join(v.flags, ";")) << "\n";
}

void write_errors(const std::vector<std::string>& errors, std::ostream& os) {
    if (errors.empty()) return;
    os << "[errors]\n";
    for (const std::string& e : errors) os << e << "\n";
}

}  // namespace

bool operator==(const RunConfig& a, const RunConfig& b) {
    return a.builtin == b.builtin && a.family == b.family &&
           eq(a.theta, b.theta) && a.profile == b.profile &&
           eq(a.profile_a, b.profile_a) && eq(a.profile_b, b.profile_b) &&
           eq(a.radius, b.radius) && eq(a.bump, b.bump) &&
           eq(a.alpha, b.alpha) && eq(a.beta, b.beta) &&
           eq(a.s_min, b.s_min) && eq(a.s_max, b.s_max) &&
           eq(a.t_min, b.t_min) && eq(a.t_max, b.t_max) && a.ns == b.ns &&
           a.nt == b.nt && a.scheme == b.scheme &&
           eq(a.scheme_h, b.scheme_h) && a.checks == b.checks &&
           eq(a.tol_class, b.tol_class) && eq(a.tol_vanish, b.tol_vanish) &&
           eq(a.tol_flat, b.tol_flat) && eq(a.tol_path, b.tol_path) &&
           a.project_mode == b.project_mode &&
           a.project_drop == b.project_drop && a.out_path == b.out_path;
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig c;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eqpos = line.find('=');
        if (eqpos == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) +
                              ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eqpos));
        const std::string value = trim(line.substr(eqpos + 1));
        if (key.empty()) {
            throw ConfigError("line " + std::to_string(line_no) +
                              ": empty key");
        }
        std::string err;
        if (!set_key(c, key, value, &err)) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + err);
        }
    }
    return c;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

void apply_override(RunConfig& config, const std::string& assignment) {
    const std::size_t eqpos = assignment.find('=');
    if (eqpos == std::string::npos) {
        throw ConfigError("--set expects KEY=VALUE, got '" + assignment + "'");
    }
    const std::string key = trim(assignment.substr(0, eqpos));
    const std::string value = trim(assignment.substr(eqpos + 1));
    std::string err;
    if (!set_key(config, key, value, &err)) {
        throw ConfigError("--set " + key + ": " + err);
    }
}

std::string serialize_config(const RunConfig& c) {
    std::ostringstream os;
    if (!c.builtin.empty()) os << "surface.builtin = " << c.builtin << "\n";
    if (!c.family.empty()) os << "surface.family = " << c.family << "\n";
    os << "surface.theta = " << num(c.theta) << "\n";
    os << "surface.profile = " << c.profile << "\n";
    os << "surface.profile_a = " << num(c.profile_a) << "\n";
    os << "surface.profile_b = " << num(c.profile_b) << "\n";
    os << "surface.radius = " << num(c.radius) << "\n";
    if (c.bump > 0.0) os << "surface.bump = " << num(c.bump) << "\n";
    os << "surface.alpha = " << num(c.alpha) << "\n";
    os << "surface.beta = " << num(c.beta) << "\n";
    if (grid_range_set(c.s_min, c.s_max)) {
        os << "grid.s_min = " << num(c.s_min) << "\n";
        os << "grid.s_max = " << num(c.s_max) << "\n";
    }
    if (grid_range_set(c.t_min, c.t_max)) {
        os << "grid.t_min = " << num(c.t_min) << "\n";
        os << "grid.t_max = " << num(c.t_max) << "\n";
    }
    os << "grid.ns = " << c.ns << "\n";
    os << "grid.nt = " << c.nt << "\n";
    os << "scheme.kind = " << c.scheme << "\n";
    os << "scheme.h = " << num(c.scheme_h) << "\n";
    os << "checks = " << join(c.checks, ",") << "\n";
    if (c.tol_class > 0.0) os << "tol.class = " << num(c.tol_class) << "\n";
    os << "tol.vanish = " << num(c.tol_vanish) << "\n";
    os << "tol.flat = " << num(c.tol_flat) << "\n";
    os << "tol.path = " << num(c.tol_path) << "\n";
    os << "project.mode = " << c.project_mode << "\n";
    os << "project.drop = " << c.project_drop << "\n";
    if (!c.out_path.empty()) os << "output.path = " << c.out_path << "\n";
    return os.str();
}

void validate_config(const RunConfig& c) {
    if (c.family.empty()) {
        throw ConfigError("surface.family or surface.builtin is required");
    }
    if (c.family == "css" && !(c.theta > 0.0 && c.theta < kPi / 2)) {
        throw ConfigError("surface.theta must lie strictly inside (0, pi/2)");
    }
    if ((c.family == "css" || c.family == "gcr") &&
        !(c.radius > 0.0 && c.radius <= 1.0)) {
        throw ConfigError("surface.radius must lie in (0, 1]");
    }
    const bool s_set = grid_range_set(c.s_min, c.s_max);
    const bool t_set = grid_range_set(c.t_min, c.t_max);
    if (std::isnan(c.s_min) != std::isnan(c.s_max) ||
        std::isnan(c.t_min) != std::isnan(c.t_max)) {
        throw ConfigError("grid ranges must set both ends or neither");
    }
    if (s_set && !(c.s_min < c.s_max)) {
        throw ConfigError("grid.s_min must be below grid.s_max");
    }
    if (t_set && !(c.t_min < c.t_max)) {
        throw ConfigError("grid.t_min must be below grid.t_max");
    }
    if (c.ns < 5 || c.nt < 5) {
        throw ConfigError("grid resolution must be at least 5 per axis");
    }
    if (c.checks.empty()) {
        throw ConfigError("checks must list at least one detector");
    }
    if (!(c.tol_vanish > 0.0) || !(c.tol_flat > 0.0) || !(c.tol_path > 0.0) ||
        c.tol_class < 0.0) {
        throw ConfigError("tolerances must be positive");
    }
}

DiffScheme scheme_from(const RunConfig& c) {
    if (c.scheme == "central") return DiffScheme::central(c.scheme_h);
    if (c.scheme == "richardson") return DiffScheme::richardson(c.scheme_h);
    return DiffScheme::analytic_jets();
}

DetectorOptions detector_options_from(const RunConfig& c) {
    DetectorOptions opt;
    opt.scheme = scheme_from(c);
    opt.ns = c.ns;
    opt.nt = c.nt;
    opt.class_tol = c.tol_class;
    opt.vanish_tol = c.tol_vanish;
    opt.flat_tol = c.tol_flat;
    opt.path_tol = c.tol_path;
    return opt;
}

ResolvedSurface resolve_surface(const RunConfig& c) {
    validate_config(c);
    const DiffScheme scheme = scheme_from(c);
    const bool analytic = c.scheme == "analytic";

    ResolvedSurface out;
    Domain box{};
    if (c.family == "css" || c.family == "gcr") {
        box.s0 = grid_range_set(c.s_min, c.s_max)
                     ? c.s_min
                     : (c.family == "css" ? 1.25 : 1.0);
        box.s1 = grid_range_set(c.s_min, c.s_max) ? c.s_max : 2.0;
        box.t0 = grid_range_set(c.t_min, c.t_max) ? c.t_min : 0.0;
        box.t1 = grid_range_set(c.t_min, c.t_max) ? c.t_max : 2 * kPi;
        Domain dom = box;
        if (!analytic) {
            // grow by the detector-grid guard so the requested box is
            // exactly what the shrunken detector grid covers
            const double gs0 = 2.0 * guard_width(scheme, box.s0);
            dom.s0 = std::max(box.s0 - gs0, 0.5 * box.s0);
            dom.s1 = box.s1 + 2.0 * guard_width(scheme, box.s1);
            dom.t0 = box.t0 - 2.0 * guard_width(scheme, box.t0);
            dom.t1 = box.t1 + 2.0 * guard_width(scheme, box.t1);
        }
        const SphereCurve directrix =
            circle_on_s2(kPlaneNormal, kCircleAxis, c.radius);
        const SlopeProfile prof = profile_from(c);
        out.patch = c.family == "css"
                        ? css_example(c.theta, kPlaneNormal, directrix, dom)
                        : gcr_example(prof, kPlaneNormal, directrix, dom);
        out.profile = prof;
    } else {
        if (c.family == "cylinder") {
            out.patch = offset_cylinder();
        } else if (c.family == "plane") {
            out.patch = hyperplane_patch(HyperplaneParams{c.alpha, c.beta});
        } else {
            out.patch = centered_sphere_patch();
        }
        const Domain& d = out.patch.domain;
        box.s0 = grid_range_set(c.s_min, c.s_max) ? c.s_min : d.s0;
        box.s1 = grid_range_set(c.s_min, c.s_max) ? c.s_max : d.s1;
        box.t0 = grid_range_set(c.t_min, c.t_max) ? c.t_min : d.t0;
        box.t1 = grid_range_set(c.t_min, c.t_max) ? c.t_max : d.t1;
        if (!d.contains(box.s0, box.t0) || !d.contains(box.s1, box.t1)) {
            throw ConfigError("grid range leaves the surface domain");
        }
    }
    if (c.bump > 0.0) out.patch = add_bump(out.patch, c.bump);
    if (!analytic) out.patch.jets = nullptr;
    out.box = box;
    return out;
}

int cmd_generate(const RunConfig& c, std::ostream& os) {
    const ResolvedSurface rs = resolve_surface(c);
    const std::vector<double> ss = linspace(rs.box.s0, rs.box.s1, c.ns);
    const std::vector<double> ts = linspace(rs.box.t0, rs.box.t1, c.nt);
    os << "s t x1 x2 x3 x4\n";
    for (double t : ts) {
        for (double s : ss) {
            const Vec4 x = rs.patch.map(s, t);
            os << num(s) << ' ' << num(t);
            for (int k = 0; k < 4; ++k) os << ' ' << num(x[k]);
            os << '\n';
        }
    }
    return 0;
}

SurfaceReport analyze_surface(const RunConfig& c) {
    const ResolvedSurface rs = resolve_surface(c);
    const DetectorOptions opt = detector_options_from(c);

    SurfaceReport rep;
    rep.label = rs.patch.label;
    rep.config = c;
    rep.scheme = jet_scheme_for(rs.patch, opt.scheme);
    rep.grid = detector_grid(rs.patch, opt);

    for (const std::string& name : c.checks) {
        try {
            rep.verdicts.push_back(detector_for(name)(rs.patch, opt));
        } catch (const GeometryError& e) {
            rep.errors.push_back("check " + name + ": " + e.what());
        }
    }

    rep.points.reserve(rep.grid.s.size() * rep.grid.t.size());
    for (double t : rep.grid.t) {
        for (double s : rep.grid.s) {
            PointRecord p;
            p.s = s;
            p.t = t;
            try {
                const Jet2 jet = jet2(rs.patch, s, t, rep.scheme);
                p.x = jet.x;
                const AdaptedFrame frame =
                    adapted_frame(jet, FramePolicy::coordinate_adapted);
                p.data = second_form(jet, frame);
                p.ok = true;
                try {
                    const PositionDecomposition dec = decompose(jet);
                    p.mu = dec.mu;
                    p.theta = dec.theta;
                    p.recompose = norm(dec.xT + dec.xPerp - jet.x);
                } catch (const GeometryError&) {
                }
                try {
                    p.rd = normal_connection(rs.patch, s, t,
                                             FramePolicy::coordinate_adapted,
                                             rep.scheme)
                               .RD;
                } catch (const GeometryError&) {
                }
            } catch (const GeometryError&) {
            }
            rep.points.push_back(p);
        }
    }
    return rep;
}

void write_report(const SurfaceReport& rep, std::ostream& os) {
    write_environment(rep.config, os);
    write_surface(rep.config, rep.label, os);
    write_grid(rep.grid, os);
    for (const ClassVerdict& v : rep.verdicts) write_verdict(v, os);
    write_errors(rep.errors, os);

    os << "[points]\n";
    os << "s t x1 x2 x3 x4 E F G h3_11 h3_12 h3_22 h4_11 h4_12 h4_22 "
          "H1 H2 H3 H4 K mu theta rd recompose\n";
    const double bad = std::numeric_limits<double>::quiet_NaN();
    for (const PointRecord& p : rep.points) {
        os << num(p.s) << ' ' << num(p.t);
        for (int k = 0; k < 4; ++k) os << ' ' << num(p.ok ? p.x[k] : bad);
        const double cells[] = {p.data.E,     p.data.F,     p.data.G,
                                p.data.h3_11, p.data.h3_12, p.data.h3_22,
                                p.data.h4_11, p.data.h4_12, p.data.h4_22,
                                p.data.H[0],  p.data.H[1],  p.data.H[2],
                                p.data.H[3],  p.data.K};
        for (double v : cells) os << ' ' << num(p.ok ? v : bad);
        os << ' ' << num(p.mu) << ' ' << num(p.theta) << ' ' << num(p.rd)
           << ' ' << num(p.recompose) << '\n';
    }
}

int cmd_analyze(const RunConfig& c, std::ostream& os) {
    const SurfaceReport rep = analyze_surface(c);
    write_report(rep, os);
    return rep.errors.empty() ? 0 : 3;
}

int cmd_verify(const RunConfig& c, std::ostream& os) {
    const ResolvedSurface rs = resolve_surface(c);
    if (!rs.profile) {
        throw ConfigError("verify needs a css or gcr surface");
    }
    const DetectorOptions opt = detector_options_from(c);
    const VerificationReport rep =
        verify_classification(rs.patch, *rs.profile, opt);

    write_environment(c, os);
    write_surface(c, rs.patch.label, os);

    os << "[fit]\n";
    os << "fitted = " << (rep.model_fitted ? "true" : "false") << "\n";
    os << "family = "
       << (rep.model.family == FamilyKind::constant_slope
               ? "constant_slope"
               : "generalized_constant_ratio")
       << "\n";
    os << "residual = " << num(rep.model.residual) << "\n";
    os << "residual_h3 = " << num(rep.model.residual_h3) << "\n";
    os << "residual_h4 = " << num(rep.model.residual_h4) << "\n";
    os << "residual_m = " << num(rep.model.residual_m) << "\n";
    os << "scored_cells = " << rep.model.scored_cells << "\n";
    os << "singular_cells = " << rep.model.singular_cells << "\n";
    os << "flags = "
       << (rep.model.flags.empty() ? "-" : join(rep.model.flags, ";")) << "\n";

    for (const ClassVerdict& v : rep.verdicts) write_verdict(v, os);

    os << "[rows]\n";
    os << "name value tolerance pass points note\n";
    for (const ResidualRow& r : rep.rows) {
        os << r.name << ' ' << num(r.value) << ' ' << num(r.tolerance) << ' '
           << (r.pass ? "pass" : "fail") << ' ' << r.points << ' '
           << compact_note(r.note) << '\n';
    }

    write_errors(rep.errors, os);
    os << "[summary]\n";
    os << "all_pass = " << (rep.all_pass ? "true" : "false") << "\n";
    return rep.errors.empty() ? 0 : 3;
}

int cmd_project3d(const RunConfig& c, std::ostream& os) {
    const ResolvedSurface rs = resolve_surface(c);
    const std::vector<double> ss = linspace(rs.box.s0, rs.box.s1, c.ns);
    const std::vector<double> ts = linspace(rs.box.t0, rs.box.t1, c.nt);
    const int drop = c.project_drop - 1;
    const bool stereo = c.project_mode == "stereographic";

    std::vector<std::array<double, 3>> verts;
    verts.reserve(ss.size() * ts.size());
    for (double t : ts) {
        for (double s : ss) {
            const Vec4 x = rs.patch.map(s, t);
            std::array<double, 3> v{};
            if (stereo) {
                const double n = norm(x);
                if (n < 1e-12) {
                    throw DegenerateProjection(
                        "stereographic projection undefined at the origin");
                }
                const double denom = 1.0 - x[drop] / n;
                if (std::abs(denom) < 1e-9) {
                    throw DegenerateProjection(
                        "patch touches the stereographic pole");
                }
                int k = 0;
                for (int a = 0; a < 4; ++a) {
                    if (a != drop) v[static_cast<std::size_t>(k++)] = x[a] / denom;
                }
            } else {
                int k = 0;
                for (int a = 0; a < 4; ++a) {
                    if (a != drop) v[static_cast<std::size_t>(k++)] = x[a];
                }
            }
            verts.push_back(v);
        }
    }

    // quad split: (i,j)-(i+1,j)-(i+1,j+1) and (i,j)-(i+1,j+1)-(i,j+1)
    const int ns = c.ns, nt = c.nt;
    const auto vid = [ns](int i, int j) { return j * ns + i; };
    std::vector<std::array<int, 3>> faces;
    faces.reserve(static_cast<std::size_t>(2 * (ns - 1) * (nt - 1)));
    for (int j = 0; j + 1 < nt; ++j) {
        for (int i = 0; i + 1 < ns; ++i) {
            faces.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
            faces.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
        }
    }

    double max_area2 = 0.0;
    double scale = 0.0;
    for (const auto& v : verts) {
        for (double comp : v) scale = std::max(scale, std::abs(comp));
    }
    for (const auto& f : faces) {
        const auto& a = verts[static_cast<std::size_t>(f[0])];
        const auto& b = verts[static_cast<std::size_t>(f[1])];
        const auto& d = verts[static_cast<std::size_t>(f[2])];
        const double u1 = b[0] - a[0], u2 = b[1] - a[1], u3 = b[2] - a[2];
        const double w1 = d[0] - a[0], w2 = d[1] - a[1], w3 = d[2] - a[2];
        const double c1 = u2 * w3 - u3 * w2;
        const double c2 = u3 * w1 - u1 * w3;
        const double c3 = u1 * w2 - u2 * w1;
        max_area2 = std::max(max_area2, std::sqrt(c1 * c1 + c2 * c2 + c3 * c3));
    }
    if (max_area2 <= 1e-12 * std::max(1.0, scale * scale)) {
        throw DegenerateProjection(
            "all projected triangles collapse; pick another projection");
    }

    for (const auto& v : verts) {
        os << "v " << num(v[0]) << ' ' << num(v[1]) << ' ' << num(v[2]) << '\n';
    }
    for (const auto& f : faces) {
        os << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
    }
    return 0;
}

int run_command(const std::string& verb, const RunConfig& c,
                std::ostream& console, bool quiet) {
    int (*fn)(const RunConfig&, std::ostream&) = nullptr;
    if (verb == "generate") fn = &cmd_generate;
    else if (verb == "analyze") fn = &cmd_analyze;
    else if (verb == "verify") fn = &cmd_verify;
    else if (verb == "project3d") fn = &cmd_project3d;
    else throw ConfigError("unknown command '" + verb + "'");

    if (c.out_path.empty()) return fn(c, console);

    std::ofstream out(c.out_path);
    if (!out) throw IoError("cannot open output file '" + c.out_path + "'");
    const int code = fn(c, out);
    out.flush();
    if (!out) throw IoError("failed writing '" + c.out_path + "'");
    if (!quiet) console << "wrote " << c.out_path << "\n";
    return code;
}

}  // namespace surf4
