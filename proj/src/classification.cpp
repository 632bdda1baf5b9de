#include "surf4/classification.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "surf4/errors.hpp"
#include "surf4/surface_core.hpp"

namespace surf4 {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSecantGuard = 0.05;  // closed-form comparison cells
constexpr double kWideGuard = 0.25;    // cells feeding third-order differencing
constexpr double kSigmaGuard = 0.45;   // integration range of the sigma row
constexpr double kCosFloor = 1e-8;

struct Stats {
    double mean = 0.0;
    double sd = 0.0;
};

Stats stats_of(const std::vector<double>& v) {
    Stats st;
    if (v.empty()) return st;
    st.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double acc = 0.0;
    for (double x : v) acc += (x - st.mean) * (x - st.mean);
    st.sd = std::sqrt(acc / static_cast<double>(v.size()));
    return st;
}

std::string count_note(const char* key, std::size_t n) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s=%zu", key, n);
    return buf;
}

void append_note(std::string& note, const std::string& piece) {
    if (piece.empty()) return;
    if (!note.empty()) note += "; ";
    note += piece;
}

double fit_threshold(const DiffScheme& eff) {
    return eff.kind == DiffScheme::Kind::analytic ? 1e-5 : 1e-3;
}

// One measured lattice point of the curvature rows in the position frame.
struct FitPoint {
    double s = 0.0, t = 0.0;
    bool ok = false;
    double mu = 0.0, theta = 0.0;
    double h3_22 = 0.0, h4_22 = 0.0, m = 0.0;
    Vec4 e4;
};

std::vector<FitPoint> measure_lattice(const ImmersionPatch& patch,
                                      const DetectorGrid& grid,
                                      const DiffScheme& eff) {
    std::vector<FitPoint> pts;
    pts.reserve(grid.s.size() * grid.t.size());
    for (double t : grid.t) {
        for (double s : grid.s) {
            FitPoint p;
            p.s = s;
            p.t = t;
            try {
                const Jet2 jet = jet2(patch, s, t, eff);
                const PositionDecomposition dec = decompose(jet);
                const AdaptedFrame fr =
                    adapted_frame(jet, FramePolicy::position_adapted);
                const FundamentalData fd = second_form(jet, fr);
                p.mu = dec.mu;
                p.theta = dec.theta;
                p.h3_22 = fd.h3_22;
                p.h4_22 = fd.h4_22;
                p.m = fd.m;
                p.e4 = fr.e4;
                p.ok = true;
            } catch (const OriginPoint&) {
                throw DegenerateGrid("fit grid touches the origin");
            } catch (const GeometryError&) {
                p.ok = false;
            }
            pts.push_back(p);
        }
    }
    return pts;
}

// Sign chain making the e4 gauge continuous along one s-line.  Returns false
// when a neighbour pair is too far from (anti)parallel to align.
bool align_e4_line(const FitPoint* line, std::size_t ns, std::vector<double>& sign) {
    sign.assign(ns, 1.0);
    bool ok = true;
    const FitPoint* prev = nullptr;
    double prev_sign = 1.0;
    for (std::size_t i = 0; i < ns; ++i) {
        if (!line[i].ok) continue;
        if (prev) {
            const double c = dot(prev->e4, line[i].e4);
            if (std::abs(c) < 0.5) ok = false;
            prev_sign = c < 0.0 ? -prev_sign : prev_sign;
        } else {
            prev_sign = 1.0;
        }
        sign[i] = prev_sign;
        prev = &line[i];
    }
    return ok;
}

}  // namespace

// ---------------------------------------------------------------------------
// Radial curvature ODEs.
// ---------------------------------------------------------------------------

double sigma_rhs_css(double s, double sigma, double theta) {
    const double c = std::cos(theta);
    if (std::abs(c) < kCosFloor) throw CosThetaVanishes();
    const double sn = std::sin(theta);
    return -sn * (1.0 + 2.0 * sigma * sn + sigma * sigma) / (s * c * c);
}

double sigma_rhs_gcr(double s, double sigma, const SlopeProfile& profile) {
    const double th = profile.theta(s);
    const double c = std::cos(th);
    if (std::abs(c) < kCosFloor) throw CosThetaVanishes();
    return -std::sin(th) * (1.0 + sigma * sigma) / (s * c);
}

OdeResult integrate_sigma(const std::function<double(double, double)>& rhs,
                          double s0, double s1, double sigma0, double step,
                          double local_error_limit) {
    if (!(step > 0.0)) throw ConfigError("integration step must be positive");
    if (!(s0 > 0.0) || !(s1 > 0.0)) {
        throw ConfigError("radial integration range must stay positive");
    }
    const auto rk4 = [&rhs](double s, double y, double h) {
        const double k1 = rhs(s, y);
        const double k2 = rhs(s + 0.5 * h, y + 0.5 * h * k1);
        const double k3 = rhs(s + 0.5 * h, y + 0.5 * h * k2);
        const double k4 = rhs(s + h, y + h * k3);
        return y + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
    };

    OdeResult out;
    const double span = s1 - s0;
    const int n = std::max(1, static_cast<int>(std::llround(std::abs(span) / step)));
    const double h = span / n;
    out.s.reserve(static_cast<std::size_t>(n) + 1);
    out.sigma.reserve(static_cast<std::size_t>(n) + 1);
    out.s.push_back(s0);
    out.sigma.push_back(sigma0);
    double s = s0;
    double y = sigma0;
    for (int i = 0; i < n; ++i) {
        const double y_full = rk4(s, y, h);
        const double y_mid = rk4(s, y, 0.5 * h);
        const double y_half = rk4(s + 0.5 * h, y_mid, 0.5 * h);
        const double est = std::abs(y_half - y_full) / 15.0;
        out.max_local_error = std::max(out.max_local_error, est);
        if (est > local_error_limit) {
            char buf[96];
            std::snprintf(buf, sizeof(buf),
                          "local error estimate %.3e at s=%.6g exceeds %.1e", est,
                          s, local_error_limit);
            throw StepSizeTooLarge(buf);
        }
        s = s0 + span * (i + 1) / n;
        y = y_half;
        out.s.push_back(s);
        out.sigma.push_back(y);
    }
    return out;
}

OdeResult integrate_sigma_css(double theta, double s0, double s1, double sigma0,
                              double step, double local_error_limit) {
    return integrate_sigma(
        [theta](double s, double y) { return sigma_rhs_css(s, y, theta); }, s0, s1,
        sigma0, step, local_error_limit);
}

OdeResult integrate_sigma_gcr(const SlopeProfile& profile, double s0, double s1,
                              double sigma0, double step,
                              double local_error_limit) {
    return integrate_sigma(
        [&profile](double s, double y) { return sigma_rhs_gcr(s, y, profile); },
        s0, s1, sigma0, step, local_error_limit);
}

double closed_form_sigma_css(double s, double theta, double Phi) {
    const double u = std::tan(theta) * std::log(s);
    return std::cos(theta) * std::tan(Phi - u) - std::sin(theta);
}

double closed_form_sigma_gcr(double s, const SlopeProfile& profile, double Phi) {
    return std::tan(Phi - profile.u(s));
}

// ---------------------------------------------------------------------------
// Closed-form model.
// ---------------------------------------------------------------------------

ClosedFormRow closed_form_h22(const ClosedFormModel& model, std::size_t line,
                              double s) {
    if (line >= model.t.size() || line >= model.Phi.size()) {
        throw ConfigError("closed_form_h22: line index out of range");
    }
    if (!model.line_ok.empty() && !model.line_ok[line]) {
        throw UnfitModel("closed_form_h22: line was not fitted");
    }
    const double arg = model.Phi[line] - model.profile.u(s);
    const double c = std::cos(arg);
    if (std::abs(c) < kSecantGuard) throw NearSingularClosedForm();
    const double th = model.profile.theta(s);
    ClosedFormRow row;
    row.h22_3 = (std::cos(th) * std::tan(arg) - std::sin(th)) / s;
    row.h22_4 = model.rho_h[line] / (s * c);
    row.m = s * c * model.rho[line];
    return row;
}

ClosedFormModel fit_model_lenient(const ImmersionPatch& patch,
                                  const DetectorGrid& grid,
                                  const SlopeProfile& profile,
                                  const DetectorOptions& options) {
    const DiffScheme eff = jet_scheme_for(patch, options.scheme);
    const std::size_t ns = grid.s.size();
    const std::size_t nt = grid.t.size();
    if (ns < 3 || nt < 1) throw DegenerateGrid("fit grid is too small");

    ClosedFormModel model;
    model.family = profile.kind == SlopeProfile::Kind::constant_theta
                       ? FamilyKind::constant_slope
                       : FamilyKind::generalized_constant_ratio;
    model.profile = profile;
    model.t = grid.t;
    model.s_ref = grid.s[ns / 2];
    model.Phi.assign(nt, 0.0);
    model.rho.assign(nt, 0.0);
    model.rho_h.assign(nt, 0.0);
    model.line_ok.assign(nt, 0);

    const std::vector<FitPoint> pts = measure_lattice(patch, grid, eff);

    std::size_t bad_lines = 0;
    std::size_t flip_lines = 0;
    double r3 = 0.0, r4 = 0.0, rm = 0.0;
    std::vector<double> sign;
    for (std::size_t j = 0; j < nt; ++j) {
        const FitPoint* line = &pts[j * ns];
        const bool gauge_ok = align_e4_line(line, ns, sign);
        if (!gauge_ok) ++flip_lines;

        // Reference radius: middle of the line, scanning outward until the
        // sample is usable and its secant stays off the guard.
        bool found = false;
        const long mid = static_cast<long>(ns) / 2;
        for (long off = 0; off < static_cast<long>(ns) && !found; ++off) {
            for (int dir : {+1, -1}) {
                if (off == 0 && dir < 0) continue;
                const long i = mid + dir * off;
                if (i < 0 || i >= static_cast<long>(ns)) continue;
                const FitPoint& p = line[i];
                if (!p.ok) continue;
                const double cth = std::cos(p.theta);
                if (cth < 1e-6) continue;  // angle too steep to invert
                const double sigma_ref = p.mu * p.h3_22;
                const double arg = std::atan2(sigma_ref + std::sin(p.theta), cth);
                const double cpu = std::cos(arg);
                if (std::abs(cpu) < kSecantGuard) continue;
                model.Phi[j] = profile.u(p.mu) + arg;
                model.rho[j] = p.m / (p.mu * cpu);
                model.rho_h[j] = p.mu * (sign[static_cast<std::size_t>(i)] * p.h4_22) * cpu;
                model.line_ok[j] = 1;
                found = true;
                break;
            }
        }
        if (!found) {
            ++bad_lines;
            continue;
        }

        for (std::size_t i = 0; i < ns; ++i) {
            const FitPoint& p = line[i];
            if (!p.ok) continue;
            const double arg = model.Phi[j] - profile.u(p.mu);
            const double c = std::cos(arg);
            if (std::abs(c) < kSecantGuard) {
                ++model.singular_cells;
                continue;
            }
            const double th = profile.theta(p.mu);
            const double cf3 = (std::cos(th) * std::tan(arg) - std::sin(th)) / p.mu;
            const double cfm = p.mu * c * model.rho[j];
            r3 = std::max(r3, std::abs(p.h3_22 - cf3));
            // p.m is a length, so compare against the unsigned prediction.
            rm = std::max(rm, std::abs(p.m - std::abs(cfm)));
            if (gauge_ok) {
                const double cf4 = model.rho_h[j] / (p.mu * c);
                r4 = std::max(r4, std::abs(sign[i] * p.h4_22 - cf4));
            }
            ++model.scored_cells;
        }
    }

    model.residual_h3 = r3;
    model.residual_h4 = r4;
    model.residual_m = rm;
    model.residual = std::max({r3, r4, rm});
    if (bad_lines > 0) {
        model.residual = std::numeric_limits<double>::infinity();
        model.flags.push_back(count_note("unfittable-lines", bad_lines));
    }
    if (flip_lines > 0) model.flags.push_back(count_note("gauge-flip-lines", flip_lines));
    if (model.singular_cells > 0) {
        model.flags.push_back(count_note("singular-cells", model.singular_cells));
    }
    model.fit_ok = bad_lines == 0 && model.scored_cells > 0 &&
                   model.residual <= fit_threshold(eff);
    return model;
}

ClosedFormModel fit_model(const ImmersionPatch& patch, const DetectorGrid& grid,
                          const SlopeProfile& profile,
                          const DetectorOptions& options) {
    ClosedFormModel model = fit_model_lenient(patch, grid, profile, options);
    if (!model.fit_ok) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "fit residual %.3e exceeds %.1e",
                      model.residual,
                      fit_threshold(jet_scheme_for(patch, options.scheme)));
        throw UnfitModel(buf);
    }
    return model;
}

// ---------------------------------------------------------------------------
// Position equation residuals.
// ---------------------------------------------------------------------------

double position_ode_residual_css(const ImmersionPatch& patch, double s, double t,
                                 const DiffScheme& scheme) {
    const DiffScheme eff = jet_scheme_for(patch, scheme);
    const Jet2 jet = jet2(patch, s, t, eff, JetChecks::none);
    const PositionDecomposition dec = decompose(jet);
    const double c2 = std::cos(dec.theta) * std::cos(dec.theta);
    return norm((s * s * c2) * jet.x_ss - (s * c2) * jet.x_s + jet.x);
}

double position_pde_residual_gcr(const ImmersionPatch& patch, double s, double t,
                                 const SlopeProfile& profile,
                                 const DiffScheme& scheme) {
    const DiffScheme eff = jet_scheme_for(patch, scheme);
    const Jet2 jet = jet2(patch, s, t, eff, JetChecks::none);
    const double th = profile.theta(s);
    const double dth = profile.dtheta(s);
    const double c = std::cos(th);
    const double sn = std::sin(th);
    return norm((s * s * c * c * sn) * jet.x_ss -
                (s * s * c * dth + s * c * c * sn) * jet.x_s +
                (sn + s * c * dth) * jet.x);
}

double psi_reduction_residual(const ImmersionPatch& patch,
                              const SlopeProfile& profile, double t,
                              double s_min, double s_max, double delta) {
    if (!(s_min > 0.0) || !(s_max > s_min)) {
        throw ConfigError("psi check needs 0 < s_min < s_max");
    }
    const double u_lo = profile.u(s_min);
    const double u_hi = profile.u(s_max);
    if (!(u_hi > u_lo)) {
        throw SingularProfile("psi check needs a strictly increasing slope");
    }
    if (u_hi - u_lo <= 2.0 * delta) {
        throw ConfigError("slope range too narrow for the requested delta");
    }

    const auto s_of_u = [&](double u) {
        double lo = s_min, hi = s_max;
        while (hi - lo > 1e-15 * (1.0 + hi)) {
            const double mid = 0.5 * (lo + hi);
            (profile.u(mid) < u ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };
    const auto psi = [&](double u) {
        const double s = s_of_u(u);
        return patch.map(s, t) / s;
    };

    const int targets = 25;
    const double a = u_lo + delta;
    const double b = u_hi - delta;
    double worst = 0.0;
    for (int k = 0; k < targets; ++k) {
        const double u = a + (b - a) * k / (targets - 1);
        const Vec4 p0 = psi(u - delta);
        const Vec4 p1 = psi(u);
        const Vec4 p2 = psi(u + delta);
        worst = std::max(worst, norm((p0 - 2.0 * p1 + p2) / (delta * delta) + p1));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Aggregated verification.
// ---------------------------------------------------------------------------

namespace {

struct VPoint {
    double s = 0.0, t = 0.0;
    bool jet_ok = false;
    Jet2 jet;
    bool dec_ok = false;
    PositionDecomposition dec;
    bool pframe_ok = false;
    AdaptedFrame pfr;
    FundamentalData pfd;
    bool cframe_ok = false;
    FundamentalData cfd;
};

VerificationReport verify_impl(const ImmersionPatch& patch,
                               const SlopeProfile* profile,
                               const DetectorOptions& options) {
    VerificationReport rep;
    const DiffScheme eff = jet_scheme_for(patch, options.scheme);
    const bool analytic = eff.kind == DiffScheme::Kind::analytic;
    const DetectorGrid grid = detector_grid(patch, options);
    const std::size_t ns = grid.s.size();
    const std::size_t nt = grid.t.size();

    using DetectorFn = ClassVerdict (*)(const ImmersionPatch&, const DetectorOptions&);
    const std::array<std::pair<const char*, DetectorFn>, 5> detectors{{
        {"CR", &is_constant_ratio},
        {"T_constant", &is_T_constant},
        {"N_constant", &is_N_constant},
        {"GCR", &is_GCR},
        {"CSS", &is_CSS},
    }};
    for (const auto& [name, fn] : detectors) {
        try {
            rep.verdicts.push_back(fn(patch, options));
        } catch (const GeometryError& e) {
            rep.errors.push_back(std::string(name) + ": " + e.what());
        }
    }

    std::vector<VPoint> pts;
    pts.reserve(ns * nt);
    for (std::size_t j = 0; j < nt; ++j) {
        for (std::size_t i = 0; i < ns; ++i) {
            VPoint p;
            p.s = grid.s[i];
            p.t = grid.t[j];
            try {
                p.jet = jet2(patch, p.s, p.t, eff);
                p.jet_ok = true;
            } catch (const GeometryError&) {
            }
            if (p.jet_ok) {
                try {
                    p.dec = decompose(p.jet);
                    p.dec_ok = true;
                } catch (const GeometryError&) {
                }
                try {
                    p.pfr = adapted_frame(p.jet, FramePolicy::position_adapted);
                    p.pfd = second_form(p.jet, p.pfr);
                    p.pframe_ok = true;
                } catch (const GeometryError&) {
                }
                try {
                    const AdaptedFrame cf =
                        adapted_frame(p.jet, FramePolicy::coordinate_adapted);
                    p.cfd = second_form(p.jet, cf);
                    p.cframe_ok = true;
                } catch (const GeometryError&) {
                }
            }
            pts.push_back(p);
        }
    }

    if (profile) {
        rep.model = fit_model_lenient(patch, grid, *profile, options);
        rep.model_fitted = rep.model.fit_ok;
    }
    const bool have_lines =
        profile && std::any_of(rep.model.line_ok.begin(), rep.model.line_ok.end(),
                               [](char ok) { return ok != 0; });

    // Cells too close to a secant pole amplify third-order differencing; they
    // are skipped by the wider guard whenever the model knows where they are.
    const auto wide_ok = [&](const VPoint& p, std::size_t j) {
        if (!have_lines || !rep.model.line_ok[j]) return true;
        const double radius = p.dec_ok ? p.dec.mu : p.s;
        const double arg = rep.model.Phi[j] - profile->u(radius);
        return std::abs(std::cos(arg)) >= kWideGuard;
    };

    const auto add_row = [&rep](std::string name, double value, double tol,
                                std::size_t n, std::string note = "") {
        ResidualRow r;
        r.name = std::move(name);
        r.value = value;
        r.tolerance = tol;
        r.points = n;
        r.pass = n > 0 && value < tol;
        if (n == 0) append_note(note, "no-valid-points");
        r.note = std::move(note);
        rep.rows.push_back(r);
    };

    {  // The two decomposition parts must recompose the position vector.
        double worst = 0.0;
        std::size_t n = 0;
        for (const VPoint& p : pts) {
            if (!p.dec_ok) continue;
            worst = std::max(worst,
                             norm(p.dec.xT + p.dec.xPerp - p.jet.x) / (1.0 + p.dec.mu));
            ++n;
        }
        add_row("recompose_xT_xPerp", worst, 1e-10, n);
    }

    {  // mu - s must be constant along every t-line (radial normalization).
        double worst = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < ns; ++i) {
            std::vector<double> vals;
            for (std::size_t j = 0; j < nt; ++j) {
                const VPoint& p = pts[j * ns + i];
                if (p.dec_ok) vals.push_back(p.dec.mu - p.s);
            }
            if (vals.size() < 2) continue;
            const Stats st = stats_of(vals);
            worst = std::max(worst, st.sd / (1.0 + std::abs(st.mean)));
            n += vals.size();
        }
        add_row("mu_t_constancy", worst, 1e-9, n);
    }

    {  // h(e1,e1) along the canonical normal equals -(e1(theta)+sin(theta)/mu).
        const ScalarField theta_field = [&](double ss, double tt) {
            return decompose(jet2(patch, ss, tt, eff)).theta;
        };
        double worst = 0.0;
        std::size_t n = 0, excl = 0;
        for (const VPoint& p : pts) {
            if (!p.pframe_ok || !p.dec_ok) continue;
            try {
                const double ths = field_d1(theta_field, p.s, p.t, 0, eff);
                const double tht = field_d1(theta_field, p.s, p.t, 1, eff);
                const auto [a, b] = tangent_coords(p.jet, p.pfr.e1);
                const double e1th = a * ths + b * tht;
                worst = std::max(
                    worst,
                    std::abs(p.pfd.h3_11 + e1th + std::sin(p.dec.theta) / p.dec.mu));
                ++n;
            } catch (const GeometryError&) {
                ++excl;
            }
        }
        add_row("h11_lemma", worst, analytic ? 1e-6 : 1e-3, n,
                excl > 0 ? count_note("excluded", excl) : "");
    }

    {  // Normal curvature from the shape-operator commutator.
        double worst = 0.0;
        std::size_t n = 0;
        for (const VPoint& p : pts) {
            if (!p.cframe_ok) continue;
            worst = std::max(worst, std::abs(commutator_21(p.cfd.S3, p.cfd.S4)));
            ++n;
        }
        add_row("normal_curvature_flat", worst, analytic ? 1e-6 : 1e-3, n);
    }

    {  // Codazzi residual, one fixed extrapolated scheme.
        const DiffScheme cod = DiffScheme::richardson(1e-3);
        double worst = 0.0;
        std::size_t n = 0, excl = 0, guarded = 0;
        for (std::size_t j = 0; j < nt; ++j) {
            for (std::size_t i = 0; i < ns; ++i) {
                const VPoint& p = pts[j * ns + i];
                if (!p.jet_ok) continue;
                if (!wide_ok(p, j)) {
                    ++guarded;
                    continue;
                }
                try {
                    worst = std::max(worst, codazzi_residual(patch, p.s, p.t, cod));
                    ++n;
                } catch (const GeometryError&) {
                    ++excl;
                }
            }
        }
        std::string note;
        if (excl > 0) append_note(note, count_note("excluded", excl));
        if (guarded > 0) append_note(note, count_note("guarded", guarded));
        add_row("codazzi", worst, analytic ? 1e-4 : 1e-3, n, note);
    }

    {  // Gauss curvature: structural value against the metric-only value.
        double worst = 0.0;
        std::size_t n = 0, excl = 0, guarded = 0;
        for (std::size_t j = 0; j < nt; ++j) {
            for (std::size_t i = 0; i < ns; ++i) {
                const VPoint& p = pts[j * ns + i];
                if (!p.cframe_ok) continue;
                if (!wide_ok(p, j)) {
                    ++guarded;
                    continue;
                }
                try {
                    const double ki =
                        intrinsic_gauss_curvature(patch, p.s, p.t, eff);
                    worst = std::max(worst, std::abs(p.cfd.K - ki));
                    ++n;
                } catch (const GeometryError&) {
                    ++excl;
                }
            }
        }
        std::string note;
        if (excl > 0) append_note(note, count_note("excluded", excl));
        if (guarded > 0) append_note(note, count_note("guarded", guarded));
        add_row("gauss_K_consistency", worst, analytic ? 1e-3 : 1e-2, n, note);
    }

    if (profile) {
        {  // Decomposed angle against the profile angle.
            double worst = 0.0;
            std::size_t n = 0;
            for (const VPoint& p : pts) {
                if (!p.dec_ok) continue;
                worst = std::max(worst, std::abs(p.dec.theta - profile->theta(p.s)));
                ++n;
            }
            add_row("theta_vs_profile", worst, analytic ? 1e-6 : 1e-3, n);
        }

        {  // Vanishing curvature entries in the position frame.
            double worst11 = 0.0, worst12 = 0.0;
            std::size_t n = 0;
            for (const VPoint& p : pts) {
                if (!p.pframe_ok) continue;
                worst11 = std::max(worst11, std::abs(p.pfd.h4_11));
                worst12 = std::max(
                    worst12, std::max(std::abs(p.pfd.h3_12), std::abs(p.pfd.h4_12)));
                ++n;
            }
            add_row("h4_11_zero", worst11, analytic ? 1e-6 : 1e-3, n);
            add_row("h12_zero", worst12, analytic ? 1e-6 : 1e-3, n);
        }

        {  // The canonical normal must be parallel in the normal bundle.
            double worst = 0.0;
            std::size_t n = 0, excl = 0;
            for (const VPoint& p : pts) {
                if (!p.pframe_ok) continue;
                try {
                    const ConnectionData cd = normal_connection(
                        patch, p.s, p.t, FramePolicy::position_adapted, eff);
                    worst = std::max(
                        worst, std::hypot(cd.omega1, cd.omega2));
                    ++n;
                } catch (const GeometryError&) {
                    ++excl;
                }
            }
            add_row("de3_parallel", worst, analytic ? 1e-5 : 1e-3, n,
                    excl > 0 ? count_note("excluded", excl) : "");
        }

        const bool css = profile->kind == SlopeProfile::Kind::constant_theta;
        if (css) {  // Radial position equation at constant angle.
            double worst = 0.0;
            std::size_t n = 0, excl = 0;
            for (const VPoint& p : pts) {
                try {
                    worst = std::max(
                        worst, position_ode_residual_css(patch, p.s, p.t,
                                                         options.scheme));
                    ++n;
                } catch (const GeometryError&) {
                    ++excl;
                }
            }
            add_row("position_ode", worst, analytic ? 1e-6 : 1e-3, n,
                    excl > 0 ? count_note("excluded", excl) : "");
        }

        {  // Variable-angle position equation (reduces to the radial one).
            double worst = 0.0;
            std::size_t n = 0, excl = 0;
            for (const VPoint& p : pts) {
                try {
                    worst = std::max(worst,
                                     position_pde_residual_gcr(
                                         patch, p.s, p.t, *profile, options.scheme));
                    ++n;
                } catch (const GeometryError&) {
                    ++excl;
                }
            }
            add_row("position_pde", worst, analytic ? 1e-6 : 1e-3, n,
                    excl > 0 ? count_note("excluded", excl) : "");
        }

        {  // Normalized position against the slope reparametrization.
            double worst = 0.0;
            std::size_t n = 0;
            std::string note;
            const std::array<std::size_t, 5> lines{0, nt / 4, nt / 2, (3 * nt) / 4,
                                                   nt - 1};
            for (std::size_t j : lines) {
                try {
                    worst = std::max(
                        worst, psi_reduction_residual(patch, *profile, grid.t[j],
                                                      grid.s.front(), grid.s.back()));
                    ++n;
                } catch (const std::exception& e) {
                    append_note(note, e.what());
                }
            }
            add_row("psi_uu_reduction", worst, 1e-5, n, note);
        }

        {  // Integrated sigma against the fitted closed form, per line.
            double worst = 0.0;
            std::size_t n = 0, skipped = 0;
            for (std::size_t j = 0; j < nt; ++j) {
                if (!have_lines || !rep.model.line_ok[j]) {
                    ++skipped;
                    continue;
                }
                // Longest run of nodes clear of the secant pole.
                std::size_t best_a = 0, best_b = 0;
                std::size_t run_a = 0;
                bool in_run = false;
                for (std::size_t i = 0; i <= ns; ++i) {
                    const bool ok =
                        i < ns &&
                        std::abs(std::cos(rep.model.Phi[j] - profile->u(grid.s[i]))) >=
                            kSigmaGuard;
                    if (ok && !in_run) {
                        run_a = i;
                        in_run = true;
                    } else if (!ok && in_run) {
                        if (i - run_a > best_b - best_a) {
                            best_a = run_a;
                            best_b = i;
                        }
                        in_run = false;
                    }
                }
                if (best_b - best_a < 4) {
                    ++skipped;
                    continue;
                }
                const double sa = grid.s[best_a];
                const double sb = grid.s[best_b - 1];
                const double theta0 = profile->theta(sa);
                const auto cf = [&](double s) {
                    return rep.model.family == FamilyKind::constant_slope
                               ? closed_form_sigma_css(s, theta0, rep.model.Phi[j])
                               : closed_form_sigma_gcr(s, *profile,
                                                       rep.model.Phi[j]);
                };
                try {
                    const OdeResult ode =
                        rep.model.family == FamilyKind::constant_slope
                            ? integrate_sigma_css(theta0, sa, sb, cf(sa),
                                                  (sb - sa) / 2048.0)
                            : integrate_sigma_gcr(*profile, sa, sb, cf(sa),
                                                  (sb - sa) / 2048.0);
                    double dev = 0.0;
                    for (std::size_t k = 0; k < ode.s.size(); k += 64) {
                        dev = std::max(dev, std::abs(ode.sigma[k] - cf(ode.s[k])));
                    }
                    dev = std::max(dev,
                                   std::abs(ode.sigma.back() - cf(ode.s.back())));
                    worst = std::max(worst, dev);
                    ++n;
                } catch (const GeometryError&) {
                    ++skipped;
                }
            }
            add_row("sigma_ode_vs_closed_form", worst, 1e-8, n,
                    skipped > 0 ? count_note("skipped-lines", skipped) : "");
        }

        {  // Closed-form rows scored by the fit.
            const double tol = analytic ? 1e-5 : 1e-3;
            const std::size_t n = rep.model.scored_cells;
            std::string flags;
            for (const std::string& f : rep.model.flags) append_note(flags, f);
            add_row("closed_form_h22_3", rep.model.residual_h3, tol, n, flags);
            add_row("closed_form_h22_4", rep.model.residual_h4, tol, n, flags);
            add_row("closed_form_m", rep.model.residual_m, tol, n, flags);
        }

        {  // |m * h22^4| must not depend on the radius on any line; the
            // absolute value removes the orientation freedom of the frame.
            double worst = 0.0;
            std::size_t n = 0;
            for (std::size_t j = 0; j < nt; ++j) {
                std::vector<double> prod;
                for (std::size_t i = 0; i < ns; ++i) {
                    const VPoint& p = pts[j * ns + i];
                    if (p.pframe_ok) prod.push_back(std::abs(p.pfd.m * p.pfd.h4_22));
                }
                if (prod.size() < 2) continue;
                const Stats st = stats_of(prod);
                worst = std::max(worst, st.sd / (1.0 + std::abs(st.mean)));
                n += prod.size();
            }
            add_row("cross_term_s_constancy", worst, analytic ? 1e-10 : 1e-3, n, "");
        }

        {  // Second t-difference of the fitted phase stays bounded.
            std::vector<double> phi;
            phi.reserve(nt);
            bool contiguous = true;
            for (std::size_t j = 0; j < nt; ++j) {
                if (!have_lines || !rep.model.line_ok[j]) {
                    contiguous = false;
                    continue;
                }
                double v = rep.model.Phi[j];
                if (!phi.empty()) {
                    while (v - phi.back() > kPi / 2) v -= kPi;
                    while (v - phi.back() < -kPi / 2) v += kPi;
                }
                phi.push_back(v);
            }
            double worst = 0.0;
            std::size_t n = 0;
            if (contiguous && phi.size() >= 3 && nt >= 2) {
                const double dt = grid.t[1] - grid.t[0];
                for (std::size_t j = 1; j + 1 < phi.size(); ++j) {
                    worst = std::max(
                        worst,
                        std::abs(phi[j + 1] - 2.0 * phi[j] + phi[j - 1]) / (dt * dt));
                    ++n;
                }
            }
            add_row("phi_t_smoothness", worst, 100.0, n,
                    contiguous ? "" : "lines-missing");
        }
    }

    rep.all_pass = rep.errors.empty() &&
                   std::all_of(rep.rows.begin(), rep.rows.end(),
                               [](const ResidualRow& r) { return r.pass; });
    return rep;
}

}  // namespace

VerificationReport verify_classification(const ImmersionPatch& patch,
                                         const DetectorOptions& options) {
    return verify_impl(patch, nullptr, options);
}

VerificationReport verify_classification(const ImmersionPatch& patch,
                                         const SlopeProfile& profile,
                                         const DetectorOptions& options) {
    return verify_impl(patch, &profile, options);
}

}  // namespace surf4
