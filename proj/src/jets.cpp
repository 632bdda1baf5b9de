#include "surf4/jets.hpp"

#include <algorithm>
#include <cmath>

namespace surf4 {

namespace {

double slack(double lo, double hi) {
    return 1e-9 * std::max({1.0, std::abs(lo), std::abs(hi)});
}

}  // namespace

bool Domain::contains(double s, double t) const {
    const double es = slack(s0, s1);
    const double et = slack(t0, t1);
    return s >= s0 - es && s <= s1 + es && t >= t0 - et && t <= t1 + et;
}

double default_step(double coord) {
    return 1e-4 * std::max(1.0, std::abs(coord));
}

double DiffScheme::step(double coord) const {
    return h > 0.0 ? h : default_step(coord);
}

double guard_width(const DiffScheme& scheme, double coord) {
    if (scheme.kind == DiffScheme::Kind::analytic) return default_step(coord);
    return scheme.step(coord);
}

Jet2 ImmersionPatch::analytic_jet(double s, double t) const {
    if (!jets) throw AnalyticJetsUnavailable(label + ": no analytic jet callbacks");
    return jets(s, t);
}

namespace {

// Plain central-difference jet with steps (hs, ht); x is filled by the caller.
Jet2 central_jet(const MapFn& f, double s, double t, double hs, double ht) {
    Jet2 j;
    const Vec4 c = f(s, t);
    const Vec4 pe = f(s + hs, t);
    const Vec4 pw = f(s - hs, t);
    const Vec4 pn = f(s, t + ht);
    const Vec4 ps = f(s, t - ht);
    j.x = c;
    j.x_s = (pe - pw) / (2.0 * hs);
    j.x_t = (pn - ps) / (2.0 * ht);
    j.x_ss = (pe - 2.0 * c + pw) / (hs * hs);
    j.x_tt = (pn - 2.0 * c + ps) / (ht * ht);
    j.x_st = (f(s + hs, t + ht) - f(s + hs, t - ht) - f(s - hs, t + ht) +
              f(s - hs, t - ht)) /
             (4.0 * hs * ht);
    return j;
}

Jet2 combine_richardson(const Jet2& full, const Jet2& half) {
    auto mix = [](const Vec4& d_full, const Vec4& d_half) {
        return (4.0 * d_half - d_full) / 3.0;
    };
    Jet2 j;
    j.x = half.x;
    j.x_s = mix(full.x_s, half.x_s);
    j.x_t = mix(full.x_t, half.x_t);
    j.x_ss = mix(full.x_ss, half.x_ss);
    j.x_st = mix(full.x_st, half.x_st);
    j.x_tt = mix(full.x_tt, half.x_tt);
    return j;
}

void check_regularity(const Jet2& j, const std::string& label) {
    const double E = dot(j.x_s, j.x_s);
    const double F = dot(j.x_s, j.x_t);
    const double G = dot(j.x_t, j.x_t);
    const double scale = std::max({1.0, E, G});
    if (E * G - F * F <= 1e-14 * scale * scale) {
        throw DegenerateImmersion(label + ": x_s, x_t numerically dependent");
    }
}

}  // namespace

Jet2 jet2(const ImmersionPatch& patch, double s, double t,
          const DiffScheme& scheme, JetChecks checks) {
    Jet2 j;
    if (scheme.kind == DiffScheme::Kind::analytic) {
        if (!patch.domain.contains(s, t)) {
            throw StencilOutOfDomain(patch.label + ": point outside domain");
        }
        j = patch.analytic_jet(s, t);
    } else {
        const double hs = scheme.step(s);
        const double ht = scheme.step(t);
        if (!patch.domain.contains(s - hs, t - ht) ||
            !patch.domain.contains(s + hs, t + ht)) {
            throw StencilOutOfDomain(patch.label + ": stencil leaves domain");
        }
        if (scheme.kind == DiffScheme::Kind::central) {
            j = central_jet(patch.map, s, t, hs, ht);
        } else {
            const Jet2 full = central_jet(patch.map, s, t, hs, ht);
            const Jet2 half = central_jet(patch.map, s, t, hs / 2.0, ht / 2.0);
            j = combine_richardson(full, half);
        }
    }
    if (checks == JetChecks::regular) check_regularity(j, patch.label);
    return j;
}

namespace {

// Shared stencil arithmetic for scalar- and vector-valued samples.
template <class T, class Sample>
T d1_impl(Sample&& at, double h, bool richardson) {
    auto central = [&](double step) -> T {
        return (at(step) - at(-step)) / (2.0 * step);
    };
    if (!richardson) return central(h);
    const T full = central(h);
    const T half = central(h / 2.0);
    return (4.0 * half - full) / 3.0;
}

template <class T, class Sample>
T d2_impl(Sample&& at, const T& center, double h, bool richardson) {
    auto central = [&](double step) -> T {
        return (at(step) - 2.0 * center + at(-step)) / (step * step);
    };
    if (!richardson) return central(h);
    const T full = central(h);
    const T half = central(h / 2.0);
    return (4.0 * half - full) / 3.0;
}

bool use_richardson(const DiffScheme& s) {
    return s.kind == DiffScheme::Kind::richardson;
}

}  // namespace

double field_d1(const ScalarField& f, double s, double t, int axis,
                const DiffScheme& scheme) {
    const double coord = axis == 0 ? s : t;
    const double h = scheme.step(coord);
    auto at = [&](double d) {
        return axis == 0 ? f(s + d, t) : f(s, t + d);
    };
    return d1_impl<double>(at, h, use_richardson(scheme));
}

Vec4 field_d1(const VecField& f, double s, double t, int axis,
              const DiffScheme& scheme) {
    const double coord = axis == 0 ? s : t;
    const double h = scheme.step(coord);
    auto at = [&](double d) {
        return axis == 0 ? f(s + d, t) : f(s, t + d);
    };
    return d1_impl<Vec4>(at, h, use_richardson(scheme));
}

double field_d2(const ScalarField& f, double s, double t, int axis,
                const DiffScheme& scheme) {
    const double coord = axis == 0 ? s : t;
    const double h = scheme.step(coord);
    auto at = [&](double d) {
        return axis == 0 ? f(s + d, t) : f(s, t + d);
    };
    return d2_impl<double>(at, f(s, t), h, use_richardson(scheme));
}

double field_d2_mixed(const ScalarField& f, double s, double t,
                      const DiffScheme& scheme) {
    const double hs = scheme.step(s);
    const double ht = scheme.step(t);
    auto mixed = [&](double a, double b) {
        return (f(s + a, t + b) - f(s + a, t - b) - f(s - a, t + b) +
                f(s - a, t - b)) /
               (4.0 * a * b);
    };
    if (!use_richardson(scheme)) return mixed(hs, ht);
    const double full = mixed(hs, ht);
    const double half = mixed(hs / 2.0, ht / 2.0);
    return (4.0 * half - full) / 3.0;
}

Vec4 frame_field_derivative(const VecField& e, double s, double t, int axis,
                            const DiffScheme& scheme) {
    const Vec4 center = e(s, t);
    const double cn = norm(center);
    auto aligned = [&](double d) {
        const Vec4 v = axis == 0 ? e(s + d, t) : e(s, t + d);
        const double corr = dot(v, center) / (norm(v) * cn);
        if (std::abs(corr) < 0.5) {
            throw FrameFlip("frame_field_derivative: stencil frame not alignable");
        }
        return corr < 0.0 ? -v : v;
    };
    const double coord = axis == 0 ? s : t;
    const double h = scheme.step(coord);
    return d1_impl<Vec4>(aligned, h, use_richardson(scheme));
}

}  // namespace surf4
