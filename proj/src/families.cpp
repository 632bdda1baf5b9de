#include "surf4/families.hpp"

#include <cmath>
#include <cstdio>
#include <utility>

namespace surf4 {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_orthonormal_pair(const Vec4& a, const Vec4& b, const char* where) {
    if (std::abs(dot(a, a) - 1.0) > 1e-10 || std::abs(dot(b, b) - 1.0) > 1e-10 ||
        std::abs(dot(a, b)) > 1e-10) {
        throw NonOrthonormalInputs(std::string(where) +
                                   ": expected an orthonormal pair");
    }
}

// b1, b2 spanning the orthogonal complement of {plane_normal, axis}.
std::pair<Vec4, Vec4> complement_pair(const Vec4& plane_normal, const Vec4& axis) {
    std::vector<Vec4> basis = complete_orthonormal({plane_normal, axis});
    return {basis[2], basis[3]};
}

void check_curve_against(const Vec4& v, const SphereCurve& c, const char* where) {
    if (std::abs(dot(v, v) - 1.0) > 1e-10) {
        throw NonOrthonormalInputs(std::string(where) + ": direction not unit");
    }
    for (int i = 0; i < 16; ++i) {
        const double t = 2.0 * kPi * i / 16.0;
        const Vec4 ct = c.value(t);
        if (std::abs(dot(ct, ct) - 1.0) > 1e-9 || std::abs(dot(v, ct)) > 1e-9) {
            throw NonOrthonormalInputs(
                std::string(where) + ": curve not unit or not orthogonal to direction");
        }
    }
}

}  // namespace

SphereCurve circle_on_s2(const Vec4& plane_normal, const Vec4& axis, double r) {
    if (!(r > 0.0) || r > 1.0) {
        throw InvalidRadius("circle_on_s2: radius must lie in (0, 1]");
    }
    require_orthonormal_pair(plane_normal, axis, "circle_on_s2");
    auto [b1, b2] = complement_pair(plane_normal, axis);
    const double height = std::sqrt(std::max(0.0, 1.0 - r * r));
    const Vec4 center = height * axis;
    SphereCurve c;
    c.plane_normal = plane_normal;
    c.value = [center, b1, b2, r](double t) {
        return center + r * (std::cos(t) * b1 + std::sin(t) * b2);
    };
    c.d1 = [b1, b2, r](double t) {
        return r * (-std::sin(t) * b1 + std::cos(t) * b2);
    };
    c.d2 = [b1, b2, r](double t) {
        return -r * (std::cos(t) * b1 + std::sin(t) * b2);
    };
    return c;
}

SphereCurve perturbed_sphere_curve(const Vec4& plane_normal, const Vec4& axis,
                                   double base_lat, double eps, int k) {
    require_orthonormal_pair(plane_normal, axis, "perturbed_sphere_curve");
    auto [b1, b2] = complement_pair(plane_normal, axis);
    const double kk = static_cast<double>(k);
    auto lat = [base_lat, eps, kk](double t) { return base_lat + eps * std::sin(kk * t); };
    auto dlat = [eps, kk](double t) { return eps * kk * std::cos(kk * t); };
    auto d2lat = [eps, kk](double t) { return -eps * kk * kk * std::sin(kk * t); };

    SphereCurve c;
    c.plane_normal = plane_normal;
    c.value = [=](double t) {
        const double v = lat(t);
        return std::sin(v) * axis +
               std::cos(v) * (std::cos(t) * b1 + std::sin(t) * b2);
    };
    c.d1 = [=](double t) {
        const double v = lat(t), dv = dlat(t);
        const double z1 = dv * std::cos(v);
        const double rho = std::cos(v), drho = -dv * std::sin(v);
        return z1 * axis + (drho * std::cos(t) - rho * std::sin(t)) * b1 +
               (drho * std::sin(t) + rho * std::cos(t)) * b2;
    };
    c.d2 = [=](double t) {
        const double v = lat(t), dv = dlat(t), d2v = d2lat(t);
        const double z2 = d2v * std::cos(v) - dv * dv * std::sin(v);
        const double rho = std::cos(v);
        const double drho = -dv * std::sin(v);
        const double d2rho = -d2v * std::sin(v) - dv * dv * std::cos(v);
        return z2 * axis +
               (d2rho * std::cos(t) - 2.0 * drho * std::sin(t) - rho * std::cos(t)) * b1 +
               (d2rho * std::sin(t) + 2.0 * drho * std::cos(t) - rho * std::sin(t)) * b2;
    };
    return c;
}

double SlopeProfile::theta(double s) const {
    if (kind == Kind::constant_theta) return theta0;
    return std::atan(s * du(s));
}

double SlopeProfile::dtheta(double s) const {
    if (kind == Kind::constant_theta) return 0.0;
    const double w = s * du(s);
    return (du(s) + s * d2u(s)) / (1.0 + w * w);
}

SlopeProfile SlopeProfile::constant_theta(double theta0) {
    SlopeProfile p;
    p.kind = Kind::constant_theta;
    p.theta0 = theta0;
    const double m = std::tan(theta0);
    p.u = [m](double s) { return m * std::log(s); };
    p.du = [m](double s) { return m / s; };
    p.d2u = [m](double s) { return -m / (s * s); };
    return p;
}

SlopeProfile SlopeProfile::from_u(std::function<double(double)> u,
                                  std::function<double(double)> du,
                                  std::function<double(double)> d2u) {
    SlopeProfile p;
    p.kind = Kind::from_u;
    p.u = std::move(u);
    p.du = std::move(du);
    p.d2u = std::move(d2u);
    return p;
}

SlopeProfile profile_linear(double a, double b) {
    return SlopeProfile::from_u([a, b](double s) { return a * s + b; },
                                [a](double) { return a; },
                                [](double) { return 0.0; });
}

SlopeProfile profile_quadratic(double a, double b) {
    return SlopeProfile::from_u([a, b](double s) { return a * s * s + b; },
                                [a](double s) { return 2.0 * a * s; },
                                [a](double) { return 2.0 * a; });
}

SlopeProfile profile_log_linear(double a, double b) {
    return SlopeProfile::from_u([a, b](double s) { return a * std::log(s) + b * s; },
                                [a, b](double s) { return a / s + b; },
                                [a](double s) { return -a / (s * s); });
}

ImmersionPatch gcr_example(const SlopeProfile& profile, const Vec4& phi0,
                           const SphereCurve& psi, const Domain& domain) {
    check_curve_against(phi0, psi, "gcr_example");
    for (int i = 0; i <= 128; ++i) {
        const double s = domain.s0 + (domain.s1 - domain.s0) * i / 128.0;
        if (std::abs(std::cos(profile.theta(s))) < 1e-6) {
            throw SingularProfile("gcr_example: cos(theta) vanishes in the domain");
        }
    }

    ImmersionPatch patch;
    patch.domain = domain;
    patch.label = "gcr_example";
    const SlopeProfile prof = profile;
    const SphereCurve curve = psi;
    const Vec4 c0 = phi0;
    patch.map = [prof, curve, c0](double s, double t) {
        const double u = prof.u(s);
        return s * std::cos(u) * c0 + s * std::sin(u) * curve.value(t);
    };
    patch.jets = [prof, curve, c0](double s, double t) {
        const double u = prof.u(s);
        const double du = prof.du(s);
        const double d2u = prof.d2u(s);
        const double cu = std::cos(u), su = std::sin(u);
        const Vec4 C = curve.value(t);
        const Vec4 C1 = curve.d1(t);
        const Vec4 C2 = curve.d2(t);

        Jet2 j;
        j.x = s * cu * c0 + s * su * C;
        j.x_s = (cu - s * du * su) * c0 + (su + s * du * cu) * C;
        j.x_t = s * su * C1;
        const double w = 2.0 * du + s * d2u;
        j.x_ss = (-w * su - s * du * du * cu) * c0 + (w * cu - s * du * du * su) * C;
        j.x_st = (su + s * du * cu) * C1;
        j.x_tt = s * su * C2;
        return j;
    };
    return patch;
}

ImmersionPatch css_example(double theta, const Vec4& c0, const SphereCurve& c2,
                           const Domain& domain) {
    if (!(theta > 1e-9) || !(theta < kPi / 2.0 - 1e-9)) {
        throw InvalidAngle("css_example: theta must lie strictly inside (0, pi/2)");
    }
    ImmersionPatch p =
        gcr_example(SlopeProfile::constant_theta(theta), c0, c2, domain);
    char label[64];
    std::snprintf(label, sizeof(label), "css_example(theta=%.6g)", theta);
    p.label = label;
    return p;
}

ImmersionPatch hyperplane_patch(const HyperplaneParams& p) {
    ImmersionPatch patch;
    patch.domain = Domain{0.5, 1.5, 0.5, 1.5};
    patch.label = "hyperplane_graph";
    const double a = p.alpha, b = p.beta;
    patch.map = [a, b](double s, double t) { return Vec4{s, t, a * s + b * t, 0}; };
    patch.jets = [a, b](double s, double t) {
        Jet2 j;
        j.x = Vec4{s, t, a * s + b * t, 0};
        j.x_s = Vec4{1, 0, a, 0};
        j.x_t = Vec4{0, 1, b, 0};
        return j;
    };
    return patch;
}

ImmersionPatch centered_sphere_patch(const CenteredSphereParams& p) {
    if (!(p.radius > 0.0)) throw InvalidRadius("centered_sphere_patch: radius <= 0");
    ImmersionPatch patch;
    patch.domain = Domain{0.2, 1.2, 0.2, 1.2};
    patch.label = "centered_sphere";
    const double R = p.radius;
    patch.map = [R](double s, double t) {
        return Vec4{R * std::cos(s) * std::cos(t), R * std::cos(s) * std::sin(t),
                    R * std::sin(s), 0};
    };
    patch.jets = [R](double s, double t) {
        const double cs = std::cos(s), ss = std::sin(s);
        const double ct = std::cos(t), st = std::sin(t);
        Jet2 j;
        j.x = Vec4{R * cs * ct, R * cs * st, R * ss, 0};
        j.x_s = Vec4{-R * ss * ct, -R * ss * st, R * cs, 0};
        j.x_t = Vec4{-R * cs * st, R * cs * ct, 0, 0};
        j.x_ss = Vec4{-R * cs * ct, -R * cs * st, -R * ss, 0};
        j.x_st = Vec4{R * ss * st, -R * ss * ct, 0, 0};
        j.x_tt = Vec4{-R * cs * ct, -R * cs * st, 0, 0};
        return j;
    };
    return patch;
}

ImmersionPatch trivial_cases(TrivialKind kind, const TrivialParams& p) {
    if (kind == TrivialKind::hyperplane) return hyperplane_patch(p.hyperplane);
    return centered_sphere_patch(p.sphere);
}

ImmersionPatch offset_cylinder(double offset) {
    ImmersionPatch patch;
    patch.domain = Domain{0.25, 1.25, 0.0, 1.5};
    patch.label = "offset_cylinder";
    const double d = offset;
    patch.map = [d](double s, double t) {
        return Vec4{d + std::cos(t), std::sin(t), s, 0};
    };
    patch.jets = [d](double s, double t) {
        Jet2 j;
        j.x = Vec4{d + std::cos(t), std::sin(t), s, 0};
        j.x_s = Vec4{0, 0, 1, 0};
        j.x_t = Vec4{-std::sin(t), std::cos(t), 0, 0};
        j.x_tt = Vec4{-std::cos(t), -std::sin(t), 0, 0};
        return j;
    };
    return patch;
}

ImmersionPatch flat_torus(double a, double b) {
    ImmersionPatch patch;
    patch.domain = Domain{0.0, 1.5, 0.0, 1.5};
    patch.label = "flat_torus";
    patch.map = [a, b](double s, double t) {
        return Vec4{a * std::cos(s), a * std::sin(s), b * std::cos(t), b * std::sin(t)};
    };
    patch.jets = [a, b](double s, double t) {
        Jet2 j;
        j.x = Vec4{a * std::cos(s), a * std::sin(s), b * std::cos(t), b * std::sin(t)};
        j.x_s = Vec4{-a * std::sin(s), a * std::cos(s), 0, 0};
        j.x_t = Vec4{0, 0, -b * std::sin(t), b * std::cos(t)};
        j.x_ss = Vec4{-a * std::cos(s), -a * std::sin(s), 0, 0};
        j.x_tt = Vec4{0, 0, -b * std::cos(t), -b * std::sin(t)};
        return j;
    };
    return patch;
}

ImmersionPatch add_bump(const ImmersionPatch& base, double amplitude) {
    const double A = amplitude;
    auto bump = [A](double s, double t) {
        return A * Vec4{std::sin(2 * s) * std::sin(3 * t), std::cos(s) * std::sin(2 * t),
                        std::sin(3 * s) * std::cos(2 * t), std::cos(2 * s) * std::cos(t)};
    };
    auto bump_s = [A](double s, double t) {
        return A * Vec4{2 * std::cos(2 * s) * std::sin(3 * t),
                        -std::sin(s) * std::sin(2 * t),
                        3 * std::cos(3 * s) * std::cos(2 * t),
                        -2 * std::sin(2 * s) * std::cos(t)};
    };
    auto bump_t = [A](double s, double t) {
        return A * Vec4{3 * std::sin(2 * s) * std::cos(3 * t),
                        2 * std::cos(s) * std::cos(2 * t),
                        -2 * std::sin(3 * s) * std::sin(2 * t),
                        -std::cos(2 * s) * std::sin(t)};
    };
    auto bump_ss = [A](double s, double t) {
        return A * Vec4{-4 * std::sin(2 * s) * std::sin(3 * t),
                        -std::cos(s) * std::sin(2 * t),
                        -9 * std::sin(3 * s) * std::cos(2 * t),
                        -4 * std::cos(2 * s) * std::cos(t)};
    };
    auto bump_st = [A](double s, double t) {
        return A * Vec4{6 * std::cos(2 * s) * std::cos(3 * t),
                        -2 * std::sin(s) * std::cos(2 * t),
                        -6 * std::cos(3 * s) * std::sin(2 * t),
                        2 * std::sin(2 * s) * std::sin(t)};
    };
    auto bump_tt = [A](double s, double t) {
        return A * Vec4{-9 * std::sin(2 * s) * std::sin(3 * t),
                        -4 * std::cos(s) * std::sin(2 * t),
                        -4 * std::sin(3 * s) * std::cos(2 * t),
                        -std::cos(2 * s) * std::cos(t)};
    };

    ImmersionPatch out;
    out.domain = base.domain;
    out.label = base.label + "+bump";
    const MapFn base_map = base.map;
    out.map = [base_map, bump](double s, double t) {
        return base_map(s, t) + bump(s, t);
    };
    if (base.jets) {
        const JetFn base_jets = base.jets;
        out.jets = [base_jets, bump, bump_s, bump_t, bump_ss, bump_st,
                    bump_tt](double s, double t) {
            Jet2 j = base_jets(s, t);
            j.x += bump(s, t);
            j.x_s += bump_s(s, t);
            j.x_t += bump_t(s, t);
            j.x_ss += bump_ss(s, t);
            j.x_st += bump_st(s, t);
            j.x_tt += bump_tt(s, t);
            return j;
        };
    }
    return out;
}

}  // namespace surf4
