#pragma once

#include <functional>

#include "surf4/jets.hpp"

namespace surf4 {

// Curve t -> C(t) on the unit 2-sphere cut out of S^3 by the hyperplane
// orthogonal to plane_normal, with analytic derivatives.
struct SphereCurve {
    Vec4 plane_normal;
    std::function<Vec4(double)> value;
    std::function<Vec4(double)> d1;
    std::function<Vec4(double)> d2;
};

// Latitude circle of Euclidean radius r around `axis` on that 2-sphere;
// r = 1 gives a great circle.
SphereCurve circle_on_s2(const Vec4& plane_normal, const Vec4& axis, double r);

// Non-circular spherical curve: latitude angle oscillates as
// lat(t) = base_lat + eps*sin(k t).  Used to exercise curve generality.
SphereCurve perturbed_sphere_curve(const Vec4& plane_normal, const Vec4& axis,
                                   double base_lat, double eps, int k);

// Radial slope data u(s) with derivatives; the decomposition angle satisfies
// tan(theta(s)) = s*u'(s).
struct SlopeProfile {
    enum class Kind { constant_theta, from_u };

    Kind kind = Kind::from_u;
    double theta0 = 0.0;  // used by constant_theta only
    std::function<double(double)> u;
    std::function<double(double)> du;
    std::function<double(double)> d2u;

    double theta(double s) const;
    double dtheta(double s) const;

    // u(s) = tan(theta0) * ln s, the unique profile with constant angle.
    static SlopeProfile constant_theta(double theta0);
    static SlopeProfile from_u(std::function<double(double)> u,
                               std::function<double(double)> du,
                               std::function<double(double)> d2u);
};

// u = a*s + b, u = a*s^2 + b, u = a*ln(s) + b*s.
SlopeProfile profile_linear(double a = 1.0, double b = 0.0);
SlopeProfile profile_quadratic(double a = 1.0, double b = 0.0);
SlopeProfile profile_log_linear(double a = 2.0, double b = 1.0);

inline Domain default_family_domain() { return Domain{0.5, 2.0, 0.0, 6.283185307179586}; }

// x(s,t) = s cos(u(s)) c0 + s sin(u(s)) c2(t) with u = tan(theta) ln s.
// theta must lie strictly inside (0, pi/2).
ImmersionPatch css_example(double theta, const Vec4& c0, const SphereCurve& c2,
                           const Domain& domain = default_family_domain());

// Same warped form with a general slope profile; theta(s) = arctan(s u'(s)).
ImmersionPatch gcr_example(const SlopeProfile& profile, const Vec4& phi0,
                           const SphereCurve& psi,
                           const Domain& domain = default_family_domain());

// Degenerate-angle reference patches.
struct HyperplaneParams {
    double alpha = 0.5;
    double beta = -0.25;
};
struct CenteredSphereParams {
    double radius = 1.0;
};

// Graph (s, t, alpha*s + beta*t, 0) inside the hyperplane x4 = 0: theta == 0.
ImmersionPatch hyperplane_patch(const HyperplaneParams& p = {});

// Two-parameter piece of the centered 3-sphere of the given radius,
// kept away from coordinate poles: theta == pi/2.
ImmersionPatch centered_sphere_patch(const CenteredSphereParams& p = {});

enum class TrivialKind { hyperplane, centered_sphere };

struct TrivialParams {
    HyperplaneParams hyperplane;
    CenteredSphereParams sphere;
};

ImmersionPatch trivial_cases(TrivialKind kind, const TrivialParams& p = {});

// Circular cylinder whose axis misses the origin:
// (offset + cos t, sin t, s, 0).  Negative control for the class detectors.
ImmersionPatch offset_cylinder(double offset = 2.0);

// (a cos s, a sin s, b cos t, b sin t): flat but extrinsically curved.
ImmersionPatch flat_torus(double a, double b);

// Patch plus a fixed smooth ambient deviation of the given amplitude;
// analytic jets are carried through.  Negative control for closed forms.
ImmersionPatch add_bump(const ImmersionPatch& base, double amplitude);

}  // namespace surf4
