#pragma once

#include <functional>
#include <string>

#include "surf4/errors.hpp"
#include "surf4/euclid4.hpp"

namespace surf4 {

// Closed parameter rectangle [s0,s1] x [t0,t1].
struct Domain {
    double s0 = 0.0;
    double s1 = 1.0;
    double t0 = 0.0;
    double t1 = 1.0;

    // Membership with a small relative slack so exact boundary grid points
    // survive floating-point round trips.
    bool contains(double s, double t) const;
};

// Position and partial derivatives through order 2 at one parameter point.
struct Jet2 {
    Vec4 x, x_s, x_t, x_ss, x_st, x_tt;
};

struct DiffScheme {
    enum class Kind { analytic, central, richardson };

    Kind kind = Kind::analytic;
    double h = 0.0;  // 0 selects the default step

    // Step actually used at a coordinate value.  An explicit h is absolute;
    // the default scales with the coordinate magnitude.
    double step(double coord) const;

    static DiffScheme analytic_jets() { return {Kind::analytic, 0.0}; }
    static DiffScheme central(double h = 0.0) { return {Kind::central, h}; }
    static DiffScheme richardson(double h = 0.0) { return {Kind::richardson, h}; }
};

double default_step(double coord);

// Maximum stencil offset used around `coord`.  The analytic kind reports the
// default step: derived scalar fields are still sampled by differencing even
// when the jets themselves come from callbacks.
double guard_width(const DiffScheme& scheme, double coord);

enum class JetChecks { none, regular };

using MapFn = std::function<Vec4(double, double)>;
using JetFn = std::function<Jet2(double, double)>;

struct ImmersionPatch {
    MapFn map;
    JetFn jets;  // optional analytic partials; empty means finite differences only
    Domain domain;
    std::string label;

    bool has_analytic_jets() const { return static_cast<bool>(jets); }

    // Raw callback evaluation with no domain or regularity gating.
    Jet2 analytic_jet(double s, double t) const;
};

// Second-order jet at (s,t).  The analytic kind requires callbacks; the
// finite-difference kinds need the full stencil inside the domain.  With
// JetChecks::regular the Gram determinant of {x_s, x_t} is required to be
// positive beyond round-off, otherwise DegenerateImmersion is thrown.
Jet2 jet2(const ImmersionPatch& patch, double s, double t,
          const DiffScheme& scheme, JetChecks checks = JetChecks::regular);

// Derivatives of sampled fields.  These always difference values; a scheme of
// analytic kind behaves like central differencing with the default step.
using ScalarField = std::function<double(double, double)>;
using VecField = std::function<Vec4(double, double)>;

// axis: 0 differentiates in s, 1 in t.
double field_d1(const ScalarField& f, double s, double t, int axis,
                const DiffScheme& scheme);
Vec4 field_d1(const VecField& f, double s, double t, int axis,
              const DiffScheme& scheme);
double field_d2(const ScalarField& f, double s, double t, int axis,
                const DiffScheme& scheme);
double field_d2_mixed(const ScalarField& f, double s, double t,
                      const DiffScheme& scheme);

// Directional derivative of a unit frame field whose pointwise constructor is
// only defined up to sign.  Stencil samples are sign-aligned against the
// center sample first; a sample nearly orthogonal to the center one cannot be
// aligned and raises FrameFlip.
Vec4 frame_field_derivative(const VecField& e, double s, double t, int axis,
                            const DiffScheme& scheme);

}  // namespace surf4
