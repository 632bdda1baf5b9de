#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "surf4/jets.hpp"

using namespace surf4;

namespace {

// Smooth test immersion with hand-written partials.
Vec4 wavy_map(double s, double t) {
    return Vec4{std::sin(s) * std::cos(t), s * s * t,
                std::exp(0.3 * s * t), std::cos(s + 2.0 * t)};
}

Jet2 wavy_jets(double s, double t) {
    const double e = std::exp(0.3 * s * t);
    Jet2 j;
    j.x = wavy_map(s, t);
    j.x_s = Vec4{std::cos(s) * std::cos(t), 2.0 * s * t, 0.3 * t * e,
                 -std::sin(s + 2.0 * t)};
    j.x_t = Vec4{-std::sin(s) * std::sin(t), s * s, 0.3 * s * e,
                 -2.0 * std::sin(s + 2.0 * t)};
    j.x_ss = Vec4{-std::sin(s) * std::cos(t), 2.0 * t, 0.09 * t * t * e,
                  -std::cos(s + 2.0 * t)};
    j.x_st = Vec4{-std::cos(s) * std::sin(t), 2.0 * s,
                  (0.3 + 0.09 * s * t) * e, -2.0 * std::cos(s + 2.0 * t)};
    j.x_tt = Vec4{-std::sin(s) * std::cos(t), 0.0, 0.09 * s * s * e,
                  -4.0 * std::cos(s + 2.0 * t)};
    return j;
}

ImmersionPatch wavy_patch() {
    return ImmersionPatch{wavy_map, wavy_jets, Domain{0.2, 2.0, 0.2, 2.0},
                          "wavy"};
}

double max_jet_error(const Jet2& a, const Jet2& b) {
    double m = 0.0;
    const Vec4 diffs[] = {a.x - b.x,   a.x_s - b.x_s,   a.x_t - b.x_t,
                          a.x_ss - b.x_ss, a.x_st - b.x_st, a.x_tt - b.x_tt};
    for (const Vec4& d : diffs)
        for (int i = 0; i < 4; ++i) m = std::max(m, std::abs(d[i]));
    return m;
}

}  // namespace

TEST_CASE("jet of an affine plane patch") {
    ImmersionPatch plane{
        [](double s, double t) { return Vec4{s, t, 0, 0}; },
        nullptr, Domain{-1, 1, -1, 1}, "plane"};
    Jet2 j = jet2(plane, 0.3, -0.2, DiffScheme::central());
    CHECK(j.x_s[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(j.x_s[1] == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(j.x_t[0] == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(j.x_t[1] == doctest::Approx(1.0).epsilon(1e-10));
    for (int i = 0; i < 4; ++i) {
        CHECK(std::abs(j.x_ss[i]) < 1e-10);
        CHECK(std::abs(j.x_st[i]) < 1e-10);
        CHECK(std::abs(j.x_tt[i]) < 1e-10);
    }
}

TEST_CASE("analytic jets are returned verbatim and domain-gated") {
    ImmersionPatch p = wavy_patch();
    Jet2 a = jet2(p, 0.7, 1.1, DiffScheme::analytic_jets());
    CHECK(max_jet_error(a, wavy_jets(0.7, 1.1)) == 0.0);
    CHECK_THROWS_AS(jet2(p, 3.0, 1.0, DiffScheme::analytic_jets()),
                    StencilOutOfDomain);
    ImmersionPatch no_jets{wavy_map, nullptr, p.domain, "nojets"};
    CHECK_THROWS_AS(jet2(no_jets, 0.7, 1.1, DiffScheme::analytic_jets()),
                    AnalyticJetsUnavailable);
}

TEST_CASE("central and richardson jets converge to the analytic jet") {
    ImmersionPatch p = wavy_patch();
    const double s = 0.9, t = 1.3;
    const Jet2 exact = wavy_jets(s, t);

    // truncation ~ h^2 * max 4th derivative / 12 ~ 1.3e-6 for this map
    const double e_c3 = max_jet_error(jet2(p, s, t, DiffScheme::central(1e-3)), exact);
    CHECK(e_c3 < 4e-6);

    // order near 2: halving h shrinks the error ~4x
    const double e1 = max_jet_error(jet2(p, s, t, DiffScheme::central(1e-2)), exact);
    const double e2 = max_jet_error(jet2(p, s, t, DiffScheme::central(5e-3)), exact);
    const double order = std::log2(e1 / e2);
    CHECK(order > 1.8);
    CHECK(order < 2.2);

    // richardson at the same h is far more accurate
    const double e_r = max_jet_error(jet2(p, s, t, DiffScheme::richardson(1e-2)), exact);
    CHECK(e_r * 20.0 < e1);
}

TEST_CASE("schwarz symmetry of the mixed partial") {
    ImmersionPatch p = wavy_patch();
    const double s = 1.1, t = 0.8;
    const DiffScheme sch = DiffScheme::central(1e-3);
    Jet2 j = jet2(p, s, t, sch);
    // mixed partial as d/ds of the x_t field
    VecField xt_field = [&](double a, double b) {
        return jet2(p, a, b, sch).x_t;
    };
    Vec4 other = field_d1(xt_field, s, t, 0, sch);
    for (int i = 0; i < 4; ++i)
        CHECK(j.x_st[i] == doctest::Approx(other[i]).epsilon(1e-5));
}

TEST_CASE("stencil domain checks") {
    ImmersionPatch p = wavy_patch();
    CHECK_THROWS_AS(jet2(p, 0.25, 1.0, DiffScheme::central(0.1)),
                    StencilOutOfDomain);
    CHECK_THROWS_AS(jet2(p, 1.0, 1.95, DiffScheme::richardson(0.1)),
                    StencilOutOfDomain);
    CHECK_NOTHROW(jet2(p, 0.31, 1.0, DiffScheme::central(0.1)));
}

TEST_CASE("degenerate immersion detection and opt-out") {
    ImmersionPatch line{
        [](double s, double t) { (void)t; return Vec4{s, 2.0 * s, 0, 0}; },
        nullptr, Domain{-1, 1, -1, 1}, "line"};
    CHECK_THROWS_AS(jet2(line, 0.0, 0.0, DiffScheme::central()),
                    DegenerateImmersion);
    CHECK_NOTHROW(jet2(line, 0.0, 0.0, DiffScheme::central(), JetChecks::none));
}

TEST_CASE("default step and guard width") {
    CHECK(default_step(0.5) == doctest::Approx(1e-4));
    CHECK(default_step(-3.0) == doctest::Approx(3e-4));
    CHECK(DiffScheme::central(1e-3).step(100.0) == doctest::Approx(1e-3));
    CHECK(DiffScheme::central().step(2.0) == doctest::Approx(2e-4));
    CHECK(guard_width(DiffScheme::analytic_jets(), 2.0) == doctest::Approx(2e-4));
    CHECK(guard_width(DiffScheme::richardson(1e-2), 2.0) == doctest::Approx(1e-2));
}

TEST_CASE("scalar field derivatives") {
    ScalarField f = [](double s, double t) {
        return std::sin(s) * std::cos(2.0 * t);
    };
    const double s = 0.6, t = 0.9;
    const DiffScheme rich = DiffScheme::richardson(1e-2);
    CHECK(field_d1(f, s, t, 0, rich) ==
          doctest::Approx(std::cos(s) * std::cos(2 * t)).epsilon(1e-9));
    CHECK(field_d1(f, s, t, 1, rich) ==
          doctest::Approx(-2 * std::sin(s) * std::sin(2 * t)).epsilon(1e-9));
    CHECK(field_d2(f, s, t, 0, rich) ==
          doctest::Approx(-std::sin(s) * std::cos(2 * t)).epsilon(1e-7));
    CHECK(field_d2(f, s, t, 1, rich) ==
          doctest::Approx(-4 * std::sin(s) * std::cos(2 * t)).epsilon(1e-7));
    CHECK(field_d2_mixed(f, s, t, rich) ==
          doctest::Approx(-2 * std::cos(s) * std::sin(2 * t)).epsilon(1e-7));
    // analytic kind falls back to central with the default step
    CHECK(field_d1(f, s, t, 0, DiffScheme::analytic_jets()) ==
          doctest::Approx(std::cos(s) * std::cos(2 * t)).epsilon(1e-7));
}

TEST_CASE("frame field derivative aligns signs across the stencil") {
    // unit field with an artificial sign discontinuity at s = 0.5
    VecField e = [](double s, double t) {
        (void)t;
        const double sign = s > 0.5 ? -1.0 : 1.0;
        return sign * Vec4{std::cos(s), std::sin(s), 0, 0};
    };
    Vec4 d = frame_field_derivative(e, 0.5, 0.0, 0, DiffScheme::central(1e-3));
    CHECK(d[0] == doctest::Approx(-std::sin(0.5)).epsilon(1e-6));
    CHECK(d[1] == doctest::Approx(std::cos(0.5)).epsilon(1e-6));

    VecField constant = [](double, double) { return Vec4{0, 0, 0, 1}; };
    Vec4 z = frame_field_derivative(constant, 0.3, 0.3, 1, DiffScheme::central());
    CHECK(norm(z) == doctest::Approx(0.0));
}

TEST_CASE("frame field derivative rejects unalignable stencils") {
    // rotates ~2 radians across one step: correlation magnitude < 0.5
    VecField fast = [](double s, double t) {
        (void)t;
        return Vec4{std::cos(20.0 * s), std::sin(20.0 * s), 0, 0};
    };
    CHECK_THROWS_AS(frame_field_derivative(fast, 1.0, 0.0, 0, DiffScheme::central(0.1)),
                    FrameFlip);
}
