#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "surf4/families.hpp"
#include "surf4/position_analysis.hpp"

using namespace surf4;

namespace {

const double kPi = 3.14159265358979323846;
const Vec4 kC0{1, 0, 0, 0};
const Vec4 kAxis{0, 1, 0, 0};

ImmersionPatch css_patch(double theta) {
    return css_example(theta, kC0, circle_on_s2(kC0, kAxis, 1.0));
}

ImmersionPatch gcr_patch(const SlopeProfile& profile, double r = 0.5) {
    return gcr_example(profile, kC0, circle_on_s2(kC0, kAxis, r),
                       Domain{1.0, 2.0, 0.0, 2 * kPi});
}

bool has_flag(const ClassVerdict& v, const std::string& f) {
    for (const auto& x : v.flags) {
        if (x == f) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("decompose splits the position orthogonally") {
    ImmersionPatch gcr = gcr_patch(profile_linear());
    auto g = testing::rng(61);
    for (int rep = 0; rep < 30; ++rep) {
        const double s = testing::uniform(g, 1.05, 1.95);
        const double t = testing::uniform(g, 0.1, 6.1);
        Jet2 j = jet2(gcr, s, t, DiffScheme::analytic_jets());
        PositionDecomposition d = decompose(j);
        CHECK(norm(d.xT + d.xPerp - j.x) < 1e-12);
        CHECK(std::abs(dot(d.xT, d.xPerp)) < 1e-12 * (1 + d.mu * d.mu));
        CHECK(norm(d.xT) == doctest::Approx(d.mu * std::cos(d.theta)).epsilon(1e-12));
        CHECK(norm(d.xPerp) == doctest::Approx(d.mu * std::sin(d.theta)).epsilon(1e-12));
        // projecting twice changes nothing
        CHECK(norm(tangential_projection(j, d.xT) - d.xT) < 1e-12);
    }
}

TEST_CASE("decompose endpoint cases") {
    // plane through the origin: position is tangent
    ImmersionPatch plane = hyperplane_patch();
    PositionDecomposition dp =
        decompose(jet2(plane, 1.0, 1.0, DiffScheme::analytic_jets()));
    CHECK(norm(dp.xPerp) < 1e-12);
    CHECK(dp.theta == doctest::Approx(0.0));

    // centered sphere: position is normal
    ImmersionPatch sphere = centered_sphere_patch();
    PositionDecomposition ds =
        decompose(jet2(sphere, 0.7, 0.7, DiffScheme::analytic_jets()));
    CHECK(norm(ds.xT) < 1e-12);
    CHECK(ds.theta == doctest::Approx(kPi / 2));

    // cone point of the constant-angle family: tangent span is a line, the
    // decomposition still reports |xT| = s cos(theta)
    ImmersionPatch css = css_patch(kPi / 3);
    PositionDecomposition dc = decompose(css.analytic_jet(1.0, 0.4));
    CHECK(norm(dc.xT) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(dc.mu == doctest::Approx(1.0));

    Jet2 origin_jet;
    origin_jet.x = Vec4{0, 0, 0, 0};
    origin_jet.x_s = Vec4{1, 0, 0, 0};
    origin_jet.x_t = Vec4{0, 1, 0, 0};
    CHECK_THROWS_AS(decompose(origin_jet), OriginPoint);
}

TEST_CASE("derivatives of mu along the adapted tangent frame") {
    // constant angle: e1(mu) = cos(theta), e2(mu) = 0
    ImmersionPatch css = css_patch(kPi / 4);
    auto [d1, d2] = directional_derivatives_of_mu(css, 1.5, 0.9);
    CHECK(d1 == doctest::Approx(std::cos(kPi / 4)).epsilon(1e-6));
    CHECK(std::abs(d2) < 1e-6);

    // linear slope at s=1: theta = atan(1), so e1(mu) = 1/sqrt(2).
    // s=1 sits on the domain edge, so difference mu one-sided via a shifted
    // domain: use s slightly inside instead.
    ImmersionPatch gcr = gcr_patch(profile_linear());
    auto [g1, g2] = directional_derivatives_of_mu(gcr, 1.001, 2.0);
    const double theta = std::atan(1.001);
    CHECK(g1 == doctest::Approx(std::cos(theta)).epsilon(1e-6));
    CHECK(std::abs(g2) < 1e-6);

    // centered sphere has constant mu but no tangential part; the frame
    // cannot be built there
    ImmersionPatch sphere = centered_sphere_patch();
    CHECK_THROWS_AS(directional_derivatives_of_mu(sphere, 0.7, 0.7),
                    TangentialComponentVanishes);

    // off-origin cylinder: mu varies, both derivatives finite; checked
    // against direct differencing of |x| along the frame directions
    ImmersionPatch cyl = offset_cylinder();
    auto [c1, c2] = directional_derivatives_of_mu(cyl, 0.5, 1.0);
    Jet2 j = jet2(cyl, 0.5, 1.0, DiffScheme::analytic_jets());
    PositionDecomposition d = decompose(j);
    // e1 || xT and mu^2 = |xT|^2 + |xPerp|^2 gives e1(mu) = |xT|/mu
    CHECK(c1 == doctest::Approx(norm(d.xT) / d.mu).epsilon(1e-6));
    CHECK(std::abs(c2) < 1e-6);
}

TEST_CASE("detector grid respects the guard band") {
    ImmersionPatch css = css_patch(kPi / 3);
    DetectorOptions opt;
    opt.ns = 9;
    opt.nt = 7;
    DetectorGrid grid = detector_grid(css, opt);
    REQUIRE(grid.s.size() == 9);
    REQUIRE(grid.t.size() == 7);
    const Domain& d = css.domain;
    CHECK(grid.s.front() == doctest::Approx(d.s0 + 2 * default_step(d.s0)));
    CHECK(grid.s.back() == doctest::Approx(d.s1 - 2 * default_step(d.s1)));
    CHECK(grid.t.front() >= d.t0);
    CHECK(grid.t.back() <= d.t1);

    DetectorOptions bad;
    bad.ns = 1;
    CHECK_THROWS_AS(detector_grid(css, bad), ConfigError);

    ImmersionPatch tiny = css_patch(kPi / 3);
    tiny.domain = Domain{1.0, 1.0 + 1e-5, 0.0, 1.0};
    CHECK_THROWS_AS(detector_grid(tiny, DetectorOptions{}), DegenerateGrid);
}

TEST_CASE("constant ratio verdicts") {
    // constant angle: ratio = cot(theta) everywhere
    ClassVerdict v = is_constant_ratio(css_patch(kPi / 3));
    CHECK(v.holds);
    CHECK(v.max_deviation < v.tolerance);
    CHECK(v.witness_value == doctest::Approx(1.0 / std::tan(kPi / 3)).epsilon(1e-9));
    CHECK(v.witness_angle == doctest::Approx(kPi / 3).epsilon(1e-9));
    CHECK(v.excluded_points == 0);
    CHECK(v.total_points == 33 * 33);

    // varying angle: fails
    ClassVerdict w = is_constant_ratio(gcr_patch(profile_linear()));
    CHECK_FALSE(w.holds);
    CHECK(w.max_deviation > w.tolerance);

    // centered sphere: every point has a vanishing tangential part
    ClassVerdict s = is_constant_ratio(centered_sphere_patch());
    CHECK_FALSE(s.holds);
    CHECK(has_flag(s, "degenerate-grid"));
    CHECK(s.excluded_points == s.total_points);
}

TEST_CASE("constant length verdicts") {
    ImmersionPatch sphere = centered_sphere_patch(CenteredSphereParams{1.5});
    ClassVerdict n = is_N_constant(sphere);
    CHECK(n.holds);
    CHECK(n.witness_value == doctest::Approx(1.5).epsilon(1e-9));
    // |xT| = 0 is a constant as well
    CHECK(is_T_constant(sphere).holds);

    ImmersionPatch plane = hyperplane_patch();
    CHECK(is_N_constant(plane).holds);
    CHECK_FALSE(is_T_constant(plane).holds);

    // both lengths scale with s on the family patches
    ImmersionPatch css = css_patch(kPi / 3);
    CHECK_FALSE(is_T_constant(css).holds);
    CHECK_FALSE(is_N_constant(css).holds);
}

TEST_CASE("generalized constant ratio verdicts") {
    CHECK(is_GCR(css_patch(kPi / 3)).holds);
    CHECK(is_GCR(css_patch(kPi / 6)).holds);
    CHECK(is_GCR(gcr_patch(profile_linear())).holds);
    CHECK(is_GCR(gcr_patch(profile_quadratic())).holds);
    CHECK(is_GCR(gcr_patch(profile_log_linear())).holds);

    ClassVerdict cyl = is_GCR(offset_cylinder());
    CHECK_FALSE(cyl.holds);
    CHECK(cyl.witness_value > 1e-3);  // raw off-diagonal is macroscopic

    // centered sphere: no tangential direction to test, umbilic everywhere
    ClassVerdict sph = is_GCR(centered_sphere_patch());
    CHECK_FALSE(sph.holds);
    CHECK(has_flag(sph, "umbilic-dominated"));
    CHECK(has_flag(sph, "degenerate-grid"));
}

TEST_CASE("constant slope verdicts on the family patches") {
    for (double theta : {kPi / 6, kPi / 4, kPi / 3}) {
        ClassVerdict v = is_CSS(css_patch(theta));
        CHECK(v.holds);
        CHECK(v.witness_angle == doctest::Approx(theta).epsilon(1e-6));
        CHECK(v.max_deviation < v.tolerance);
        CHECK(v.flags.empty());
    }
    // latitude circle instead of a great circle: still constant slope
    ImmersionPatch lat = css_example(kPi / 4, kC0, circle_on_s2(kC0, kAxis, 0.5));
    ClassVerdict vlat = is_CSS(lat);
    CHECK(vlat.holds);
    CHECK(vlat.witness_angle == doctest::Approx(kPi / 4).epsilon(1e-6));
}

TEST_CASE("constant slope rejects varying angles via the consistency gate") {
    for (const SlopeProfile& p :
         {profile_linear(), profile_quadratic(), profile_log_linear()}) {
        ClassVerdict v = is_CSS(gcr_patch(p));
        CHECK_FALSE(v.holds);
        // the normal bundle is flat, so the failure is the angle itself
        CHECK_FALSE(has_flag(v, "non-flat-normal-bundle"));
        CHECK_FALSE(has_flag(v, "path-dependent"));
    }
}

TEST_CASE("constant slope trivial and obstructed cases") {
    // plane through the origin: holds with angle zero
    ClassVerdict p = is_CSS(hyperplane_patch());
    CHECK(p.holds);
    CHECK(p.witness_angle == doctest::Approx(0.0).epsilon(1e-8));

    // centered sphere: holds with angle pi/2 (normal field x/r is parallel)
    ClassVerdict s = is_CSS(centered_sphere_patch());
    CHECK(s.holds);
    CHECK(s.witness_angle == doctest::Approx(kPi / 2).epsilon(1e-6));

    // graph of z^2 away from the origin: genuinely non-flat normal bundle
    ImmersionPatch graph = testing::complex_square_graph();
    graph.domain = Domain{0.1, 0.9, 0.1, 0.9};
    ClassVerdict g = is_CSS(graph);
    CHECK_FALSE(g.holds);
    CHECK(has_flag(g, "non-flat-normal-bundle"));
}

TEST_CASE("verdicts are rotation invariant") {
    auto g = testing::rng(67);
    ImmersionPatch css = css_patch(kPi / 4);
    ImmersionPatch gcr = gcr_patch(profile_linear());
    ClassVerdict base_css = is_CSS(css);
    ClassVerdict base_gcr = is_GCR(gcr);
    for (int rep = 0; rep < 3; ++rep) {
        testing::Rot4 R = testing::random_rotation(g);
        ClassVerdict rc = is_CSS(testing::rotate_patch(css, R));
        CHECK(rc.holds == base_css.holds);
        CHECK(rc.witness_angle == doctest::Approx(base_css.witness_angle).epsilon(1e-9));
        ClassVerdict rg = is_GCR(testing::rotate_patch(gcr, R));
        CHECK(rg.holds == base_gcr.holds);
        CHECK(rg.max_deviation ==
              doctest::Approx(base_gcr.max_deviation).epsilon(1e-6));
        ClassVerdict rr = is_constant_ratio(testing::rotate_patch(css, R));
        CHECK(rr.holds);
        CHECK(is_T_constant(testing::rotate_patch(css, R)).holds ==
              is_T_constant(css).holds);
    }
}

TEST_CASE("verdicts are scale invariant and theta is unchanged") {
    ImmersionPatch css = css_patch(kPi / 3);
    ImmersionPatch big = testing::scale_patch(css, 7.0);
    Jet2 j = jet2(css, 1.5, 1.0, DiffScheme::analytic_jets());
    Jet2 jb = jet2(big, 1.5, 1.0, DiffScheme::analytic_jets());
    PositionDecomposition d = decompose(j);
    PositionDecomposition db = decompose(jb);
    CHECK(db.theta == doctest::Approx(d.theta).epsilon(1e-10));
    CHECK(db.mu == doctest::Approx(7.0 * d.mu).epsilon(1e-12));
    CHECK(norm(db.xT) == doctest::Approx(7.0 * norm(d.xT)).epsilon(1e-12));

    CHECK(is_CSS(big).holds);
    CHECK(is_CSS(big).witness_angle == doctest::Approx(kPi / 3).epsilon(1e-8));
    CHECK(is_GCR(big).holds);
    CHECK(is_constant_ratio(big).holds);
    CHECK(is_T_constant(big).holds == is_T_constant(css).holds);

    ImmersionPatch gcr_big = testing::scale_patch(gcr_patch(profile_linear()), 0.37);
    CHECK_FALSE(is_CSS(gcr_big).holds);
    CHECK(is_GCR(gcr_big).holds);
}

TEST_CASE("class implications at the verdict level") {
    // constant slope implies generalized constant ratio
    for (double theta : {kPi / 6, kPi / 3}) {
        ImmersionPatch p = css_patch(theta);
        if (is_CSS(p).holds) CHECK(is_GCR(p).holds);
    }
    // constant ratio <=> constant decomposition angle
    {
        ImmersionPatch p = css_patch(kPi / 4);
        DetectorGrid grid = detector_grid(p, DetectorOptions{});
        std::vector<double> thetas;
        for (double t : grid.t) {
            for (double s : grid.s) {
                thetas.push_back(
                    decompose(jet2(p, s, t, DiffScheme::analytic_jets())).theta);
            }
        }
        double mean = 0;
        for (double x : thetas) mean += x;
        mean /= thetas.size();
        double var = 0;
        for (double x : thetas) var += (x - mean) * (x - mean);
        const double sd = std::sqrt(var / thetas.size());
        CHECK(sd < 1e-5);
        CHECK(is_constant_ratio(p).holds);
    }
    {
        ImmersionPatch p = gcr_patch(profile_linear());
        CHECK_FALSE(is_constant_ratio(p).holds);
        Jet2 a = jet2(p, 1.2, 1.0, DiffScheme::analytic_jets());
        Jet2 b = jet2(p, 1.8, 1.0, DiffScheme::analytic_jets());
        CHECK(std::abs(decompose(a).theta - decompose(b).theta) > 1e-2);
    }
}

TEST_CASE("decomposition angle matches the slope profile") {
    for (const SlopeProfile& p :
         {profile_linear(), profile_quadratic(), profile_log_linear()}) {
        ImmersionPatch patch = gcr_patch(p);
        auto g = testing::rng(71);
        for (int rep = 0; rep < 20; ++rep) {
            const double s = testing::uniform(g, 1.01, 1.99);
            const double t = testing::uniform(g, 0.1, 6.1);
            PositionDecomposition d =
                decompose(jet2(patch, s, t, DiffScheme::analytic_jets()));
            CHECK(d.theta == doctest::Approx(std::atan(s * p.du(s))).epsilon(1e-8));
        }
    }
}
