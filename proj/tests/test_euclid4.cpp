#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "surf4/euclid4.hpp"

using namespace surf4;

TEST_CASE("dot and norm basics") {
    CHECK(dot(Vec4{1, 0, 0, 0}, Vec4{0, 1, 0, 0}) == 0.0);
    CHECK(dot(Vec4{1, 2, 3, 4}, Vec4{4, 3, 2, 1}) == doctest::Approx(20.0));
    CHECK(norm(Vec4{3, 4, 0, 0}) == doctest::Approx(5.0));
    CHECK(norm(Vec4{1, 1, 1, 1}) == doctest::Approx(2.0));
}

TEST_CASE("normalized throws on near-zero input") {
    CHECK_THROWS_AS(normalized(Vec4{0, 0, 0, 0}), DegenerateSpan);
    CHECK_THROWS_AS(normalized(Vec4{1e-13, 0, 0, 0}), DegenerateSpan);
    Vec4 u = normalized(Vec4{0, 0, 2, 0});
    CHECK(u[2] == doctest::Approx(1.0));
}

TEST_CASE("cauchy-schwarz holds on random samples") {
    auto g = testing::rng(11);
    for (int i = 0; i < 200; ++i) {
        Vec4 a = testing::random_vec(g, -5, 5);
        Vec4 b = testing::random_vec(g, -5, 5);
        CHECK(std::abs(dot(a, b)) <= norm(a) * norm(b) + 1e-12);
    }
}

TEST_CASE("gram_schmidt on the documented pair") {
    std::vector<Vec4> out =
        gram_schmidt({Vec4{1, 0, 0, 0}, Vec4{1, 1, 0, 0}});
    REQUIRE(out.size() == 2);
    CHECK(out[0][0] == doctest::Approx(1.0));
    CHECK(out[0][1] == doctest::Approx(0.0));
    CHECK(out[1][0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(out[1][1] == doctest::Approx(1.0));
}

TEST_CASE("gram_schmidt output is orthonormal and first vector keeps direction") {
    auto g = testing::rng(17);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<Vec4> in;
        for (int i = 0; i < 3; ++i) in.push_back(testing::random_vec(g, -2, 2));
        std::vector<Vec4> q;
        try {
            q = gram_schmidt(in);
        } catch (const DegenerateSpan&) {
            continue;  // random triple happened to be dependent
        }
        for (std::size_t i = 0; i < q.size(); ++i) {
            for (std::size_t j = 0; j < q.size(); ++j) {
                const double want = (i == j) ? 1.0 : 0.0;
                CHECK(dot(q[i], q[j]) == doctest::Approx(want).epsilon(1e-12));
            }
        }
        // first output parallel to first input, same orientation
        CHECK(dot(q[0], in[0]) == doctest::Approx(norm(in[0])).epsilon(1e-12));
    }
}

TEST_CASE("gram_schmidt rejects dependent inputs") {
    CHECK_THROWS_AS(
        gram_schmidt({Vec4{1, 0, 0, 0}, Vec4{2, 0, 0, 0}}),
        DegenerateSpan);
    CHECK_THROWS_AS(
        gram_schmidt({Vec4{1, 1, 0, 0}, Vec4{0, 1, 1, 0}, Vec4{1, 2, 1, 0}}),
        DegenerateSpan);
    CHECK_THROWS_AS(gram_schmidt({Vec4{0, 0, 0, 0}}), DegenerateSpan);
}

TEST_CASE("triple_cross matches determinant pairing") {
    auto g = testing::rng(23);
    for (int rep = 0; rep < 100; ++rep) {
        Vec4 a = testing::random_vec(g);
        Vec4 b = testing::random_vec(g);
        Vec4 c = testing::random_vec(g);
        Vec4 d = testing::random_vec(g);
        Vec4 t = triple_cross(b, c, d);
        // t is orthogonal to each argument
        CHECK(dot(t, b) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(dot(t, c) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(dot(t, d) == doctest::Approx(0.0).epsilon(1e-12));
        // antisymmetry under swapping two arguments
        Vec4 s = triple_cross(c, b, d);
        for (int i = 0; i < 4; ++i)
            CHECK(s[i] == doctest::Approx(-t[i]).epsilon(1e-12));
        (void)a;
    }
    // orientation: e4 = triple_cross(e1, e2, e3)
    Vec4 e4 = triple_cross(Vec4{1, 0, 0, 0}, Vec4{0, 1, 0, 0}, Vec4{0, 0, 1, 0});
    CHECK(e4[3] == doctest::Approx(1.0));
    CHECK(std::abs(e4[0]) + std::abs(e4[1]) + std::abs(e4[2]) ==
          doctest::Approx(0.0));
}

TEST_CASE("eig_sym2 on the pure off-diagonal operator") {
    EigSym2 e = eig_sym2(SymOp2{0.0, 1.0, 0.0});
    CHECK(e.lambda[0] == doctest::Approx(-1.0));
    CHECK(e.lambda[1] == doctest::Approx(1.0));
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(e.v[0][0] == doctest::Approx(r));
    CHECK(e.v[0][1] == doctest::Approx(-r));
    CHECK(e.v[1][0] == doctest::Approx(r));
    CHECK(e.v[1][1] == doctest::Approx(r));
}

TEST_CASE("eig_sym2 near-tie falls back to coordinate axes") {
    EigSym2 e = eig_sym2(SymOp2{2.0, 0.0, 2.0});
    CHECK(e.lambda[0] == doctest::Approx(2.0));
    CHECK(e.lambda[1] == doctest::Approx(2.0));
    CHECK(e.v[0][0] == 1.0);
    CHECK(e.v[0][1] == 0.0);
    CHECK(e.v[1][0] == 0.0);
    CHECK(e.v[1][1] == 1.0);
}

TEST_CASE("eig_sym2 reconstructs the operator on random samples") {
    auto g = testing::rng(31);
    for (int rep = 0; rep < 200; ++rep) {
        SymOp2 op{testing::uniform(g, -3, 3), testing::uniform(g, -3, 3),
                  testing::uniform(g, -3, 3)};
        EigSym2 e = eig_sym2(op);
        CHECK(e.lambda[0] <= e.lambda[1]);
        CHECK(e.lambda[0] + e.lambda[1] == doctest::Approx(op.trace()).epsilon(1e-12));
        CHECK(e.lambda[0] * e.lambda[1] ==
              doctest::Approx(op.det()).epsilon(1e-10));
        for (int k = 0; k < 2; ++k) {
            const double vx = e.v[k][0], vy = e.v[k][1];
            CHECK(vx * vx + vy * vy == doctest::Approx(1.0).epsilon(1e-12));
            // A v = lambda v
            CHECK(op.a11 * vx + op.a12 * vy ==
                  doctest::Approx(e.lambda[k] * vx).epsilon(1e-9));
            CHECK(op.a12 * vx + op.a22 * vy ==
                  doctest::Approx(e.lambda[k] * vy).epsilon(1e-9));
        }
    }
}

TEST_CASE("commutator_21 of symmetric operators") {
    // [A,B]_21 for A=diag(1,-1), B=offdiag(1): (AB-BA)_21 = -2
    CHECK(commutator_21(SymOp2{1, 0, -1}, SymOp2{0, 1, 0}) ==
          doctest::Approx(-2.0));
    // commuting pair
    CHECK(commutator_21(SymOp2{2, 0, 3}, SymOp2{5, 0, 7}) == 0.0);
    auto g = testing::rng(37);
    for (int rep = 0; rep < 100; ++rep) {
        SymOp2 a{testing::uniform(g, -2, 2), testing::uniform(g, -2, 2),
                 testing::uniform(g, -2, 2)};
        SymOp2 b{testing::uniform(g, -2, 2), testing::uniform(g, -2, 2),
                 testing::uniform(g, -2, 2)};
        // antisymmetry in the arguments
        CHECK(commutator_21(a, b) == doctest::Approx(-commutator_21(b, a)));
        // explicit matrix arithmetic
        const double ab21 = a.a12 * b.a11 + a.a22 * b.a12;
        const double ba21 = b.a12 * a.a11 + b.a22 * a.a12;
        CHECK(commutator_21(a, b) == doctest::Approx(ab21 - ba21).epsilon(1e-12));
    }
}
