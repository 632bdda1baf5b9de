#pragma once

#include <cmath>
#include <random>

#include "surf4/euclid4.hpp"
#include "surf4/jets.hpp"

namespace surf4::testing {

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64{seed}; }

inline double uniform(std::mt19937_64& g, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(g);
}

inline Vec4 random_vec(std::mt19937_64& g, double lo = -1.0, double hi = 1.0) {
    return Vec4{uniform(g, lo, hi), uniform(g, lo, hi), uniform(g, lo, hi),
                uniform(g, lo, hi)};
}

inline Vec4 random_unit(std::mt19937_64& g) {
    for (;;) {
        Vec4 v = random_vec(g);
        const double n = norm(v);
        if (n > 0.1) return v / n;
    }
}

// Random rotation of E^4: orthonormalize four random vectors, flip the last
// column if the determinant came out negative.
struct Rot4 {
    std::array<Vec4, 4> col;  // columns of the matrix

    Vec4 apply(const Vec4& x) const {
        Vec4 y;
        for (std::size_t i = 0; i < 4; ++i)
            y += x[i] * col[i];
        return y;
    }
};

inline Rot4 random_rotation(std::mt19937_64& g) {
    std::vector<Vec4> raw;
    for (;;) {
        raw.clear();
        for (int i = 0; i < 4; ++i) raw.push_back(random_vec(g));
        try {
            std::vector<Vec4> q = gram_schmidt(raw, 1e-6);
            // det > 0 iff q3 == triple_cross(q0, q1, q2).
            Vec4 tc = triple_cross(q[0], q[1], q[2]);
            if (dot(tc, q[3]) < 0.0) q[3] = -q[3];
            return Rot4{{q[0], q[1], q[2], q[3]}};
        } catch (const DegenerateSpan&) {
            continue;
        }
    }
}

inline ImmersionPatch rotate_patch(const ImmersionPatch& p, const Rot4& R) {
    ImmersionPatch out;
    out.domain = p.domain;
    out.label = p.label + "+rot";
    const MapFn map = p.map;
    out.map = [map, R](double s, double t) { return R.apply(map(s, t)); };
    if (p.jets) {
        const JetFn jets = p.jets;
        out.jets = [jets, R](double s, double t) {
            Jet2 j = jets(s, t);
            j.x = R.apply(j.x);
            j.x_s = R.apply(j.x_s);
            j.x_t = R.apply(j.x_t);
            j.x_ss = R.apply(j.x_ss);
            j.x_st = R.apply(j.x_st);
            j.x_tt = R.apply(j.x_tt);
            return j;
        };
    }
    return out;
}

inline ImmersionPatch scale_patch(const ImmersionPatch& p, double lambda) {
    ImmersionPatch out;
    out.domain = p.domain;
    out.label = p.label + "+scale";
    const MapFn map = p.map;
    out.map = [map, lambda](double s, double t) { return lambda * map(s, t); };
    if (p.jets) {
        const JetFn jets = p.jets;
        out.jets = [jets, lambda](double s, double t) {
            Jet2 j = jets(s, t);
            j.x *= lambda;
            j.x_s *= lambda;
            j.x_t *= lambda;
            j.x_ss *= lambda;
            j.x_st *= lambda;
            j.x_tt *= lambda;
            return j;
        };
    }
    return out;
}

// Graph of the two real components of (s + i t)^2: the standard example of a
// surface with a nonflat normal bundle.
inline ImmersionPatch complex_square_graph() {
    ImmersionPatch p;
    p.domain = Domain{-1.0, 1.0, -1.0, 1.0};
    p.label = "complex_square_graph";
    p.map = [](double s, double t) {
        return Vec4{s, t, s * s - t * t, 2.0 * s * t};
    };
    p.jets = [](double s, double t) {
        Jet2 j;
        j.x = Vec4{s, t, s * s - t * t, 2.0 * s * t};
        j.x_s = Vec4{1, 0, 2.0 * s, 2.0 * t};
        j.x_t = Vec4{0, 1, -2.0 * t, 2.0 * s};
        j.x_ss = Vec4{0, 0, 2, 0};
        j.x_st = Vec4{0, 0, 0, 2};
        j.x_tt = Vec4{0, 0, -2, 0};
        return j;
    };
    return p;
}

}  // namespace surf4::testing
