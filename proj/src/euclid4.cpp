#include "surf4/euclid4.hpp"

#include <algorithm>
#include <cmath>

namespace surf4 {

Vec4& Vec4::operator+=(const Vec4& o) {
    for (std::size_t i = 0; i < 4; ++i) v[i] += o.v[i];
    return *this;
}

Vec4& Vec4::operator-=(const Vec4& o) {
    for (std::size_t i = 0; i < 4; ++i) v[i] -= o.v[i];
    return *this;
}

Vec4& Vec4::operator*=(double c) {
    for (double& x : v) x *= c;
    return *this;
}

Vec4 operator+(Vec4 a, const Vec4& b) { return a += b; }
Vec4 operator-(Vec4 a, const Vec4& b) { return a -= b; }
Vec4 operator*(double c, Vec4 a) { return a *= c; }
Vec4 operator*(Vec4 a, double c) { return a *= c; }
Vec4 operator/(Vec4 a, double c) { return a *= (1.0 / c); }
Vec4 operator-(const Vec4& a) { return -1.0 * a; }

double dot(const Vec4& a, const Vec4& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < 4; ++i) s += a[i] * b[i];
    return s;
}

double norm(const Vec4& a) { return std::sqrt(dot(a, a)); }

Vec4 normalized(const Vec4& a, double tol) {
    const double n = norm(a);
    if (n <= tol) throw DegenerateSpan("normalized: vector norm below tolerance");
    return a / n;
}

namespace {

// Signed 3x3 determinant.
double det3(double a, double b, double c,
            double d, double e, double f,
            double g, double h, double i) {
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
}

}  // namespace

Vec4 triple_cross(const Vec4& b, const Vec4& c, const Vec4& d) {
    // Cofactor expansion of det[b; c; d; e] along the symbolic last row.
    Vec4 out;
    out[0] = -det3(b[1], b[2], b[3], c[1], c[2], c[3], d[1], d[2], d[3]);
    out[1] = det3(b[0], b[2], b[3], c[0], c[2], c[3], d[0], d[2], d[3]);
    out[2] = -det3(b[0], b[1], b[3], c[0], c[1], c[3], d[0], d[1], d[3]);
    out[3] = det3(b[0], b[1], b[2], c[0], c[1], c[2], d[0], d[1], d[2]);
    return out;
}

std::vector<Vec4> gram_schmidt(const std::vector<Vec4>& in, double tol) {
    std::vector<Vec4> out;
    out.reserve(in.size());
    for (const Vec4& x : in) {
        const double scale = std::max(1.0, norm(x));
        Vec4 w = x;
        for (int pass = 0; pass < 2; ++pass) {
            for (const Vec4& e : out) w -= dot(w, e) * e;
        }
        const double r = norm(w);
        if (r <= tol * scale) {
            throw DegenerateSpan("gram_schmidt: input inside span of predecessors");
        }
        out.push_back(w / r);
    }
    return out;
}

std::vector<Vec4> complete_orthonormal(std::vector<Vec4> vs) {
    while (vs.size() < 4) {
        Vec4 best;
        double best_norm = -1.0;
        for (int i = 0; i < 4; ++i) {
            Vec4 r;
            r[i] = 1.0;
            for (const Vec4& v : vs) r -= dot(r, v) * v;
            const double n = norm(r);
            if (n > best_norm + 1e-15) {
                best_norm = n;
                best = r;
            }
        }
        if (best_norm < 1e-9) {
            throw DegenerateSpan("complete_orthonormal: no independent ambient axis");
        }
        Vec4 u = best / best_norm;
        // second pass for orthogonality at round-off level
        for (const Vec4& v : vs) u -= dot(u, v) * v;
        vs.push_back(u / norm(u));
    }
    return vs;
}

EigSym2 eig_sym2(const SymOp2& op) {
    EigSym2 res;
    const double tr = op.a11 + op.a22;
    const double diff = op.a11 - op.a22;
    const double disc = std::hypot(diff, 2.0 * op.a12);
    res.lambda[0] = 0.5 * (tr - disc);
    res.lambda[1] = 0.5 * (tr + disc);

    if (disc < 1e-12) {
        res.v[0] = {1.0, 0.0};
        res.v[1] = {0.0, 1.0};
        return res;
    }

    for (int k = 0; k < 2; ++k) {
        const double lam = res.lambda[k];
        // Rows of (A - lam I) are (a11-lam, a12) and (a12, a22-lam); the
        // eigenvector is orthogonal to both.  Pick the candidate built from
        // the larger row for stability.
        double c0[2] = {op.a12, lam - op.a11};
        double c1[2] = {lam - op.a22, op.a12};
        const double n0 = std::hypot(c0[0], c0[1]);
        const double n1 = std::hypot(c1[0], c1[1]);
        double vx, vy, n;
        if (n0 >= n1) {
            vx = c0[0]; vy = c0[1]; n = n0;
        } else {
            vx = c1[0]; vy = c1[1]; n = n1;
        }
        vx /= n;
        vy /= n;
        const double lead = (std::abs(vx) > 1e-14) ? vx : vy;
        if (lead < 0.0) {
            vx = -vx;
            vy = -vy;
        }
        res.v[k] = {vx, vy};
    }
    return res;
}

double commutator_21(const SymOp2& A, const SymOp2& B) {
    return A.a12 * (B.a11 - B.a22) - B.a12 * (A.a11 - A.a22);
}

}  // namespace surf4
