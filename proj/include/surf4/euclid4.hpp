#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "surf4/errors.hpp"

namespace surf4 {

struct Vec4 {
    std::array<double, 4> v{0.0, 0.0, 0.0, 0.0};

    Vec4() = default;
    Vec4(double a, double b, double c, double d) : v{a, b, c, d} {}

    double& operator[](std::size_t i) { return v[i]; }
    double operator[](std::size_t i) const { return v[i]; }

    Vec4& operator+=(const Vec4& o);
    Vec4& operator-=(const Vec4& o);
    Vec4& operator*=(double c);
};

Vec4 operator+(Vec4 a, const Vec4& b);
Vec4 operator-(Vec4 a, const Vec4& b);
Vec4 operator*(double c, Vec4 a);
Vec4 operator*(Vec4 a, double c);
Vec4 operator/(Vec4 a, double c);
Vec4 operator-(const Vec4& a);

double dot(const Vec4& a, const Vec4& b);
double norm(const Vec4& a);

// Unit vector along `a`; throws DegenerateSpan when |a| <= tol.
Vec4 normalized(const Vec4& a, double tol = 1e-12);

// Orthogonal complement of span{b,c,d}: the unique vector such that
// dot(a, triple_cross(b,c,d)) == det[b; c; d; a] for every a, so
// triple_cross(e1,e2,e3) == +e4 in the standard basis.
Vec4 triple_cross(const Vec4& b, const Vec4& c, const Vec4& d);

// Modified Gram-Schmidt with one reorthogonalization pass.  Output spans the
// same space; the first output is parallel to the first input.  Throws
// DegenerateSpan when an input is (numerically) inside the span of its
// predecessors.
std::vector<Vec4> gram_schmidt(const std::vector<Vec4>& in, double tol = 1e-12);

// Extend an orthonormal list to an orthonormal basis of E^4.  Each appended
// vector is the normalized residual of the ambient basis vector with the
// largest residual against the current span (ties break to the lowest index),
// which makes the completion deterministic.
std::vector<Vec4> complete_orthonormal(std::vector<Vec4> vs);

// Symmetric 2x2 operator in an orthonormal basis.
struct SymOp2 {
    double a11 = 0.0;
    double a12 = 0.0;
    double a22 = 0.0;

    double trace() const { return a11 + a22; }
    double det() const { return a11 * a22 - a12 * a12; }
};

struct EigSym2 {
    std::array<double, 2> lambda{};    // ascending
    std::array<std::array<double, 2>, 2> v{};  // v[k] belongs to lambda[k]
};

// Closed-form symmetric 2x2 eigendecomposition.  Eigenvalues ascending; on a
// near-tie (gap < 1e-12) the eigenvectors fall back to the coordinate axes.
// Each eigenvector has its first nonzero component positive.
EigSym2 eig_sym2(const SymOp2& op);

// <[A,B] e1, e2> for symmetric A, B: the only independent entry of the
// (antisymmetric) commutator.
double commutator_21(const SymOp2& A, const SymOp2& B);

}  // namespace surf4
