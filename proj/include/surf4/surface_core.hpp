#pragma once

#include <utility>

#include "surf4/euclid4.hpp"
#include "surf4/jets.hpp"

namespace surf4 {

struct FirstForm {
    double E = 0.0, F = 0.0, G = 0.0;
};

FirstForm first_form(const Jet2& jet);

// Coefficients (a,b) with P_T v = a x_s + b x_t; requires a regular jet.
std::pair<double, double> tangent_coords(const Jet2& jet, const Vec4& v);
Vec4 tangential_projection(const Jet2& jet, const Vec4& v);

enum class FramePolicy { position_adapted, coordinate_adapted };

struct AdaptedFrame {
    Vec4 e1, e2;  // unit tangent
    Vec4 e3, e4;  // unit normal
};

// position_adapted: e1 along the tangential part of the position vector, e3
// along its normal part; fails where either part is numerically zero.
// coordinate_adapted: e1 along x_s; normal vectors completed from the ambient
// basis.  Both policies orient e4 deterministically by making its largest
// component positive.
AdaptedFrame adapted_frame(const Jet2& jet, FramePolicy policy,
                           double tol = 1e-8);

struct FundamentalData {
    double E = 0, F = 0, G = 0;
    double h3_11 = 0, h3_12 = 0, h3_22 = 0;
    double h4_11 = 0, h4_12 = 0, h4_22 = 0;
    SymOp2 S3, S4;
    Vec4 H;        // mean curvature vector
    double K = 0;  // Gauss curvature via the structural equations
    double m = 0;  // sqrt(G), the warping coefficient
};

FundamentalData second_form(const Jet2& jet, const AdaptedFrame& frame);

// (h3_12, h4_12) in the given frame.
std::pair<double, double> shape_operator_offdiagonals(const Jet2& jet,
                                                      const AdaptedFrame& frame);

// Eigenvalue gap below 1e-9 * (1 + |l1| + |l2|).
bool near_umbilic(const SymOp2& op);

// Scheme used for jets inside derived computations: callbacks when the patch
// has them, otherwise the caller's differencing scheme (or the default
// central step if the caller asked for analytic jets).
DiffScheme jet_scheme_for(const ImmersionPatch& patch, const DiffScheme& scheme);

// Frame field with signs locked to a reference frame at the probe center, so
// nearby evaluations can be differenced.  Throws FrameFlip when a sample is
// too far from the reference to align by a sign flip.
class FrameProbe {
  public:
    FrameProbe(const ImmersionPatch& patch, FramePolicy policy,
               const DiffScheme& scheme, double s, double t, double tol = 1e-8);

    const AdaptedFrame& center() const { return ref_; }
    Jet2 jet_at(double s, double t) const;
    AdaptedFrame at(double s, double t) const;

  private:
    const ImmersionPatch* patch_;
    FramePolicy policy_;
    DiffScheme jet_scheme_;
    double tol_;
    AdaptedFrame ref_;
};

struct ConnectionData {
    // gamma[i][j][k] = <nabla_{e_{i+1}} e_{j+1}, e_{k+1}>, tangent indices
    double gamma[2][2][2] = {};
    double omega1 = 0.0, omega2 = 0.0;  // omega(e1), omega(e2): D_X e3 = omega(X) e4
    double RD = 0.0;                    // normal curvature via the shape-operator commutator
};

// Connection data of the probe's frame field at (s,t).  With the position
// policy the normal frame is the canonical pointwise one, so omega measures
// the rotation of the normal part of x.  With the coordinate policy the
// normal gauge is transported from the probe center, which makes omega vanish
// there by construction; RD and the Codazzi residual are gauge-covariant and
// unaffected.
ConnectionData normal_connection(const ImmersionPatch& patch, double s, double t,
                                 FramePolicy policy, const DiffScheme& scheme);

// Independent computation of the same scalar from the exterior derivative of
// the connection form.
double normal_curvature_from_domega(const ImmersionPatch& patch, double s,
                                    double t, FramePolicy policy,
                                    const DiffScheme& scheme);

// Max norm over X,Y,Z in the tangent frame of the antisymmetrized covariant
// derivative of the second fundamental form.
double codazzi_residual(const ImmersionPatch& patch, double s, double t,
                        const DiffScheme& scheme);

// Gauss curvature from (E,F,G) alone via the Brioschi determinant formula.
double intrinsic_gauss_curvature(const ImmersionPatch& patch, double s, double t,
                                 const DiffScheme& scheme);

}  // namespace surf4
