#include "surf4/surface_core.hpp"

#include <algorithm>
#include <cmath>

namespace surf4 {

FirstForm first_form(const Jet2& jet) {
    return FirstForm{dot(jet.x_s, jet.x_s), dot(jet.x_s, jet.x_t),
                     dot(jet.x_t, jet.x_t)};
}

std::pair<double, double> tangent_coords(const Jet2& jet, const Vec4& v) {
    const FirstForm g = first_form(jet);
    const double det = g.E * g.G - g.F * g.F;
    const double scale = std::max({1.0, g.E, g.G});
    if (det <= 1e-14 * scale * scale) {
        throw DegenerateImmersion("tangent_coords: metric not invertible");
    }
    const double p = dot(v, jet.x_s);
    const double q = dot(v, jet.x_t);
    return {(g.G * p - g.F * q) / det, (g.E * q - g.F * p) / det};
}

Vec4 tangential_projection(const Jet2& jet, const Vec4& v) {
    auto [a, b] = tangent_coords(jet, v);
    return a * jet.x_s + b * jet.x_t;
}

namespace {

Vec4 orient_by_largest_component(Vec4 v) {
    int imax = 0;
    for (int i = 1; i < 4; ++i) {
        if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
    }
    return v[imax] < 0.0 ? -v : v;
}

}  // namespace

AdaptedFrame adapted_frame(const Jet2& jet, FramePolicy policy, double tol) {
    AdaptedFrame f;
    if (policy == FramePolicy::position_adapted) {
        const Vec4 xT = tangential_projection(jet, jet.x);
        const Vec4 xPerp = jet.x - xT;
        const double mu = norm(jet.x);
        if (norm(xT) <= tol * (1.0 + mu)) {
            throw TangentialComponentVanishes(
                "adapted_frame: tangential part of x below tolerance");
        }
        if (norm(xPerp) <= tol * (1.0 + mu)) {
            throw NormalComponentVanishes(
                "adapted_frame: normal part of x below tolerance");
        }
        f.e1 = xT / norm(xT);
        f.e3 = xPerp / norm(xPerp);
        try {
            f.e2 = gram_schmidt({f.e1, jet.x_t})[1];
        } catch (const DegenerateSpan&) {
            f.e2 = gram_schmidt({f.e1, jet.x_s})[1];
        }
    } else {
        f.e1 = normalized(jet.x_s);
        f.e2 = gram_schmidt({f.e1, jet.x_t})[1];
        f.e3 = complete_orthonormal({f.e1, f.e2})[2];
    }
    f.e4 = orient_by_largest_component(normalized(triple_cross(f.e1, f.e2, f.e3)));
    return f;
}

namespace {

struct FrameCoords {
    double a1, b1, a2, b2;  // e1 = a1 x_s + b1 x_t, e2 = a2 x_s + b2 x_t
};

FrameCoords frame_coords(const Jet2& jet, const AdaptedFrame& f) {
    auto [a1, b1] = tangent_coords(jet, f.e1);
    auto [a2, b2] = tangent_coords(jet, f.e2);
    return {a1, b1, a2, b2};
}

// Second-derivative combination for tangent vectors given in coordinates.
Vec4 second_comb(const Jet2& j, double p, double q, double r, double w) {
    return p * r * j.x_ss + (p * w + q * r) * j.x_st + q * w * j.x_tt;
}

}  // namespace

FundamentalData second_form(const Jet2& jet, const AdaptedFrame& frame) {
    FundamentalData d;
    const FirstForm g = first_form(jet);
    d.E = g.E;
    d.F = g.F;
    d.G = g.G;
    d.m = std::sqrt(g.G);

    const FrameCoords c = frame_coords(jet, frame);
    const Vec4 X11 = second_comb(jet, c.a1, c.b1, c.a1, c.b1);
    const Vec4 X12 = second_comb(jet, c.a1, c.b1, c.a2, c.b2);
    const Vec4 X22 = second_comb(jet, c.a2, c.b2, c.a2, c.b2);

    d.h3_11 = dot(X11, frame.e3);
    d.h3_12 = dot(X12, frame.e3);
    d.h3_22 = dot(X22, frame.e3);
    d.h4_11 = dot(X11, frame.e4);
    d.h4_12 = dot(X12, frame.e4);
    d.h4_22 = dot(X22, frame.e4);

    d.S3 = SymOp2{d.h3_11, d.h3_12, d.h3_22};
    d.S4 = SymOp2{d.h4_11, d.h4_12, d.h4_22};
    d.H = 0.5 * ((d.h3_11 + d.h3_22) * frame.e3 + (d.h4_11 + d.h4_22) * frame.e4);
    d.K = d.S3.det() + d.S4.det();
    return d;
}

std::pair<double, double> shape_operator_offdiagonals(const Jet2& jet,
                                                      const AdaptedFrame& frame) {
    const FrameCoords c = frame_coords(jet, frame);
    const Vec4 X12 = second_comb(jet, c.a1, c.b1, c.a2, c.b2);
    return {dot(X12, frame.e3), dot(X12, frame.e4)};
}

bool near_umbilic(const SymOp2& op) {
    const double gap = std::hypot(op.a11 - op.a22, 2.0 * op.a12);
    const EigSym2 e = eig_sym2(op);
    return gap < 1e-9 * (1.0 + std::abs(e.lambda[0]) + std::abs(e.lambda[1]));
}

DiffScheme jet_scheme_for(const ImmersionPatch& patch, const DiffScheme& scheme) {
    if (patch.has_analytic_jets()) return DiffScheme::analytic_jets();
    if (scheme.kind == DiffScheme::Kind::analytic) return DiffScheme::central();
    return scheme;
}

FrameProbe::FrameProbe(const ImmersionPatch& patch, FramePolicy policy,
                       const DiffScheme& scheme, double s, double t, double tol)
    : patch_(&patch),
      policy_(policy),
      jet_scheme_(jet_scheme_for(patch, scheme)),
      tol_(tol) {
    ref_ = adapted_frame(jet2(*patch_, s, t, jet_scheme_), policy_, tol_);
}

Jet2 FrameProbe::jet_at(double s, double t) const {
    return jet2(*patch_, s, t, jet_scheme_);
}

AdaptedFrame FrameProbe::at(double s, double t) const {
    if (policy_ == FramePolicy::coordinate_adapted) {
        // Transport the reference normal gauge instead of re-deriving it from
        // the ambient basis: the pointwise completion can swap axes between
        // stencil points, which no sign flip repairs.
        const Jet2 j = jet_at(s, t);
        AdaptedFrame f;
        f.e1 = normalized(j.x_s);
        f.e2 = gram_schmidt({f.e1, j.x_t})[1];
        for (Vec4* v : {&f.e1, &f.e2}) {
            const double corr = dot(*v, v == &f.e1 ? ref_.e1 : ref_.e2);
            if (std::abs(corr) < 0.5) {
                throw FrameFlip("FrameProbe: tangent frame not alignable");
            }
            if (corr < 0.0) *v = -*v;
        }
        Vec4 n = ref_.e3;
        n -= dot(n, f.e1) * f.e1;
        n -= dot(n, f.e2) * f.e2;
        const double nn = norm(n);
        if (nn < 0.5) {
            throw FrameFlip("FrameProbe: normal space rotated too far");
        }
        f.e3 = n / nn;
        f.e4 = normalized(triple_cross(f.e1, f.e2, f.e3));
        const double corr4 = dot(f.e4, ref_.e4);
        if (std::abs(corr4) < 0.5) {
            throw FrameFlip("FrameProbe: second normal not alignable");
        }
        if (corr4 < 0.0) f.e4 = -f.e4;
        return f;
    }

    AdaptedFrame f = adapted_frame(jet_at(s, t), policy_, tol_);
    const Vec4* ref[4] = {&ref_.e1, &ref_.e2, &ref_.e3, &ref_.e4};
    Vec4* cur[4] = {&f.e1, &f.e2, &f.e3, &f.e4};
    for (int k = 0; k < 4; ++k) {
        const double corr = dot(*cur[k], *ref[k]);
        if (std::abs(corr) < 0.5) {
            throw FrameFlip("FrameProbe: frame not alignable to reference");
        }
        if (corr < 0.0) *cur[k] = -*cur[k];
    }
    return f;
}

namespace {

struct DirectionalDerivs {
    // coordinate-direction derivatives of the four frame fields
    Vec4 d_s[4], d_t[4];
};

DirectionalDerivs frame_derivatives(const FrameProbe& probe, double s, double t,
                                    const DiffScheme& scheme) {
    DirectionalDerivs out;
    for (int k = 0; k < 4; ++k) {
        VecField field = [&probe, k](double a, double b) {
            const AdaptedFrame f = probe.at(a, b);
            const Vec4* v[4] = {&f.e1, &f.e2, &f.e3, &f.e4};
            return *v[k];
        };
        out.d_s[k] = field_d1(field, s, t, 0, scheme);
        out.d_t[k] = field_d1(field, s, t, 1, scheme);
    }
    return out;
}

}  // namespace

ConnectionData normal_connection(const ImmersionPatch& patch, double s, double t,
                                 FramePolicy policy, const DiffScheme& scheme) {
    const FrameProbe probe(patch, policy, scheme, s, t);
    const Jet2 jc = probe.jet_at(s, t);
    const AdaptedFrame fc = probe.center();
    const FrameCoords c = frame_coords(jc, fc);
    const DirectionalDerivs dd = frame_derivatives(probe, s, t, scheme);

    auto along = [&](int dir, int k) {
        const double a = dir == 0 ? c.a1 : c.a2;
        const double b = dir == 0 ? c.b1 : c.b2;
        return a * dd.d_s[k] + b * dd.d_t[k];
    };

    ConnectionData out;
    const Vec4* frame[4] = {&fc.e1, &fc.e2, &fc.e3, &fc.e4};
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            const Vec4 dv = along(i, j);
            for (int k = 0; k < 2; ++k) out.gamma[i][j][k] = dot(dv, *frame[k]);
        }
    }
    out.omega1 = dot(along(0, 2), fc.e4);
    out.omega2 = dot(along(1, 2), fc.e4);

    const FundamentalData fd = second_form(jc, fc);
    out.RD = commutator_21(fd.S3, fd.S4);
    return out;
}

double normal_curvature_from_domega(const ImmersionPatch& patch, double s,
                                    double t, FramePolicy policy,
                                    const DiffScheme& scheme) {
    const FrameProbe probe(patch, policy, scheme, s, t);
    const Jet2 jc = probe.jet_at(s, t);
    const FrameCoords c = frame_coords(jc, probe.center());

    // omega(d/ds) and omega(d/dt) as scalar fields, signs locked via probe
    auto omega_coord = [&probe, &scheme](int axis) {
        return ScalarField([&probe, &scheme, axis](double a, double b) {
            VecField e3f = [&probe](double p, double q) { return probe.at(p, q).e3; };
            const Vec4 de3 = field_d1(e3f, a, b, axis, scheme);
            return dot(de3, probe.at(a, b).e4);
        });
    };
    const double dwt_ds = field_d1(omega_coord(1), s, t, 0, scheme);
    const double dws_dt = field_d1(omega_coord(0), s, t, 1, scheme);
    const double jac = c.a1 * c.b2 - c.a2 * c.b1;
    return (dwt_ds - dws_dt) * jac;
}

double codazzi_residual(const ImmersionPatch& patch, double s, double t,
                        const DiffScheme& scheme) {
    const FrameProbe probe(patch, FramePolicy::coordinate_adapted, scheme, s, t);
    const Jet2 jc = probe.jet_at(s, t);
    const AdaptedFrame fc = probe.center();
    const FrameCoords c = frame_coords(jc, fc);

    // frame components of the second fundamental form as fields
    auto h_field = [&probe](int beta, int i, int j) {
        return ScalarField([&probe, beta, i, j](double a, double b) {
            const Jet2 jj = probe.jet_at(a, b);
            const AdaptedFrame ff = probe.at(a, b);
            const FrameCoords cc = frame_coords(jj, ff);
            const double p = i == 0 ? cc.a1 : cc.a2;
            const double q = i == 0 ? cc.b1 : cc.b2;
            const double r = j == 0 ? cc.a1 : cc.a2;
            const double w = j == 0 ? cc.b1 : cc.b2;
            const Vec4 X = second_comb(jj, p, q, r, w);
            return dot(X, beta == 3 ? ff.e3 : ff.e4);
        });
    };

    // center values
    double h3[2][2], h4[2][2];
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            h3[i][j] = h_field(3, i, j)(s, t);
            h4[i][j] = h_field(4, i, j)(s, t);
        }
    }

    const ConnectionData con = normal_connection(
        patch, s, t, FramePolicy::coordinate_adapted, scheme);
    const double omega[2] = {con.omega1, con.omega2};

    // directional derivative of a field along frame vector e_{dir+1}
    auto frame_deriv = [&](const ScalarField& f, int dir) {
        const double a = dir == 0 ? c.a1 : c.a2;
        const double b = dir == 0 ? c.b1 : c.b2;
        return a * field_d1(f, s, t, 0, scheme) + b * field_d1(f, s, t, 1, scheme);
    };

    // (nabla_{e_x} h)(e_y, e_z), both normal components
    auto nabla_h = [&](int x, int y, int z, bool beta3) {
        auto h = beta3 ? h3 : h4;
        auto h_other = beta3 ? h4 : h3;
        const double dh = frame_deriv(h_field(beta3 ? 3 : 4, y, z), x);
        // D-part rotates the normal frame: D e3 = w e4, D e4 = -w e3
        const double rot = beta3 ? -omega[x] * h_other[y][z]
                                 : +omega[x] * h_other[y][z];
        double corr = 0.0;
        for (int l = 0; l < 2; ++l) {
            corr += con.gamma[x][y][l] * h[l][z] + con.gamma[x][z][l] * h[y][l];
        }
        return dh + rot - corr;
    };

    double worst = 0.0;
    for (int z = 0; z < 2; ++z) {
        for (int beta = 0; beta < 2; ++beta) {
            const bool b3 = beta == 0;
            const double lhs = nabla_h(0, 1, z, b3);
            const double rhs = nabla_h(1, 0, z, b3);
            worst = std::max(worst, std::abs(lhs - rhs));
        }
    }
    return worst;
}

double intrinsic_gauss_curvature(const ImmersionPatch& patch, double s, double t,
                                 const DiffScheme& scheme) {
    const DiffScheme inner = jet_scheme_for(patch, scheme);
    auto metric = [&](int which) {
        return ScalarField([&patch, inner, which](double a, double b) {
            const FirstForm g = first_form(jet2(patch, a, b, inner));
            return which == 0 ? g.E : (which == 1 ? g.F : g.G);
        });
    };
    const ScalarField fE = metric(0), fF = metric(1), fG = metric(2);

    const double E = fE(s, t), F = fF(s, t), G = fG(s, t);
    const double E_s = field_d1(fE, s, t, 0, scheme), E_t = field_d1(fE, s, t, 1, scheme);
    const double F_s = field_d1(fF, s, t, 0, scheme), F_t = field_d1(fF, s, t, 1, scheme);
    const double G_s = field_d1(fG, s, t, 0, scheme), G_t = field_d1(fG, s, t, 1, scheme);
    const double E_tt = field_d2(fE, s, t, 1, scheme);
    const double G_ss = field_d2(fG, s, t, 0, scheme);
    const double F_st = field_d2_mixed(fF, s, t, scheme);

    auto det3x3 = [](double a, double b, double cc, double d, double e, double f,
                     double g, double h, double i) {
        return a * (e * i - f * h) - b * (d * i - f * g) + cc * (d * h - e * g);
    };

    const double m11 = -0.5 * E_tt + F_st - 0.5 * G_ss;
    const double d1 = det3x3(m11, 0.5 * E_s, F_s - 0.5 * E_t,
                             F_t - 0.5 * G_s, E, F,
                             0.5 * G_t, F, G);
    const double d2 = det3x3(0.0, 0.5 * E_t, 0.5 * G_s,
                             0.5 * E_t, E, F,
                             0.5 * G_s, F, G);
    const double den = E * G - F * F;
    return (d1 - d2) / (den * den);
}

}  // namespace surf4
