#include "surf4/position_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "surf4/errors.hpp"

namespace surf4 {

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> out(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        out[static_cast<size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    }
    return out;
}

double resolve_tol(const DetectorOptions& opt, const DiffScheme& eff) {
    if (opt.class_tol > 0) return opt.class_tol;
    return eff.kind == DiffScheme::Kind::analytic ? 1e-5 : 1e-3;
}

struct Stats {
    double mean = 0.0;
    double sd = 0.0;
};

Stats stats_of(const std::vector<double>& v) {
    Stats st;
    if (v.empty()) return st;
    st.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double acc = 0.0;
    for (double x : v) acc += (x - st.mean) * (x - st.mean);
    st.sd = std::sqrt(acc / static_cast<double>(v.size()));
    return st;
}

struct GridSample {
    double s = 0.0;
    double t = 0.0;
    bool ok = false;
    Jet2 jet;
    PositionDecomposition dec;
};

// Jets and decompositions over the whole lattice.  A per-point jet failure
// marks the sample excluded; hitting the origin invalidates the grid itself.
std::vector<GridSample> sample_grid(const ImmersionPatch& patch,
                                    const DetectorGrid& grid,
                                    const DiffScheme& eff) {
    std::vector<GridSample> out;
    out.reserve(grid.s.size() * grid.t.size());
    for (double t : grid.t) {
        for (double s : grid.s) {
            GridSample g;
            g.s = s;
            g.t = t;
            try {
                g.jet = jet2(patch, s, t, eff);
                g.dec = decompose(g.jet);
                g.ok = true;
            } catch (const OriginPoint&) {
                throw DegenerateGrid("detector grid touches the origin");
            } catch (const GeometryError&) {
                g.ok = false;
            }
            out.push_back(g);
        }
    }
    return out;
}

// Applies the excluded-point policy: with nothing evaluable the verdict is
// degenerate, with more than 10% excluded it is inconclusive; both bar holds.
void apply_exclusion_policy(ClassVerdict& v) {
    const int included = v.total_points - v.excluded_points;
    if (included <= 0) {
        v.flags.push_back("degenerate-grid");
        v.holds = false;
    } else if (10 * v.excluded_points > v.total_points) {
        v.flags.push_back("inconclusive");
        v.holds = false;
    }
}

bool component_vanishes(const PositionDecomposition& d, double vanish_tol) {
    const double floor = vanish_tol * (1.0 + d.mu);
    return norm(d.xT) <= floor || norm(d.xPerp) <= floor;
}

// Golden-section minimization of a unimodal objective on [a, b].
double golden_min(const std::function<double(double)>& f, double a, double b,
                  double tol) {
    const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    while (b - a > tol) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

PositionDecomposition decompose(const Jet2& jet, double tol) {
    PositionDecomposition out;
    out.mu = norm(jet.x);
    if (out.mu < tol) throw OriginPoint("position vector too short to decompose");
    const FirstForm g = first_form(jet);
    const double scale = std::max({1.0, g.E, g.G});
    if (g.E * g.G - g.F * g.F > 1e-14 * scale * scale) {
        out.xT = tangential_projection(jet, jet.x);
    } else {
        // rank-one tangent span (cone point): project onto the dominant direction
        const Vec4& v = g.E >= g.G ? jet.x_s : jet.x_t;
        const double vv = dot(v, v);
        out.xT = vv > 1e-30 ? (dot(jet.x, v) / vv) * v : Vec4{};
    }
    out.xPerp = jet.x - out.xT;
    out.theta = std::atan2(norm(out.xPerp), norm(out.xT));
    return out;
}

std::pair<double, double> directional_derivatives_of_mu(
    const ImmersionPatch& patch, double s, double t, const DiffScheme& scheme) {
    const DiffScheme eff = jet_scheme_for(patch, scheme);
    const Jet2 j = jet2(patch, s, t, eff);
    const AdaptedFrame f = adapted_frame(j, FramePolicy::position_adapted);
    const ScalarField mu = [&patch](double a, double b) {
        return norm(patch.map(a, b));
    };
    const double mu_s = field_d1(mu, s, t, 0, scheme);
    const double mu_t = field_d1(mu, s, t, 1, scheme);
    const auto [a1, b1] = tangent_coords(j, f.e1);
    const auto [a2, b2] = tangent_coords(j, f.e2);
    return {a1 * mu_s + b1 * mu_t, a2 * mu_s + b2 * mu_t};
}

DetectorGrid detector_grid(const ImmersionPatch& patch,
                           const DetectorOptions& options) {
    if (options.ns < 2 || options.nt < 2) {
        throw ConfigError("detector grid needs at least 2x2 points");
    }
    const DiffScheme eff = jet_scheme_for(patch, options.scheme);
    const Domain& d = patch.domain;
    const double s_lo = d.s0 + 2.0 * guard_width(eff, d.s0);
    const double s_hi = d.s1 - 2.0 * guard_width(eff, d.s1);
    const double t_lo = d.t0 + 2.0 * guard_width(eff, d.t0);
    const double t_hi = d.t1 - 2.0 * guard_width(eff, d.t1);
    if (!(s_lo < s_hi) || !(t_lo < t_hi)) {
        throw DegenerateGrid("domain too small for the guard band");
    }
    return {linspace(s_lo, s_hi, options.ns), linspace(t_lo, t_hi, options.nt)};
}

ClassVerdict is_constant_ratio(const ImmersionPatch& patch,
                               const DetectorOptions& options) {
    const DiffScheme eff = jet_scheme_for(patch, options.scheme);
    ClassVerdict v;
    v.class_name = "CR";
    v.tolerance = resolve_tol(options, eff);
    const DetectorGrid grid = detector_grid(patch, options);
    const auto samples = sample_grid(patch, grid, eff);
    v.total_points = static_cast<int>(samples.size());

    std::vector<double> ratios, thetas;
    for (const GridSample& g : samples) {
        if (!g.ok || component_vanishes(g.dec, options.vanish_tol)) {
            ++v.excluded_points;
            continue;
        }
        ratios.push_back(norm(g.dec.xT) / norm(g.dec.xPerp));
        thetas.push_back(g.dec.theta);
    }
    if (!ratios.empty()) {
        const Stats st = stats_of(ratios);
        v.max_deviation = st.mean > 0 ? st.sd / st.mean : st.sd;
        v.witness_value = st.mean;
        v.witness_angle = stats_of(thetas).mean;
        v.holds = v.max_deviation < v.tolerance;
    }
    apply_exclusion_policy(v);
    return v;
}

namespace {

ClassVerdict constant_length_verdict(const ImmersionPatch& patch,
                                     const DetectorOptions& options,
                                     bool tangential) {
    const DiffScheme eff = jet_scheme_for(patch, options.scheme);
    ClassVerdict v;
    v.class_name = tangential ? "T_constant" : "N_constant";
    v.tolerance = resolve_tol(options, eff);
    const DetectorGrid grid = detector_grid(patch, options);
    const auto samples = sample_grid(patch, grid, eff);
    v.total_points = static_cast<int>(samples.size());

    // vanishing components are legitimate here: length zero is a constant
    std::vector<double> lengths;
    for (const GridSample& g : samples) {
        if (!g.ok) {
            ++v.excluded_points;
            continue;
        }
        lengths.push_back(norm(tangential ? g.dec.xT : g.dec.xPerp));
    }
    if (!lengths.empty()) {
        const Stats st = stats_of(lengths);
        v.max_deviation = st.sd / (1.0 + st.mean);
        v.witness_value = st.mean;
        v.holds = v.max_deviation < v.tolerance;
    }
    apply_exclusion_policy(v);
    return v;
}

}  // namespace

ClassVerdict is_T_constant(const ImmersionPatch& patch,
                           const DetectorOptions& options) {
    return constant_length_verdict(patch, options, true);
}

ClassVerdict is_N_constant(const ImmersionPatch& patch,
                           const DetectorOptions& options) {
    return constant_length_verdict(patch, options, false);
}

ClassVerdict is_GCR(const ImmersionPatch& patch, const DetectorOptions& options) {
    const DiffScheme eff = jet_scheme_for(patch, options.scheme);
    ClassVerdict v;
    v.class_name = "GCR";
    v.tolerance = resolve_tol(options, eff);
    const DetectorGrid grid = detector_grid(patch, options);
    const auto samples = sample_grid(patch, grid, eff);
    v.total_points = static_cast<int>(samples.size());

    double max_offdiag = 0.0;
    double max_entry = 0.0;
    int umbilic = 0;
    int evaluated = 0;
    for (const GridSample& g : samples) {
        if (!g.ok) {
            ++v.excluded_points;
            continue;
        }
        FundamentalData d;
        bool positional = true;
        try {
            d = second_form(g.jet, adapted_frame(g.jet, FramePolicy::position_adapted));
        } catch (const GeometryError&) {
            // no position frame here; the point cannot vote on the principal
            // direction, but umbilicity is still well defined in any frame
            positional = false;
            try {
                d = second_form(g.jet,
                                adapted_frame(g.jet, FramePolicy::coordinate_adapted));
            } catch (const GeometryError&) {
                ++v.excluded_points;
                continue;
            }
        }
        if (near_umbilic(d.S3) && near_umbilic(d.S4)) ++umbilic;
        if (!positional) {
            ++v.excluded_points;
            continue;
        }
        ++evaluated;
        max_offdiag = std::max({max_offdiag, std::abs(d.h3_12), std::abs(d.h4_12)});
        max_entry = std::max({max_entry, std::abs(d.h3_11), std::abs(d.h3_12),
                              std::abs(d.h3_22), std::abs(d.h4_11),
                              std::abs(d.h4_12), std::abs(d.h4_22)});
    }
    if (evaluated > 0) {
        v.max_deviation = max_offdiag / (1.0 + max_entry);
        v.witness_value = max_offdiag;
        v.holds = v.max_deviation < v.tolerance;
    }
    if (2 * umbilic > v.total_points) v.flags.push_back("umbilic-dominated");
    apply_exclusion_policy(v);
    return v;
}

namespace {

// Smooth frame along the grid: tangent directions from the coordinate
// vectors, the first normal direction by projecting one fixed ambient seed
// axis into the normal plane, the second by a cross product.  The seed keeps
// n3 single-valued; the cross product can still flip sign across curves where
// a coordinate vector reverses, so the lattice signs are fixed afterwards by
// continuation.
Vec4 axis_vec(int i) {
    Vec4 v{};
    v[static_cast<size_t>(i)] = 1.0;
    return v;
}

struct GaugeFrame {
    Vec4 t1, t2, n3, n4;
};

GaugeFrame gauge_frame(const Jet2& jet, int seed) {
    GaugeFrame f;
    f.t1 = normalized(jet.x_s);
    f.t2 = gram_schmidt({f.t1, jet.x_t})[1];
    const Vec4 e = axis_vec(seed);
    f.n3 = normalized(e - dot(e, f.t1) * f.t1 - dot(e, f.t2) * f.t2);
    f.n4 = normalized(triple_cross(f.t1, f.t2, f.n3));
    return f;
}

// Seed axis whose normal-plane projection stays largest over the grid; the
// returned residual is that worst case, a measure of gauge conditioning.
std::pair<int, double> choose_seed(const std::vector<GridSample>& samples) {
    double residual[4];
    for (int i = 0; i < 4; ++i) residual[i] = 2.0;
    for (const GridSample& g : samples) {
        if (!g.ok) continue;
        const Vec4 t1 = normalized(g.jet.x_s);
        const Vec4 t2 = gram_schmidt({t1, g.jet.x_t})[1];
        for (int i = 0; i < 4; ++i) {
            const Vec4 e = axis_vec(i);
            const Vec4 p = e - dot(e, t1) * t1 - dot(e, t2) * t2;
            residual[i] = std::min(residual[i], norm(p));
        }
    }
    int seed = 0;
    double best = -1.0;
    for (int i = 0; i < 4; ++i) {
        if (residual[i] > best + 1e-15) {
            best = residual[i];
            seed = i;
        }
    }
    return {seed, best};
}

// Orient n4 consistently over the lattice: walk the bottom row, then up each
// column, flipping the sign whenever a step reverses against its neighbor.
// Returns false when neighbors are too far from parallel to orient at all.
bool orient_lattice(std::vector<GaugeFrame>& frames, int ns, int nt) {
    const auto idx = [ns](int i, int j) { return static_cast<size_t>(j * ns + i); };
    const auto align = [&frames](size_t k, size_t ref) {
        const double corr = dot(frames[k].n4, frames[ref].n4);
        if (std::abs(corr) < 0.5) return false;
        if (corr < 0) frames[k].n4 = -1.0 * frames[k].n4;
        return true;
    };
    for (int i = 1; i < ns; ++i) {
        if (!align(idx(i, 0), idx(i - 1, 0))) return false;
    }
    for (int i = 0; i < ns; ++i) {
        for (int j = 1; j < nt; ++j) {
            if (!align(idx(i, j), idx(i, j - 1))) return false;
        }
    }
    return true;
}

}  // namespace

ClassVerdict is_CSS(const ImmersionPatch& patch, const DetectorOptions& options) {
    const DiffScheme eff = jet_scheme_for(patch, options.scheme);
    ClassVerdict v;
    v.class_name = "CSS";
    v.tolerance = resolve_tol(options, eff);
    const DetectorGrid grid = detector_grid(patch, options);
    const auto samples = sample_grid(patch, grid, eff);
    v.total_points = static_cast<int>(samples.size());
    const int ns = static_cast<int>(grid.s.size());
    const int nt = static_cast<int>(grid.t.size());

    // the connection-form integration needs the whole lattice
    for (const GridSample& g : samples) {
        if (!g.ok) throw DegenerateGrid("candidate frame undefined at a grid point");
    }

    const auto [seed, conditioning] = choose_seed(samples);
    std::vector<GaugeFrame> frames(samples.size());
    if (conditioning < 0.05) {
        v.flags.push_back("gauge-degenerate");
        return v;
    }
    for (size_t k = 0; k < samples.size(); ++k) {
        try {
            frames[k] = gauge_frame(samples[k].jet, seed);
        } catch (const GeometryError&) {
            v.flags.push_back("gauge-degenerate");
            return v;
        }
    }
    if (!orient_lattice(frames, ns, nt)) {
        v.flags.push_back("gauge-degenerate");
        return v;
    }

    // flatness gate: the normal curvature must vanish over the grid
    double worst_flat = 0.0;
    for (size_t k = 0; k < samples.size(); ++k) {
        const GaugeFrame& f = frames[k];
        const FundamentalData d =
            second_form(samples[k].jet, AdaptedFrame{f.t1, f.t2, f.n3, f.n4});
        const auto frob = [](const SymOp2& m) {
            return std::sqrt(m.a11 * m.a11 + 2 * m.a12 * m.a12 + m.a22 * m.a22);
        };
        const double rd = commutator_21(d.S3, d.S4);
        worst_flat = std::max(worst_flat,
                              std::abs(rd) / (1.0 + frob(d.S3) * frob(d.S4)));
    }
    if (worst_flat > options.flat_tol) {
        v.flags.push_back("non-flat-normal-bundle");
        v.max_deviation = worst_flat;
        return v;
    }

    // connection form of the gauge at every lattice point
    std::vector<double> omega_s(samples.size()), omega_t(samples.size());
    const VecField n3_field = [&patch, &eff, seed](double a, double b) {
        return gauge_frame(jet2(patch, a, b, eff), seed).n3;
    };
    for (size_t k = 0; k < samples.size(); ++k) {
        const GridSample& g = samples[k];
        omega_s[k] = dot(field_d1(n3_field, g.s, g.t, 0, options.scheme), frames[k].n4);
        omega_t[k] = dot(field_d1(n3_field, g.s, g.t, 1, options.scheme), frames[k].n4);
    }

    const auto idx = [ns](int i, int j) { return static_cast<size_t>(j * ns + i); };

    // omega component at an off-lattice point, with the second normal
    // direction sign-aligned against a reference lattice frame
    const auto omega_at = [&](double sp, double tp, int axis, const Vec4& n4_ref) {
        GaugeFrame f = gauge_frame(jet2(patch, sp, tp, eff), seed);
        const double corr = dot(f.n4, n4_ref);
        if (std::abs(corr) < 0.5) throw FrameFlip("gauge cannot be oriented");
        if (corr < 0) f.n4 = -1.0 * f.n4;
        return dot(field_d1(n3_field, sp, tp, axis, options.scheme), f.n4);
    };
    // one Simpson step per lattice interval, midpoint sampled off-lattice
    const auto step_s = [&](int i, int j) {
        const size_t a = idx(i - 1, j), b = idx(i, j);
        const double mid = 0.5 * (grid.s[i - 1] + grid.s[i]);
        const double fm = omega_at(mid, grid.t[static_cast<size_t>(j)], 0,
                                   frames[a].n4);
        return (grid.s[i] - grid.s[i - 1]) / 6.0 * (omega_s[a] + 4 * fm + omega_s[b]);
    };
    const auto step_t = [&](int i, int j) {
        const size_t a = idx(i, j - 1), b = idx(i, j);
        const double mid = 0.5 * (grid.t[j - 1] + grid.t[j]);
        const double fm = omega_at(grid.s[static_cast<size_t>(i)], mid, 1,
                                   frames[a].n4);
        return (grid.t[j] - grid.t[j - 1]) / 6.0 * (omega_t[a] + 4 * fm + omega_t[b]);
    };

    // rotate the gauge into a parallel frame: d(alpha) = -omega, integrated
    // first along the bottom row, then up each column; then re-integrated up
    // the left column and along each row as a path-independence check
    std::vector<double> alpha(samples.size(), 0.0);
    double path_gap = 0.0;
    try {
        std::vector<double> row0(static_cast<size_t>(ns), 0.0);
        for (int i = 1; i < ns; ++i) {
            row0[static_cast<size_t>(i)] = row0[static_cast<size_t>(i - 1)] + step_s(i, 0);
        }
        for (int i = 0; i < ns; ++i) {
            alpha[idx(i, 0)] = -row0[static_cast<size_t>(i)];
            double acc = 0.0;
            for (int j = 1; j < nt; ++j) {
                acc += step_t(i, j);
                alpha[idx(i, j)] = -(row0[static_cast<size_t>(i)] + acc);
            }
        }
        std::vector<double> col0(static_cast<size_t>(nt), 0.0);
        for (int j = 1; j < nt; ++j) {
            col0[static_cast<size_t>(j)] = col0[static_cast<size_t>(j - 1)] + step_t(0, j);
        }
        for (int j = 0; j < nt; ++j) {
            double acc = 0.0;
            path_gap = std::max(path_gap,
                                std::abs(alpha[idx(0, j)] + col0[static_cast<size_t>(j)]));
            for (int i = 1; i < ns; ++i) {
                acc += step_s(i, j);
                path_gap = std::max(
                    path_gap,
                    std::abs(alpha[idx(i, j)] + col0[static_cast<size_t>(j)] + acc));
            }
        }
    } catch (const FrameFlip&) {
        v.flags.push_back("gauge-degenerate");
        return v;
    }
    if (path_gap > options.path_tol) {
        v.flags.push_back("path-dependent");
        v.max_deviation = path_gap;
        return v;
    }

    // normalized position components along the two parallel fields
    std::vector<double> A(samples.size()), B(samples.size()), sin_dec(samples.size());
    for (size_t k = 0; k < samples.size(); ++k) {
        const GridSample& g = samples[k];
        const GaugeFrame& f = frames[k];
        const double ca = std::cos(alpha[k]);
        const double sa = std::sin(alpha[k]);
        const Vec4 p3 = ca * f.n3 + sa * f.n4;
        const Vec4 p4 = -sa * f.n3 + ca * f.n4;
        A[k] = dot(g.jet.x, p3) / g.dec.mu;
        B[k] = dot(g.jet.x, p4) / g.dec.mu;
        sin_dec[k] = std::sin(g.dec.theta);
    }
    const Stats stA = stats_of(A);
    const Stats stB = stats_of(B);
    double covAB = 0.0;
    for (size_t k = 0; k < A.size(); ++k) {
        covAB += (A[k] - stA.mean) * (B[k] - stB.mean);
    }
    covAB /= static_cast<double>(A.size());

    const auto sd_of = [&](double phi) {
        const double c = std::cos(phi), s = std::sin(phi);
        const double var = c * c * stA.sd * stA.sd + s * s * stB.sd * stB.sd +
                           2 * c * s * covAB;
        return std::sqrt(std::max(var, 0.0));
    };
    const auto mean_of = [&](double phi) {
        return std::cos(phi) * stA.mean + std::sin(phi) * stB.mean;
    };

    // coarse scan plus golden-section refinement of the spread
    const double two_pi = 8.0 * std::atan(1.0);
    double phi_best = 0.0, sd_best = sd_of(0.0);
    for (int k = 1; k < 64; ++k) {
        const double phi = two_pi * k / 64;
        const double sd = sd_of(phi);
        if (sd < sd_best) {
            sd_best = sd;
            phi_best = phi;
        }
    }
    const double span = two_pi / 64;
    phi_best = golden_min(sd_of, phi_best - span, phi_best + span, 1e-8);
    sd_best = sd_of(phi_best);
    v.max_deviation = sd_best;
    if (sd_best >= v.tolerance) return v;

    // witness: among the feasible gauge angles, the parallel field most
    // aligned with the position vector; the unconstrained optimum is closed
    // form and is used when it stays feasible
    double phi_star = std::atan2(stB.mean, stA.mean);
    if (sd_of(phi_star) >= v.tolerance) {
        // the unconstrained optimum spreads too much; fall back to the best
        // feasible angle, starting from the spread minimizer
        phi_star = phi_best;
        double best_mean = std::abs(mean_of(phi_best));
        for (int k = 0; k < 1024; ++k) {
            const double phi = two_pi * k / 1024;
            if (sd_of(phi) >= v.tolerance) continue;
            const double m = std::abs(mean_of(phi));
            if (m > best_mean) {
                best_mean = m;
                phi_star = phi;
            }
        }
        const double fine = two_pi / 1024;
        const double refined = golden_min(
            [&](double phi) { return -std::abs(mean_of(phi)); }, phi_star - fine,
            phi_star + fine, 1e-8);
        if (sd_of(refined) < v.tolerance && std::abs(mean_of(refined)) >= best_mean) {
            phi_star = refined;
        }
    }

    v.witness_phi = phi_star;
    v.witness_value = mean_of(phi_star);
    const double aligned = std::clamp(std::abs(v.witness_value), 0.0, 1.0);
    v.witness_angle = std::asin(aligned);

    // consistency: the recovered field must explain the decomposition angle
    double gate = 0.0;
    const double c = std::cos(phi_star), s = std::sin(phi_star);
    for (size_t k = 0; k < A.size(); ++k) {
        gate += std::abs(sin_dec[k] - std::abs(c * A[k] + s * B[k]));
    }
    gate /= static_cast<double>(A.size());
    if (gate >= v.tolerance) {
        v.flags.push_back("angle-mismatch");
        return v;
    }

    v.holds = true;
    return v;
}

}  // namespace surf4
