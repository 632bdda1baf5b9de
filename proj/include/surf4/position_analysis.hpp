#pragma once

#include <string>
#include <utility>
#include <vector>

#include "surf4/euclid4.hpp"
#include "surf4/jets.hpp"
#include "surf4/surface_core.hpp"

namespace surf4 {

// Splitting of the position vector at a surface point into the part inside
// the tangent plane and the remainder in the normal plane.
struct PositionDecomposition {
    double mu = 0.0;     // distance from the origin
    double theta = 0.0;  // angle between x and the tangent plane, in [0, pi/2]
    Vec4 xT{};           // tangential part
    Vec4 xPerp{};        // normal part
};

// Decompose the position vector carried by a jet.  Throws OriginPoint when
// the point is too close to the origin for the angle to be defined.  Cone
// points whose tangent span degenerates to a line are handled by projecting
// onto the dominant coordinate direction.
PositionDecomposition decompose(const Jet2& jet, double tol = 1e-12);

// Derivatives of mu = |x| along the position-adapted tangent frame (e1, e2):
// mu is differenced as a field and e1, e2 are expanded in coordinates.
std::pair<double, double> directional_derivatives_of_mu(
    const ImmersionPatch& patch, double s, double t,
    const DiffScheme& scheme = DiffScheme::analytic_jets());

// Options shared by the class detectors.
struct DetectorOptions {
    DiffScheme scheme = DiffScheme::analytic_jets();
    int ns = 33;               // grid resolution in s
    int nt = 33;               // grid resolution in t
    double class_tol = 0.0;    // 0 = auto: 1e-5 with analytic jets, 1e-3 otherwise
    double vanish_tol = 1e-8;  // component-vanishing threshold, scaled by (1 + mu)
    double flat_tol = 1e-4;    // normal-curvature flatness gate
    double path_tol = 1e-4;    // path-independence gate for the connection form
};

// Evaluation lattice: the patch domain shrunk by a guard band of two stencil
// widths so every detector stencil stays inside the domain.
struct DetectorGrid {
    std::vector<double> s;
    std::vector<double> t;
};

DetectorGrid detector_grid(const ImmersionPatch& patch,
                           const DetectorOptions& options);

// Outcome of one membership test.  Unless a flag overrides the decision,
// holds is equivalent to max_deviation < tolerance.
struct ClassVerdict {
    std::string class_name;  // CR, T_constant, N_constant, GCR, CSS
    bool holds = false;
    double max_deviation = 0.0;
    double tolerance = 0.0;
    std::vector<std::string> flags;
    double witness_angle = 0.0;  // recovered angle where meaningful (radians)
    double witness_phi = 0.0;    // CSS: gauge angle of the selected parallel field
    double witness_value = 0.0;  // auxiliary scalar (mean ratio, raw off-diagonal, ...)
    int excluded_points = 0;
    int total_points = 0;
};

// CR: the ratio |xT| / |xPerp| is constant over the grid.
ClassVerdict is_constant_ratio(const ImmersionPatch& patch,
                               const DetectorOptions& options = {});

// Constant length of the tangential (resp. normal) part of the position.
ClassVerdict is_T_constant(const ImmersionPatch& patch,
                           const DetectorOptions& options = {});
ClassVerdict is_N_constant(const ImmersionPatch& patch,
                           const DetectorOptions& options = {});

// GCR: the tangential direction of the position vector is a principal
// direction of both shape operators, i.e. the off-diagonal entries vanish in
// the position-adapted frame.
ClassVerdict is_GCR(const ImmersionPatch& patch,
                    const DetectorOptions& options = {});

// CSS: some parallel unit normal field makes a constant angle with the
// position vector.  Requires a flat normal bundle over the grid; the parallel
// candidates are built by integrating the normal connection form along grid
// lines and the angle is recovered from the best candidate.
ClassVerdict is_CSS(const ImmersionPatch& patch,
                    const DetectorOptions& options = {});

}  // namespace surf4
