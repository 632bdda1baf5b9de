#pragma once

#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "surf4/classification.hpp"
#include "surf4/families.hpp"
#include "surf4/jets.hpp"
#include "surf4/position_analysis.hpp"
#include "surf4/surface_core.hpp"

namespace surf4 {

// Run configuration, parsed from flat "key = value" text with dotted
// section keys (surface.*, grid.*, scheme.*, tol.*, project.*, checks,
// output.path).  Unknown keys are rejected at parse time.  Grid ranges
// left unset fall back to per-family defaults when the surface is built.
struct RunConfig {
    // surface selection
    std::string builtin;          // preset name; expands as soon as it is set
    std::string family;           // css | gcr | cylinder | plane | sphere
    double theta = 1.0471975511965976;  // css slope angle, in (0, pi/2)
    std::string profile = "linear";     // gcr slope: linear|quadratic|log_linear
    double profile_a = 1.0;
    double profile_b = 0.0;
    double radius = 1.0;          // latitude radius of the directrix circle
    double bump = 0.0;            // optional ambient perturbation amplitude
    double alpha = 0.5;           // plane graph coefficients
    double beta = -0.25;

    // grid (NaN range = use the family default)
    double s_min = std::numeric_limits<double>::quiet_NaN();
    double s_max = std::numeric_limits<double>::quiet_NaN();
    double t_min = std::numeric_limits<double>::quiet_NaN();
    double t_max = std::numeric_limits<double>::quiet_NaN();
    int ns = 33;
    int nt = 33;

    // differentiation
    std::string scheme = "analytic";  // analytic | central | richardson
    double scheme_h = 0.0;            // 0 = per-coordinate default step

    // detectors to run for analyze
    std::vector<std::string> checks = {"CR", "T_constant", "N_constant", "GCR",
                                       "CSS"};

    // tolerance overrides (tol.class 0 = pick by scheme)
    double tol_class = 0.0;
    double tol_vanish = 1e-8;
    double tol_flat = 1e-4;
    double tol_path = 1e-4;

    // 3d projection
    std::string project_mode = "orthogonal";  // orthogonal | stereographic
    int project_drop = 4;                     // dropped (or pole) axis, 1..4

    std::string out_path;  // empty = write to the console stream
};

bool operator==(const RunConfig& a, const RunConfig& b);
inline bool operator!=(const RunConfig& a, const RunConfig& b) {
    return !(a == b);
}

// Strict parser: unknown keys, malformed lines, and invalid values raise
// ConfigError with a line diagnostic.  '#' starts a comment.
RunConfig parse_config_text(const std::string& text);

// Reads the file (IoError on failure) and parses it.
RunConfig load_config_file(const std::string& path);

// Applies one "KEY=VALUE" assignment, as given to --set.
void apply_override(RunConfig& config, const std::string& assignment);

// Canonical serialization; parsing it back yields an equal config.
std::string serialize_config(const RunConfig& config);

// Full validation (family present, ranges ordered, resolutions >= 5,
// tolerances positive, ...).  Throws ConfigError.
void validate_config(const RunConfig& config);

struct ResolvedSurface {
    ImmersionPatch patch;
    std::optional<SlopeProfile> profile;  // set for css/gcr families
    Domain box;                           // requested grid ranges
};

// Builds the configured patch.  For finite-difference schemes the patch
// loses its analytic jet callbacks so the scheme genuinely runs, and
// family domains grow by the stencil guard so the requested box survives
// the detector-grid shrink.
ResolvedSurface resolve_surface(const RunConfig& config);

DiffScheme scheme_from(const RunConfig& config);
DetectorOptions detector_options_from(const RunConfig& config);

// One row of the analyze table; invalid stages leave NaN fields.
struct PointRecord {
    double s = 0, t = 0;
    bool ok = false;  // jet + coordinate frame + curvature succeeded
    Vec4 x;
    FundamentalData data;
    double mu = std::numeric_limits<double>::quiet_NaN();
    double theta = std::numeric_limits<double>::quiet_NaN();
    double rd = std::numeric_limits<double>::quiet_NaN();
    double recompose = std::numeric_limits<double>::quiet_NaN();
};

struct SurfaceReport {
    std::string label;
    RunConfig config;
    DiffScheme scheme;  // effective scheme after jet resolution
    DetectorGrid grid;
    std::vector<ClassVerdict> verdicts;
    std::vector<std::string> errors;  // checks that raised, with messages
    std::vector<PointRecord> points;
};

SurfaceReport analyze_surface(const RunConfig& config);
void write_report(const SurfaceReport& report, std::ostream& os);

// Commands write their artifact to the stream and return the process
// exit code (0, or 3 when a requested check raised).  Config and IO
// problems are thrown.
int cmd_generate(const RunConfig& config, std::ostream& os);
int cmd_analyze(const RunConfig& config, std::ostream& os);
int cmd_verify(const RunConfig& config, std::ostream& os);
int cmd_project3d(const RunConfig& config, std::ostream& os);

// Dispatches a verb, honoring config.out_path (empty = console).
int run_command(const std::string& verb, const RunConfig& config,
                std::ostream& console, bool quiet);

}  // namespace surf4
