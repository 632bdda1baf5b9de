#pragma once

#include <stdexcept>
#include <string>

namespace surf4 {

// Base class for all numeric/geometric failures raised by the toolkit.
struct GeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define SURF4_DEFINE_ERROR(NAME)                                         \
    struct NAME : GeometryError {                                        \
        explicit NAME(const std::string& what = #NAME)                   \
            : GeometryError(what) {}                                     \
    }

SURF4_DEFINE_ERROR(DegenerateSpan);
SURF4_DEFINE_ERROR(StencilOutOfDomain);
SURF4_DEFINE_ERROR(DegenerateImmersion);
SURF4_DEFINE_ERROR(AnalyticJetsUnavailable);
SURF4_DEFINE_ERROR(FrameFlip);
SURF4_DEFINE_ERROR(TangentialComponentVanishes);
SURF4_DEFINE_ERROR(NormalComponentVanishes);
SURF4_DEFINE_ERROR(OriginPoint);
SURF4_DEFINE_ERROR(DegenerateGrid);
SURF4_DEFINE_ERROR(NonFlatNormalBundle);
SURF4_DEFINE_ERROR(InvalidRadius);
SURF4_DEFINE_ERROR(NonOrthonormalInputs);
SURF4_DEFINE_ERROR(InvalidAngle);
SURF4_DEFINE_ERROR(SingularProfile);
SURF4_DEFINE_ERROR(StepSizeTooLarge);
SURF4_DEFINE_ERROR(CosThetaVanishes);
SURF4_DEFINE_ERROR(UnfitModel);
SURF4_DEFINE_ERROR(NearSingularClosedForm);
SURF4_DEFINE_ERROR(DegenerateProjection);

#undef SURF4_DEFINE_ERROR

// Configuration/CLI failures, kept apart from numeric errors so the driver
// can map them to distinct exit codes.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace surf4
