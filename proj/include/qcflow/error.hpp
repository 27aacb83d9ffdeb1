#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "qcflow/complex.hpp"

namespace qcflow {

enum class ErrorCode {
    InvalidArgument,
    ConfigParse,
    SingularPoint,
    CoincidentPoints,
    NotNormalizable,
    StepUnderflow,
    NotInAnnulus,
    MonotonicityViolation,
    WindowExit,
    OriginTooClose,
    NoConvergence,
    ZeroRadialComponent,
    BranchAmbiguity,
    ZeroGradient,
    ZeroVelocity,
    TooFewSamples,
    MissingParametrization,
    CurvesCoincideAtEnd,
    NonUnitZ,
    DistanceMismatch,
    NotDeltaMonotoneOnArc,
    ArcTooLong,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for every recoverable failure in the library.
/// The code identifies the failure; solver failures also carry the last state.
class QcError : public std::runtime_error {
public:
    QcError(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    QcError(ErrorCode code, const std::string& what, double t, ComplexPoint x)
        : QcError(code, what) {
        last_time_ = t;
        last_state_ = x;
    }

    ErrorCode code() const noexcept { return code_; }
    std::optional<double> last_time() const noexcept { return last_time_; }
    std::optional<ComplexPoint> last_state() const noexcept { return last_state_; }

private:
    ErrorCode code_;
    std::optional<double> last_time_;
    std::optional<ComplexPoint> last_state_;
};

}  // namespace qcflow
