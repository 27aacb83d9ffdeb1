#include "qcflow/error.hpp"

namespace qcflow {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::ConfigParse: return "ConfigParse";
        case ErrorCode::SingularPoint: return "SingularPoint";
        case ErrorCode::CoincidentPoints: return "CoincidentPoints";
        case ErrorCode::NotNormalizable: return "NotNormalizable";
        case ErrorCode::StepUnderflow: return "StepUnderflow";
        case ErrorCode::NotInAnnulus: return "NotInAnnulus";
        case ErrorCode::MonotonicityViolation: return "MonotonicityViolation";
        case ErrorCode::WindowExit: return "WindowExit";
        case ErrorCode::OriginTooClose: return "OriginTooClose";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::ZeroRadialComponent: return "ZeroRadialComponent";
        case ErrorCode::BranchAmbiguity: return "BranchAmbiguity";
        case ErrorCode::ZeroGradient: return "ZeroGradient";
        case ErrorCode::ZeroVelocity: return "ZeroVelocity";
        case ErrorCode::TooFewSamples: return "TooFewSamples";
        case ErrorCode::MissingParametrization: return "MissingParametrization";
        case ErrorCode::CurvesCoincideAtEnd: return "CurvesCoincideAtEnd";
        case ErrorCode::NonUnitZ: return "NonUnitZ";
        case ErrorCode::DistanceMismatch: return "DistanceMismatch";
        case ErrorCode::NotDeltaMonotoneOnArc: return "NotDeltaMonotoneOnArc";
        case ErrorCode::ArcTooLong: return "ArcTooLong";
    }
    return "Unknown";
}

}  // namespace qcflow
