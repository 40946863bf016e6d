#include "dressing/error.hpp"

namespace dressing {

std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::DegenerateLattice: return "DegenerateLattice";
    case ErrorCode::PoleProximity: return "PoleProximity";
    case ErrorCode::RangeOverflow: return "RangeOverflow";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::EvenPeriod: return "EvenPeriod";
    case ErrorCode::ImmediateBlowup: return "ImmediateBlowup";
    case ErrorCode::OffCurveInitialData: return "OffCurveInitialData";
    case ErrorCode::SingularReconstruction: return "SingularReconstruction";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonRealValue: return "NonRealValue";
    }
    return "Unknown";
}

}  // namespace dressing
