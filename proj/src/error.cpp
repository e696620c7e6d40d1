#include "gradostat/error.hpp"

namespace gradostat {

const char* to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::NegativeInflow: return "NegativeInflow";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::WrongKind: return "WrongKind";
    case ErrorCode::InvalidBounds: return "InvalidBounds";
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::UnknownVariable: return "UnknownVariable";
    case ErrorCode::EmptyProgram: return "EmptyProgram";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::MissingGamma: return "MissingGamma";
    case ErrorCode::MissingDuals: return "MissingDuals";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::UnknownExample: return "UnknownExample";
    case ErrorCode::BadInput: return "BadInput";
    }
    return "Unknown";
}

} // namespace gradostat
