#pragma once

#include <stdexcept>
#include <string>

namespace gradostat {

enum class ErrorCode {
    NegativeInflow,
    DimensionMismatch,
    SingularSystem,
    WrongKind,
    InvalidBounds,
    DuplicateName,
    UnknownVariable,
    EmptyProgram,
    Infeasible,
    TooLarge,
    MissingGamma,
    MissingDuals,
    StepTooLarge,
    UnknownExample,
    BadInput,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

} // namespace gradostat
