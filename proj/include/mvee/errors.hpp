#ifndef MVEE_ERRORS_HPP
#define MVEE_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace mvee {

enum class ErrorCode {
    NotFullRank,
    DowndateBreaksPD,
    SingularUpdate,
    TooFewPoints,
    DegenerateCovariance,
    LineSearchStalled,
    Converged,
    DecrementBoundViolated,
    InvalidArgument,
    ParseError,
    IoError,
};

inline std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::NotFullRank: return "NotFullRank";
    case ErrorCode::DowndateBreaksPD: return "DowndateBreaksPD";
    case ErrorCode::SingularUpdate: return "SingularUpdate";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::DegenerateCovariance: return "DegenerateCovariance";
    case ErrorCode::LineSearchStalled: return "LineSearchStalled";
    case ErrorCode::Converged: return "Converged";
    case ErrorCode::DecrementBoundViolated: return "DecrementBoundViolated";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

/// Exception carrying a machine-checkable error code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace mvee

#endif // MVEE_ERRORS_HPP
