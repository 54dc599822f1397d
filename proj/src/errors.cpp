#include "blowup/errors.hpp"

namespace blowup {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::Domain: return "domain_error";
    case ErrorCode::Range: return "range_error";
    case ErrorCode::Convergence: return "convergence_error";
    case ErrorCode::Bracket: return "bracket_violation";
    case ErrorCode::StepLimit: return "step_limit";
    case ErrorCode::NonMonotone: return "non_monotone";
    case ErrorCode::OverflowInF: return "overflow_in_f";
    case ErrorCode::NoZero: return "no_zero";
    case ErrorCode::NoBubbles: return "no_bubbles";
    case ErrorCode::Io: return "io_error";
    }
    return "unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(detail), code_(code)
{
}

void fail(ErrorCode code, const std::string& detail)
{
    throw Error(code, detail);
}

} // namespace blowup
