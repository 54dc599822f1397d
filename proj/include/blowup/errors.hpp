#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace blowup {

enum class ErrorCode {
    Domain,
    Range,
    Convergence,
    Bracket,
    StepLimit,
    NonMonotone,
    OverflowInF,
    NoZero,
    NoBubbles,
    Io,
};

/// Stable machine-readable name, used in the CLI error JSON.
std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& detail);

} // namespace blowup
