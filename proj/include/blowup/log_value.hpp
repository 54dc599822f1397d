#pragma once

#include <cmath>
#include <limits>

namespace blowup {

/// A real number carried as sign * exp(log_abs) so that values like
/// e^{t^p} stay representable long after a double would overflow.
struct LogValue {
    double log_abs = -std::numeric_limits<double>::infinity();
    int sign = 0;

    static LogValue zero() { return {}; }

    static LogValue from_log(double log_abs, int sign = 1)
    {
        if (sign == 0 || log_abs == -std::numeric_limits<double>::infinity())
            return zero();
        return {log_abs, sign > 0 ? 1 : -1};
    }

    static LogValue from_double(double x)
    {
        if (x == 0.0)
            return zero();
        return {std::log(std::fabs(x)), x > 0 ? 1 : -1};
    }

    bool is_zero() const { return sign == 0; }

    /// May overflow to +-inf; callers that need the raw value must range-check.
    double value() const { return sign == 0 ? 0.0 : sign * std::exp(log_abs); }

    friend LogValue operator*(LogValue a, LogValue b)
    {
        if (a.is_zero() || b.is_zero())
            return zero();
        return {a.log_abs + b.log_abs, a.sign * b.sign};
    }
};

} // namespace blowup
