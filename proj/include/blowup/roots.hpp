#pragma once

#include <cmath>
#include <utility>

#include <fmt/format.h>

#include "blowup/errors.hpp"

namespace blowup {

struct RootOptions {
    double width = 1e-12;      // bisection stops once the bracket is this narrow
    int max_bisections = 400;
    int newton_steps = 5;
    double residual_tol = 1e-10;
};

struct RootResult {
    double x = 0.0;
    double residual = 0.0;
    int bisections = 0;
    int newton_steps = 0;
};

/// Bisection on [lo, hi] followed by a few bracket-safeguarded Newton
/// steps. f(lo) and f(hi) must have opposite signs. `fd` returns the pair
/// (f(x), f'(x)).
template <class F, class FD>
RootResult bracketed_root(F&& f, FD&& fd, double lo, double hi, const RootOptions& opts = {})
{
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0)
        return {lo, 0.0, 0, 0};
    if (fhi == 0.0)
        return {hi, 0.0, 0, 0};
    if ((flo > 0.0) == (fhi > 0.0))
        fail(ErrorCode::Bracket, fmt::format("root not bracketed on [{}, {}] (f={}, {})", lo, hi, flo, fhi));

    RootResult out;
    while (hi - lo > opts.width && out.bisections < opts.max_bisections) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
            break;
        const double fm = f(mid);
        ++out.bisections;
        if (fm == 0.0) {
            lo = hi = mid;
            break;
        }
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }

    double x = 0.5 * (lo + hi);
    auto [fx, dfx] = fd(x);
    for (int i = 0; i < opts.newton_steps && fx != 0.0; ++i) {
        if (dfx == 0.0 || !std::isfinite(dfx))
            break;
        const double next = x - fx / dfx;
        if (!(next >= lo && next <= hi))
            break;
        const auto [fn, dfn] = fd(next);
        if (std::fabs(fn) >= std::fabs(fx))
            break;
        x = next;
        fx = fn;
        dfx = dfn;
        ++out.newton_steps;
    }
    out.x = x;
    out.residual = fx;
    if (!(std::fabs(fx) <= opts.residual_tol))
        fail(ErrorCode::Convergence, fmt::format("root residual {} stalled above {}", fx, opts.residual_tol));
    return out;
}

} // namespace blowup
