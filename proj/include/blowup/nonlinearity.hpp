#pragma once

#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "blowup/log_value.hpp"

namespace blowup {

/// h == 1, so f(t) = e^{t^p}.
struct UnitH {};

/// h(t) = t^m e^{alpha t^q} for t >= t_join, blended below.
struct PowerExp {
    double m = 0.0;
    double alpha = 0.0;
    double q = 1.0;
};

/// f(t) = (4(p-1)/p^2) t^{1-2p} e^{t^p} for t >= tau0, quintic below.
struct H4 {
    double tau0 = 1.0;
};

using NonlinearityVariant = std::variant<UnitH, PowerExp, H4>;

struct NonlinearitySpec {
    double p = 1.0;
    NonlinearityVariant variant = UnitH{};
    /// Threshold above which the closed form holds. Defaults: 0 for UnitH,
    /// 1 for PowerExp, tau0 for H4.
    std::optional<double> t_join;
};

struct H1Report {
    std::vector<double> t;
    std::vector<double> ratio;   // h'(t) / (t^{p-1} h(t))
    bool decaying = true;        // |ratio| nonincreasing along the grid
};

/// A validated nonlinearity f(u) = h(u) e^{u^p}. Immutable after
/// construction; every evaluation is done in log space.
class Nonlinearity {
public:
    explicit Nonlinearity(NonlinearitySpec spec);

    const NonlinearitySpec& spec() const { return spec_; }
    double p() const { return spec_.p; }
    double t_join() const { return t_join_; }
    bool is_h4() const { return std::holds_alternative<H4>(spec_.variant); }

    /// log f(t) for t >= 0.
    LogValue log_f(double t) const;
    /// log f'(t); t > 0, or t == 0 when the derivative is finite there.
    LogValue log_f_prime(double t) const;
    /// (log f)'(t), defined wherever f(t) > 0 and t > 0.
    double dlog_f(double t) const;
    /// (log f)''(t), same domain as dlog_f.
    double d2log_f(double t) const;

    double log_h(double t) const;
    double dlog_h(double t) const;

    /// F(t) = int_0^t f. Throws Range when t^p > 700.
    double primitive(double t, double rel_tol = 1e-10) const;

    H1Report check_h1(std::span<const double> t_grid) const;

private:
    struct Blend {
        // H4: f(t) = f(tau0) * Q(t/tau0), Q(x) = 1/2 + c3 x^3 + c4 x^4 + c5 x^5.
        double log_f_join = 0.0;
        double c3 = 0.0, c4 = 0.0, c5 = 0.0;
        // PowerExp: log h(t) = log_h_join + slope * t_join * (x^3 - x^2).
        double log_h_join = 0.0;
        double slope_join = 0.0;
    };

    double closed_log_h(double t) const;
    double closed_dlog_h(double t) const;
    double closed_d2log_h(double t) const;
    double quintic(double x) const;
    double quintic_d1(double x) const;
    double quintic_d2(double x) const;

    NonlinearitySpec spec_;
    double t_join_ = 0.0;
    Blend blend_;
};

} // namespace blowup
