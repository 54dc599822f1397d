#include "blowup/nonlinearity.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

#include "blowup/errors.hpp"

namespace blowup {

namespace {

constexpr double kMaxDirectExponent = 700.0;

double h4_constant(double p) { return 4.0 * (p - 1.0) / (p * p); }

} // namespace

Nonlinearity::Nonlinearity(NonlinearitySpec spec) : spec_(std::move(spec))
{
    const double p = spec_.p;
    if (!(p > 0.0) || !std::isfinite(p))
        fail(ErrorCode::Domain, fmt::format("exponent p must be positive, got {}", p));
    if (spec_.t_join && (!(*spec_.t_join >= 0.0) || !std::isfinite(*spec_.t_join)))
        fail(ErrorCode::Domain, "t_join must be finite and nonnegative");

    if (std::holds_alternative<UnitH>(spec_.variant)) {
        t_join_ = 0.0;
    } else if (const auto* pe = std::get_if<PowerExp>(&spec_.variant)) {
        if (!std::isfinite(pe->m) || !std::isfinite(pe->alpha) || !std::isfinite(pe->q))
            fail(ErrorCode::Domain, "PowerExp parameters must be finite");
        if (pe->alpha != 0.0 && !(pe->q > 0.0 && pe->q < p))
            fail(ErrorCode::Domain, fmt::format("PowerExp needs 0 < q < p, got q={} p={}", pe->q, p));
        t_join_ = spec_.t_join.value_or(1.0);
        if (t_join_ == 0.0 && pe->m < 0.0)
            fail(ErrorCode::Domain, "PowerExp with m < 0 needs t_join > 0");
        if (t_join_ > 0.0) {
            blend_.log_h_join = closed_log_h(t_join_);
            blend_.slope_join = closed_dlog_h(t_join_);
        }
    } else {
        const auto& h4 = std::get<H4>(spec_.variant);
        if (!(p > 2.0))
            fail(ErrorCode::Domain, fmt::format("H4 requires p > 2, got {}", p));
        if (!(h4.tau0 > 0.0) || !std::isfinite(h4.tau0))
            fail(ErrorCode::Domain, "H4 requires tau0 > 0");
        if (spec_.t_join && *spec_.t_join != h4.tau0)
            fail(ErrorCode::Domain, "H4 joins at tau0; t_join must be omitted or equal tau0");
        t_join_ = h4.tau0;

        const double tau = h4.tau0;
        const double d1 = closed_dlog_h(tau) + p * std::pow(tau, p - 1.0);
        const double d2 = closed_d2log_h(tau) + p * (p - 1.0) * std::pow(tau, p - 2.0);
        blend_.log_f_join = closed_log_h(tau) + std::pow(tau, p);

        // Q(1) = 1, Q'(1) = tau (log f)', Q''(1) = tau^2 ((log f)'' + (log f)'^2)
        const double r0 = 0.5;
        const double q1 = tau * d1;
        const double q2 = tau * tau * (d2 + d1 * d1);
        blend_.c5 = 0.5 * (q2 - 6.0 * q1 + 12.0 * r0);
        blend_.c4 = q1 - 3.0 * r0 - 2.0 * blend_.c5;
        blend_.c3 = r0 - blend_.c4 - blend_.c5;

        for (int i = 0; i <= 1000; ++i) {
            const double x = i / 1000.0;
            if (quintic(x) < 0.0)
                fail(ErrorCode::Domain,
                     fmt::format("H4 blend below tau0={} dips below zero at t={}", tau, x * tau));
        }
    }
}

double Nonlinearity::closed_log_h(double t) const
{
    if (const auto* pe = std::get_if<PowerExp>(&spec_.variant)) {
        double v = pe->alpha == 0.0 ? 0.0 : pe->alpha * std::pow(t, pe->q);
        if (pe->m != 0.0)
            v += pe->m * std::log(t);
        return v;
    }
    if (is_h4())
        return std::log(h4_constant(spec_.p)) + (1.0 - 2.0 * spec_.p) * std::log(t);
    return 0.0;
}

double Nonlinearity::closed_dlog_h(double t) const
{
    if (const auto* pe = std::get_if<PowerExp>(&spec_.variant)) {
        double v = pe->m / t;
        if (pe->alpha != 0.0)
            v += pe->alpha * pe->q * std::pow(t, pe->q - 1.0);
        return v;
    }
    if (is_h4())
        return (1.0 - 2.0 * spec_.p) / t;
    return 0.0;
}

double Nonlinearity::closed_d2log_h(double t) const
{
    if (const auto* pe = std::get_if<PowerExp>(&spec_.variant)) {
        double v = -pe->m / (t * t);
        if (pe->alpha != 0.0)
            v += pe->alpha * pe->q * (pe->q - 1.0) * std::pow(t, pe->q - 2.0);
        return v;
    }
    if (is_h4())
        return -(1.0 - 2.0 * spec_.p) / (t * t);
    return 0.0;
}

double Nonlinearity::quintic(double x) const
{
    return 0.5 + x * x * x * (blend_.c3 + x * (blend_.c4 + x * blend_.c5));
}

double Nonlinearity::quintic_d1(double x) const
{
    return x * x * (3.0 * blend_.c3 + x * (4.0 * blend_.c4 + x * 5.0 * blend_.c5));
}

double Nonlinearity::quintic_d2(double x) const
{
    return x * (6.0 * blend_.c3 + x * (12.0 * blend_.c4 + x * 20.0 * blend_.c5));
}

LogValue Nonlinearity::log_f(double t) const
{
    if (!(t >= 0.0) || !std::isfinite(t))
        fail(ErrorCode::Domain, fmt::format("f evaluated at invalid t={}", t));
    const double tp = std::pow(t, spec_.p);

    if (is_h4()) {
        if (t >= t_join_)
            return LogValue::from_log(closed_log_h(t) + tp);
        const double q = quintic(t / t_join_);
        if (q <= 0.0)
            return LogValue::zero();
        return LogValue::from_log(blend_.log_f_join + std::log(q));
    }
    if (const auto* pe = std::get_if<PowerExp>(&spec_.variant)) {
        if (t >= t_join_) {
            if (t == 0.0)
                return pe->m > 0.0 ? LogValue::zero() : LogValue::from_log(0.0);
            return LogValue::from_log(closed_log_h(t) + tp);
        }
        const double x = t / t_join_;
        return LogValue::from_log(blend_.log_h_join + blend_.slope_join * t_join_ * (x * x * x - x * x) + tp);
    }
    return LogValue::from_log(tp);
}

double Nonlinearity::log_h(double t) const
{
    const LogValue lf = log_f(t);
    return lf.log_abs - std::pow(t, spec_.p);
}

double Nonlinearity::dlog_h(double t) const
{
    if (!(t > 0.0))
        fail(ErrorCode::Domain, "dlog_h needs t > 0");
    if (t >= t_join_)
        return closed_dlog_h(t);
    if (is_h4()) {
        const double x = t / t_join_;
        return quintic_d1(x) / (t_join_ * quintic(x)) - spec_.p * std::pow(t, spec_.p - 1.0);
    }
    const double x = t / t_join_;
    return blend_.slope_join * (3.0 * x * x - 2.0 * x);
}

double Nonlinearity::dlog_f(double t) const
{
    if (!(t > 0.0))
        fail(ErrorCode::Domain, "dlog_f needs t > 0");
    if (is_h4() && t < t_join_) {
        const double x = t / t_join_;
        return quintic_d1(x) / (t_join_ * quintic(x));
    }
    return dlog_h(t) + spec_.p * std::pow(t, spec_.p - 1.0);
}

double Nonlinearity::d2log_f(double t) const
{
    if (!(t > 0.0))
        fail(ErrorCode::Domain, "d2log_f needs t > 0");
    const double p = spec_.p;
    const double tp2 = p * (p - 1.0) * std::pow(t, p - 2.0);
    if (t >= t_join_)
        return closed_d2log_h(t) + tp2;
    const double x = t / t_join_;
    if (is_h4()) {
        const double q = quintic(x);
        const double q1 = quintic_d1(x) / t_join_;
        const double q2 = quintic_d2(x) / (t_join_ * t_join_);
        return q2 / q - (q1 / q) * (q1 / q);
    }
    return blend_.slope_join * (6.0 * x - 2.0) / t_join_ + tp2;
}

LogValue Nonlinearity::log_f_prime(double t) const
{
    if (!(t >= 0.0) || !std::isfinite(t))
        fail(ErrorCode::Domain, fmt::format("f' evaluated at invalid t={}", t));
    const double p = spec_.p;
    if (t == 0.0) {
        // Blends are flat at 0; the remaining factor is d/dt e^{t^p} at 0.
        if (const auto* pe = std::get_if<PowerExp>(&spec_.variant); pe && t_join_ == 0.0) {
            if (!(pe->m == 0.0 && pe->alpha == 0.0))
                fail(ErrorCode::Domain, "PowerExp f' is singular at t=0 without a blend");
        }
        if (p < 1.0)
            fail(ErrorCode::Domain, "f' is singular at t=0 for p < 1");
        if (p > 1.0 || is_h4())
            return LogValue::zero();
        return log_f(0.0);
    }
    const LogValue lf = log_f(t);
    if (lf.is_zero())
        return LogValue::zero();
    return lf * LogValue::from_double(dlog_f(t));
}

double Nonlinearity::primitive(double t, double rel_tol) const
{
    if (!(t >= 0.0) || !std::isfinite(t))
        fail(ErrorCode::Domain, fmt::format("F evaluated at invalid t={}", t));
    if (std::pow(t, spec_.p) > kMaxDirectExponent)
        fail(ErrorCode::Range, fmt::format("F({}) overflows the direct representation", t));
    if (t == 0.0)
        return 0.0;

    using boost::math::quadrature::gauss_kronrod;
    auto f = [this](double x) { return log_f(std::max(x, 0.0)).value(); };
    double total = 0.0;
    const double split = std::min(t, t_join_);
    if (split > 0.0)
        total += gauss_kronrod<double, 61>::integrate(f, 0.0, split, 20, rel_tol);
    if (t > split)
        total += gauss_kronrod<double, 61>::integrate(f, split, t, 20, rel_tol);
    return total;
}

H1Report Nonlinearity::check_h1(std::span<const double> t_grid) const
{
    H1Report report;
    double prev = std::numeric_limits<double>::infinity();
    for (double t : t_grid) {
        const double ratio = dlog_h(t) / std::pow(t, spec_.p - 1.0);
        report.t.push_back(t);
        report.ratio.push_back(ratio);
        if (std::fabs(ratio) > prev)
            report.decaying = false;
        prev = std::fabs(ratio);
    }
    return report;
}

} // namespace blowup
