#include "blowup/profiles.hpp"

#include <cmath>
#include <limits>
#include <numbers>

// pchip.hpp uses isnan unqualified without including it.
#include <boost/math/special_functions/fpclassify.hpp>
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>
#include <fmt/format.h>

#include "blowup/errors.hpp"
#include "blowup/io.hpp"

namespace blowup {

namespace {

// log(1 + e^w) without overflow.
double softplus(double w)
{
    return w > 0.0 ? w + std::log1p(std::exp(-w)) : std::log1p(std::exp(w));
}

double logistic(double w)
{
    if (w >= 0.0)
        return 1.0 / (1.0 + std::exp(-w));
    const double e = std::exp(w);
    return e / (1.0 + e);
}

// Regular0 and Tilde0 share the shape z = log(K/(c + r^2)^2): (K, c) = (64, 8)
// or (16, 2).
LogRadiusValue bubble_shape(double K, double c, double s)
{
    const double w = 2.0 * s - std::log(c);
    const double sig = logistic(w);
    const double one_minus = logistic(-w);
    return {std::log(K / (c * c)) - 2.0 * softplus(w), -4.0 * sig, -8.0 * sig * one_minus};
}

void check_singular(const SingularA& prof)
{
    if (!(prof.a > 0.0 && prof.a < 2.0) || !(prof.b > 0.0))
        fail(ErrorCode::Domain, fmt::format("singular profile needs a in (0,2), b > 0; got a={} b={}", prof.a, prof.b));
}

} // namespace

SingularA singular_profile(double a)
{
    SingularA prof{a, std::pow(std::numbers::sqrt2 / a, a)};
    check_singular(prof);
    return prof;
}

LogRadiusValue eval_profile_log(const Profile& profile, double s)
{
    if (std::holds_alternative<Regular0>(profile))
        return bubble_shape(64.0, 8.0, s);
    if (std::holds_alternative<Tilde0>(profile))
        return bubble_shape(16.0, 2.0, s);
    const auto& prof = std::get<SingularA>(profile);
    check_singular(prof);
    const double a = prof.a;
    const double w = std::log(prof.b) + a * s;
    const double sig = logistic(w);
    const double one_minus = logistic(-w);
    return {std::log(2.0 * a * a * prof.b) - (2.0 - a) * s - 2.0 * softplus(w),
            -(2.0 - a) - 2.0 * a * sig,
            -2.0 * a * a * sig * one_minus};
}

ProfileValue eval_profile(const Profile& profile, double r)
{
    if (!(r >= 0.0) || !std::isfinite(r))
        fail(ErrorCode::Domain, fmt::format("profile radius must be finite and >= 0, got {}", r));
    if (r == 0.0) {
        if (std::holds_alternative<SingularA>(profile))
            fail(ErrorCode::Domain, "singular profile is undefined at r = 0");
        if (std::holds_alternative<Regular0>(profile))
            return {0.0, 0.0, -0.5};
        return {std::log(4.0), 0.0, -2.0};
    }
    const LogRadiusValue v = eval_profile_log(profile, std::log(r));
    return {v.z, v.z_s / r, (v.z_ss - v.z_s) / (r * r)};
}

double profile_mass_exact(const Profile& profile)
{
    if (const auto* prof = std::get_if<SingularA>(&profile))
        return 2.0 * prof->a;
    return 4.0;
}

double profile_mass(const Profile& profile, double tol)
{
    if (!(tol > 0.0 && tol <= 1e-6))
        fail(ErrorCode::Domain, fmt::format("mass tolerance {} outside (0, 1e-6]", tol));
    auto integrand = [&](double s) {
        const double v = eval_profile_log(profile, s).z + 2.0 * s;
        return v < -745.0 ? 0.0 : std::exp(v);
    };
    boost::math::quadrature::sinh_sinh<double> integrator(12);
    double err = 0.0;
    const double mass = integrator.integrate(integrand, tol, &err);
    if (!std::isfinite(mass) || err > 100.0 * tol * std::fabs(mass))
        fail(ErrorCode::Convergence, fmt::format("profile mass quadrature error estimate {}", err));
    return mass;
}

double profile_residual(const Profile& profile, double r)
{
    if (!(r > 0.0))
        fail(ErrorCode::Domain, "profile residual needs r > 0");
    const double s = std::log(r);
    const LogRadiusValue v = eval_profile_log(profile, s);
    return -v.z_ss - std::exp(v.z + 2.0 * s);
}

double phi_of_profile(const Profile& profile, double R)
{
    if (!(R > 0.0))
        return 0.0;
    const double s = std::log(R);
    return std::exp(eval_profile_log(profile, s).z + 2.0 * s);
}

std::string profile_csv(const Profile& profile)
{
    std::string out = "s,z,zprime,residual\n";
    for (int i = 0; i <= 400; ++i) {
        const double s = (i - 200) / 20.0;
        const double r = std::exp(s);
        const ProfileValue v = eval_profile(profile, r);
        out += fmt::format("{},{},{},{}\n", fmt_real(s), fmt_real(v.z), fmt_real(v.dz),
                           fmt_real(profile_residual(profile, r)));
    }
    return out;
}

// ---------------------------------------------------------------------------

struct TabulatedCurve::Impl {
    boost::math::interpolators::pchip<std::vector<double>> spline;
};

TabulatedCurve::TabulatedCurve(std::vector<double> s, std::vector<double> values)
{
    if (s.size() != values.size() || s.size() < 4)
        fail(ErrorCode::Domain, "tabulated curve needs >= 4 matching samples");
    for (std::size_t i = 1; i < s.size(); ++i)
        if (!(s[i] > s[i - 1]))
            fail(ErrorCode::Domain, "tabulated curve abscissae must be strictly increasing");
    s_min_ = s.front();
    s_max_ = s.back();
    impl_ = std::make_shared<const Impl>(Impl{{std::move(s), std::move(values)}});
}

double TabulatedCurve::operator()(double s) const
{
    if (!(s >= s_min_ && s <= s_max_))
        fail(ErrorCode::Domain, fmt::format("tabulated curve queried at s={} outside [{}, {}]", s, s_min_, s_max_));
    return impl_->spline(s);
}

namespace {

double vl_content(const VL& c, double s)
{
    const double two_log = -2.0 * s;
    return two_log - (1.0 - (1.0 - c.m) / c.p) * std::log(two_log) + c.L;
}

} // namespace

bool curve_defined(const Curve& curve, double s)
{
    if (const auto* u = std::get_if<UBeta>(&curve))
        return s <= 0.0 && u->beta > 0.0 && u->p > 0.0;
    if (const auto* v = std::get_if<VL>(&curve))
        return -2.0 * s > 1.0 && vl_content(*v, s) >= 0.0;
    if (const auto* sp = std::get_if<SplicedCurve>(&curve))
        return s <= sp->tail.s_max() && (s >= sp->tail.s_min() || curve_defined(sp->head, s));
    const auto& t = std::get<TabulatedCurve>(curve);
    return s >= t.s_min() && s <= t.s_max();
}

double eval_curve(const Curve& curve, double s)
{
    if (!curve_defined(curve, s))
        fail(ErrorCode::Domain, fmt::format("{} undefined at s={}", curve_id(curve), s));
    if (const auto* u = std::get_if<UBeta>(&curve))
        return std::pow(-u->beta * s, 1.0 / u->p);
    if (const auto* v = std::get_if<VL>(&curve))
        return std::pow(vl_content(*v, s), 1.0 / v->p);
    if (const auto* sp = std::get_if<SplicedCurve>(&curve))
        return s < sp->tail.s_min() ? eval_curve(sp->head, s) : sp->tail(s);
    return std::get<TabulatedCurve>(curve)(s);
}

std::string curve_id(const Curve& curve)
{
    if (const auto* u = std::get_if<UBeta>(&curve))
        return fmt::format("U_beta(beta={},p={})", u->beta, u->p);
    if (const auto* v = std::get_if<VL>(&curve))
        return fmt::format("V_L(L={},p={},m={})", v->L, v->p, v->m);
    if (const auto* sp = std::get_if<SplicedCurve>(&curve))
        return fmt::format("spliced({}|tabulated from s={})", curve_id(sp->head), sp->tail.s_min());
    return "tabulated";
}

} // namespace blowup
