#include "blowup/radial_solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <fmt/format.h>

#include "blowup/errors.hpp"
#include "blowup/io.hpp"

namespace blowup {

namespace {

constexpr double kMaxExponent = 700.0;

// G = lambda r^2 F(u) and B = int lambda F(u) t dt, carried only for the
// Pohozaev check. G stays O(1) where F(u) itself spans many decades.
enum Slot { U = 0, V, A, M, W, G, B, kSlots };
using State = std::array<double, kSlots>;

// Dormand-Prince 5(4).
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

State combine(const State& y, double h, std::initializer_list<std::pair<double, const State*>> terms)
{
    State out = y;
    for (const auto& [coef, k] : terms)
        for (int i = 0; i < kSlots; ++i)
            out[i] += h * coef * (*k)[i];
    return out;
}

struct StepOut {
    State y;
    State err;
};

Sample to_sample(double s, const State& y) { return {s, y[U], y[V], y[A], y[M], y[W]}; }

State from_sample(const Sample& smp) { return {smp.u, smp.v, smp.A, smp.M, smp.W, 0.0, 0.0}; }

enum class Stop { RadiusOne, FirstZero, AtS };

struct RunResult {
    std::vector<double> s;
    std::vector<State> y;
    Termination termination = Termination::StepLimit;
    std::size_t steps = 0;
    double u_error = 0.0;
};

} // namespace

/// Right-hand side and stepping for one (nonlinearity, lambda) pair.
class RadialIntegrator {
public:
    RadialIntegrator(const Nonlinearity& nl, double lambda, const SolverOptions& opts, bool with_primitive = false)
        : nl_(nl), lambda_(lambda), log_lambda_(std::log(lambda)), opts_(opts), with_primitive_(with_primitive)
    {
    }

    State rhs(double s, const State& y) const
    {
        State d{};
        const double u = std::max(y[U], 0.0);
        const LogValue lf = nl_.log_f(u);
        double g = 0.0;
        if (!lf.is_zero()) {
            const double e = 2.0 * s + log_lambda_ + lf.log_abs;
            if (e > kMaxExponent)
                fail(ErrorCode::OverflowInF, fmt::format("lambda r^2 f(u) = exp({}) at u={}, s={}", e, u, s));
            g = std::exp(e);
        }
        const double p = nl_.p();
        d[U] = y[V];
        d[V] = -g;
        d[A] = g;
        d[M] = u > 0.0 ? p * std::pow(u, p - 1.0) * g : (p == 1.0 ? g : 0.0);
        d[W] = s * g;
        if (with_primitive_) {
            d[G] = 2.0 * y[G] + g * y[V];
            d[B] = y[G];
        }
        return d;
    }

    StepOut step(double s, const State& y, double h) const
    {
        const State k1 = rhs(s, y);
        const State k2 = rhs(s + c2 * h, combine(y, h, {{a21, &k1}}));
        const State k3 = rhs(s + c3 * h, combine(y, h, {{a31, &k1}, {a32, &k2}}));
        const State k4 = rhs(s + c4 * h, combine(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
        const State k5 = rhs(s + c5 * h, combine(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
        const State k6 =
            rhs(s + h, combine(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
        const State y5 = combine(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
        const State k7 = rhs(s + h, y5);
        StepOut out{y5, {}};
        for (int i = 0; i < kSlots; ++i)
            out.err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        return out;
    }

    double error_norm(const State& y, const StepOut& out) const
    {
        double norm = 0.0;
        const int last = with_primitive_ ? B : V;
        for (int i = 0; i <= last; ++i) {
            if (i > V && i < G)
                continue;
            const double scale = opts_.abs_tol + opts_.rel_tol * std::max(std::fabs(y[i]), std::fabs(out.y[i]));
            norm = std::max(norm, std::fabs(out.err[i]) / scale);
        }
        return norm;
    }

    RunResult run(double s0, const State& y0, Stop stop, double s_target = 0.0) const
    {
        RunResult res;
        res.s.push_back(s0);
        res.y.push_back(y0);
        double s = s0;
        State y = y0;
        double h = std::min(opts_.initial_step, opts_.max_step);
        double sum_eu = 0.0, sum_ev = 0.0, sum_ev_s = 0.0;
        const bool has_target = stop != Stop::FirstZero;
        if (stop == Stop::RadiusOne)
            s_target = 0.0;

        auto finish_error = [&](double s_end) { res.u_error = sum_eu + s_end * sum_ev - sum_ev_s; };

        if (has_target && s >= s_target) {
            res.termination = Termination::ReachedBoundary;
            return res;
        }

        for (;;) {
            if (res.steps >= opts_.max_steps)
                fail(ErrorCode::StepLimit,
                     fmt::format("step limit {} reached at s={}, u={}", opts_.max_steps, s, y[U]));
            bool clipped = false;
            if (has_target && s + h >= s_target) {
                h = s_target - s;
                clipped = true;
            }
            const StepOut out = step(s, y, h);
            ++res.steps;
            const double norm = error_norm(y, out);
            if (!std::isfinite(norm) || norm > 1.0) {
                const double shrink = std::isfinite(norm) ? std::max(0.2, 0.9 * std::pow(norm, -0.2)) : 0.2;
                h *= shrink;
                if (h < 1e-14 * std::max(1.0, std::fabs(s)))
                    fail(ErrorCode::Convergence, fmt::format("step size underflow at s={}", s));
                continue;
            }

            if (out.y[U] <= 0.0) {
                // Bisection on the fresh-step interpolant inside [s, s + h].
                double lo = 0.0, hi = h;
                double theta = h;
                State at = out.y;
                for (int it = 0; it < 60; ++it) {
                    theta = 0.5 * (lo + hi);
                    at = step(s, y, theta).y;
                    if (std::fabs(at[U]) < opts_.abs_tol)
                        break;
                    (at[U] > 0.0 ? lo : hi) = theta;
                }
                sum_eu += std::fabs(out.err[U]);
                sum_ev += std::fabs(out.err[V]);
                sum_ev_s += std::fabs(out.err[V]) * (s + theta);
                res.s.push_back(s + theta);
                res.y.push_back(at);
                res.termination = Termination::HitZero;
                finish_error(s + theta);
                return res;
            }
            if (out.y[U] > y[U])
                fail(ErrorCode::NonMonotone, fmt::format("u increased from {} to {} at s={}", y[U], out.y[U], s));

            s = clipped ? s_target : s + h;
            y = out.y;
            sum_eu += std::fabs(out.err[U]);
            sum_ev += std::fabs(out.err[V]);
            sum_ev_s += std::fabs(out.err[V]) * s;
            res.s.push_back(s);
            res.y.push_back(y);
            if (clipped) {
                res.termination = Termination::ReachedBoundary;
                finish_error(s);
                return res;
            }
            const double grow = norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(norm, -0.2), 0.2, 5.0);
            h = std::min(opts_.max_step, h * grow);
        }
    }

    void attach(RadialSolution& sol, const RunResult& res) const
    {
        sol.samples_.clear();
        sol.samples_.reserve(res.s.size());
        for (std::size_t i = 0; i < res.s.size(); ++i)
            sol.samples_.push_back(to_sample(res.s[i], res.y[i]));
        sol.termination_ = res.termination;
        sol.steps_ = res.steps;
        sol.u_error_ = res.u_error;

        if (!opts_.dense_output || opts_.dense_samples < 2 || sol.samples_.size() < 2)
            return;
        const std::vector<Sample> accepted = sol.samples_;
        const double s_lo = accepted.front().s;
        const double s_hi = accepted.back().s;
        const std::size_t n = opts_.dense_samples;
        std::vector<Sample> forced;
        forced.reserve(n);
        std::size_t idx = 0;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double s = s_lo + (s_hi - s_lo) * static_cast<double>(i) / static_cast<double>(n - 1);
            while (idx + 1 < accepted.size() && accepted[idx + 1].s <= s)
                ++idx;
            if (accepted[idx].s == s)
                continue;
            forced.push_back(to_sample(s, step(accepted[idx].s, from_sample(accepted[idx]), s - accepted[idx].s).y));
        }
        std::vector<Sample> merged;
        merged.reserve(accepted.size() + forced.size());
        std::merge(accepted.begin(), accepted.end(), forced.begin(), forced.end(), std::back_inserter(merged),
                   [](const Sample& l, const Sample& r) { return l.s < r.s; });
        sol.samples_ = std::move(merged);
    }

private:
    const Nonlinearity& nl_;
    double lambda_;
    double log_lambda_;
    SolverOptions opts_;
    bool with_primitive_;
};

namespace {

struct SeriesStart {
    double s0 = 0.0;
    State y{};
};

// u = mu + a2 r^2 + a4 r^4 with a2 = -lambda f(mu)/4, a4 = lambda^2 f f'(mu)/64.
SeriesStart series_start(const Nonlinearity& nl, double lambda, double mu, const SolverOptions& opts, bool to_unit)
{
    const double p = nl.p();
    const LogValue lf = nl.log_f(mu);
    if (lf.is_zero())
        fail(ErrorCode::Domain, fmt::format("f(mu) = 0 at mu={}; u == mu is the solution", mu));
    const double log_gamma0 = -0.5 * (std::log(p) + std::log(lambda) + (p - 1.0) * std::log(mu) + lf.log_abs);
    double s0 = log_gamma0 - opts.s_start_offset;
    if (to_unit)
        s0 = std::min(s0, -opts.s_start_offset);

    const double F0 = std::exp(std::log(lambda) + lf.log_abs + 2.0 * s0); // lambda f(mu) r^2
    const double dlf = nl.dlog_f(mu);
    SeriesStart st;
    st.s0 = s0;
    st.y[U] = mu - 0.25 * F0 + F0 * F0 * dlf / 64.0;
    st.y[V] = -0.5 * F0 + F0 * F0 * dlf / 16.0;
    st.y[A] = -st.y[V];
    st.y[M] = 0.5 * p * std::pow(mu, p - 1.0) * F0;
    st.y[W] = F0 * (0.5 * s0 - 0.25);
    return st;
}

void validate_start(const Nonlinearity& nl, double lambda, double mu)
{
    (void)nl;
    if (!(mu > 0.0) || !std::isfinite(mu))
        fail(ErrorCode::Domain, fmt::format("mu must be positive and finite, got {}", mu));
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        fail(ErrorCode::Domain, fmt::format("lambda must be positive and finite, got {}", lambda));
}

} // namespace

void validate(const SolverOptions& opts)
{
    if (!(opts.rel_tol > 0.0) || !(opts.abs_tol > 0.0))
        fail(ErrorCode::Domain, "solver tolerances must be positive");
    if (opts.max_steps < 10000)
        fail(ErrorCode::Domain, fmt::format("max_steps must be at least 10000, got {}", opts.max_steps));
    if (!(opts.max_step > 0.0) || !(opts.initial_step > 0.0))
        fail(ErrorCode::Domain, "step sizes must be positive");
    if (!std::isfinite(opts.s_start_offset) || opts.s_start_offset < 0.0)
        fail(ErrorCode::Domain, "s_start_offset must be finite and nonnegative");
}

std::string to_string(Termination t)
{
    switch (t) {
    case Termination::HitZero:
        return "HitZero";
    case Termination::ReachedBoundary:
        return "ReachedBoundary";
    case Termination::StepLimit:
        return "StepLimit";
    }
    return "unknown";
}

RadialSolution::RadialSolution(Nonlinearity nonlinearity, double lambda, double mu, SolverOptions opts)
    : nl_(std::move(nonlinearity)), lambda_(lambda), mu_(mu), opts_(opts)
{
}

Sample RadialSolution::state_at(double s) const
{
    const double slack = 1e-12 * std::max(1.0, std::fabs(s));
    if (!(s >= s_start() - slack && s <= s_end() + slack))
        fail(ErrorCode::Domain, fmt::format("state_at(s={}) outside [{}, {}]", s, s_start(), s_end()));
    s = std::clamp(s, s_start(), s_end());
    auto it = std::upper_bound(samples_.begin(), samples_.end(), s,
                               [](double x, const Sample& smp) { return x < smp.s; });
    const Sample& left = *std::prev(it);
    if (left.s == s)
        return left;
    RadialIntegrator integ(nl_, lambda_, opts_);
    return to_sample(s, integ.step(left.s, from_sample(left), s - left.s).y);
}

std::string RadialSolution::to_csv() const
{
    std::string out = "s,u,duds,A,M,W\n";
    for (const auto& smp : samples_)
        out += fmt::format("{},{},{},{},{},{}\n", fmt_real(smp.s), fmt_real(smp.u), fmt_real(smp.v), fmt_real(smp.A),
                           fmt_real(smp.M), fmt_real(smp.W));
    return out;
}

RadialSolution integrate_radial(const Nonlinearity& nl, double lambda, double mu, StopAt stop,
                                const SolverOptions& opts)
{
    validate(opts);
    validate_start(nl, lambda, mu);
    RadialSolution sol(nl, lambda, mu, opts);
    const RadialIntegrator integ(sol.nonlinearity(), lambda, opts);
    const SeriesStart st = series_start(nl, lambda, mu, opts, stop == StopAt::RadiusOne);
    const RunResult res = integ.run(st.s0, st.y, stop == StopAt::RadiusOne ? Stop::RadiusOne : Stop::FirstZero);
    integ.attach(sol, res);
    return sol;
}

RadialSolution integrate_from_state(const Nonlinearity& nl, const Sample& start, double mu_label,
                                    const SolverOptions& opts)
{
    validate(opts);
    if (!(start.u > 0.0) || !(start.v < 0.0))
        fail(ErrorCode::Domain, "start state needs u > 0 and du/ds < 0");
    RadialSolution sol(nl, 1.0, mu_label, opts);
    const RadialIntegrator integ(sol.nonlinearity(), 1.0, opts);
    const RunResult res = integ.run(start.s, from_sample(start), Stop::FirstZero);
    integ.attach(sol, res);
    return sol;
}

ShotResult shoot_first_zero(const Nonlinearity& nl, double mu, const SolverOptions& opts)
{
    RadialSolution sol = integrate_radial(nl, 1.0, mu, StopAt::FirstZero, opts);
    if (sol.termination() != Termination::HitZero)
        fail(ErrorCode::NoZero, fmt::format("no zero found for mu={}", mu));
    const double s_bar = sol.s_end();
    const double lambda = std::exp(2.0 * s_bar);
    const double slope = std::fabs(sol.samples().back().v);
    const double lambda_error = slope > 0.0 ? 2.0 * lambda * sol.u_error() / slope : 0.0;
    return {mu, s_bar, lambda, lambda_error, std::move(sol)};
}

IdentityResiduals identity_residuals(const RadialSolution& sol, std::size_t i, std::size_t j)
{
    const auto& smp = sol.samples();
    if (i >= smp.size() || j >= smp.size() || i > j)
        fail(ErrorCode::Domain, fmt::format("identity residual indices ({}, {}) invalid for {} samples", i, j,
                                            smp.size()));
    const Sample& a = smp[i];
    const Sample& b = smp[j];
    IdentityResiduals r;
    r.id0 = -a.v - a.A;
    r.id0_scale = 1.0 + std::fabs(a.A);
    const double t1 = (b.s - a.s) * a.A;
    const double t2 = b.s * (b.A - a.A);
    const double t3 = b.W - a.W;
    r.id2 = a.u - b.u - t1 - (t2 - t3);
    r.id2_scale = std::max({1.0, std::fabs(a.u), std::fabs(b.u), std::fabs(t1), std::fabs(b.s * b.A),
                            std::fabs(b.s * a.A), std::fabs(a.W), std::fabs(b.W)});
    return r;
}

std::optional<double> pohozaev_residual(const RadialSolution& sol, double s)
{
    const Nonlinearity& nl = sol.nonlinearity();
    const double mu = sol.mu();
    if (std::pow(mu, nl.p()) > kMaxExponent)
        return std::nullopt;
    const double slack = 1e-12 * std::max(1.0, std::fabs(sol.s_end()));
    if (!(s >= sol.s_start() - slack && s <= sol.s_end() + slack))
        fail(ErrorCode::Domain, fmt::format("Pohozaev check at s={} outside the solution", s));
    s = std::clamp(s, sol.s_start(), sol.s_end());

    const double lambda = sol.lambda();
    SolverOptions opts = sol.options();
    opts.dense_output = false;
    const RadialIntegrator integ(nl, lambda, opts, true);

    const Sample& first = sol.samples().front();
    const double lr2 = lambda * std::exp(2.0 * first.s);
    const double F0 = lr2 * nl.log_f(mu).value();
    State y = from_sample(first);
    y[G] = lr2 * nl.primitive(first.u);
    y[B] = 0.5 * lr2 * nl.primitive(mu) - F0 * F0 / 16.0;

    State end = y;
    if (s > first.s)
        end = integ.run(first.s, y, Stop::AtS, s).y.back();
    const double v2 = end[V] * end[V];
    const double scale = std::max({1.0, v2, std::fabs(4.0 * end[B]), std::fabs(2.0 * end[G])});
    return (v2 - 4.0 * end[B] + 2.0 * end[G]) / scale;
}

double gelfand_oracle(double mu)
{
    if (!(mu > 0.0))
        fail(ErrorCode::Domain, "gelfand_oracle needs mu > 0");
    const double b = std::expm1(0.5 * mu);
    return 8.0 * b / ((1.0 + b) * (1.0 + b));
}

} // namespace blowup
