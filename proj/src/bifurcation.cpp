#include "blowup/bifurcation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/tools/minima.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "blowup/bubble_analysis.hpp"
#include "blowup/errors.hpp"
#include "blowup/io.hpp"
#include "blowup/parallel.hpp"
#include "blowup/roots.hpp"

namespace blowup {

namespace {

const H4& h4_of(const Nonlinearity& nl)
{
    const auto* h4 = std::get_if<H4>(&nl.spec().variant);
    if (!h4)
        fail(ErrorCode::Domain, "singular solution needs an H4 nonlinearity");
    return *h4;
}

Curve make_curve(const Nonlinearity& nl, const RadialSolution& tail)
{
    std::vector<double> s, u;
    s.reserve(tail.samples().size());
    u.reserve(tail.samples().size());
    for (const auto& smp : tail.samples()) {
        if (!s.empty() && !(smp.s > s.back()))
            continue;
        s.push_back(smp.s);
        u.push_back(smp.u);
    }
    return SplicedCurve{UBeta{2.0, nl.p()}, TabulatedCurve(std::move(s), std::move(u))};
}

} // namespace

SingularSolution::SingularSolution(Nonlinearity nl, RadialSolution tail)
    : nl_(std::move(nl)), tail_(std::move(tail)), s_join_(tail_.s_start()), curve_(make_curve(nl_, tail_))
{
}

double SingularSolution::tau0() const { return h4_of(nl_).tau0; }
double SingularSolution::R_bar_star() const { return std::exp(s_bar_star()); }
double SingularSolution::lambda_star() const { return std::exp(2.0 * s_bar_star()); }

std::pair<double, double> SingularSolution::value(double s) const
{
    if (s <= s_join_) {
        const double p = nl_.p();
        const double L2 = -2.0 * s;
        return {std::pow(L2, 1.0 / p), -(2.0 / p) * std::pow(L2, 1.0 / p - 1.0)};
    }
    const Sample smp = tail_.state_at(s);
    return {smp.u, smp.v};
}

double SingularSolution::core_residual(double s) const
{
    if (!(s <= s_join_))
        fail(ErrorCode::Domain, fmt::format("core residual at s={} beyond the join {}", s, s_join_));
    const double p = nl_.p();
    const double L2 = -2.0 * s;
    const double U = std::pow(L2, 1.0 / p);
    const double U_ss = (4.0 / p) * (1.0 / p - 1.0) * std::pow(L2, 1.0 / p - 2.0);
    const LogValue lf = nl_.log_f(U);
    return -U_ss - std::exp(2.0 * s + lf.log_abs);
}

std::string SingularSolution::to_csv(double core_s_min, int core_points) const
{
    std::string out = "s,U,dUds\n";
    for (int i = 0; i < core_points; ++i) {
        const double s = core_s_min + (s_join_ - core_s_min) * i / core_points;
        const auto [U, dU] = value(s);
        out += fmt::format("{},{},{}\n", fmt_real(s), fmt_real(U), fmt_real(dU));
    }
    for (const auto& smp : tail_.samples())
        out += fmt::format("{},{},{}\n", fmt_real(smp.s), fmt_real(smp.u), fmt_real(smp.v));
    return out;
}

SingularSolution build_singular_solution(const Nonlinearity& nl, const SolverOptions& opts)
{
    const double tau0 = h4_of(nl).tau0;
    const double p = nl.p();
    Sample start;
    start.s = -0.5 * std::pow(tau0, p);
    start.u = tau0;
    start.v = -2.0 / (p * std::pow(tau0, p - 1.0));
    start.A = -start.v;
    RadialSolution tail = integrate_from_state(nl, start, std::numeric_limits<double>::infinity(), opts);
    if (tail.termination() != Termination::HitZero)
        fail(ErrorCode::NoZero, "singular solution has no zero within the step budget");
    return SingularSolution(nl, std::move(tail));
}

namespace {

DiagramRow shoot_row(const Nonlinearity& nl, double mu, const DiagramOptions& opts, const SingularSolution* singular)
{
    DiagramRow row;
    row.mu = mu;
    try {
        const ShotResult shot = shoot_first_zero(nl, mu, opts.solver);
        row.lambda = shot.lambda;
        row.lambda_error = shot.lambda_error;
        if (singular) {
            const double hi = std::min(shot.s_bar, singular->s_bar_star());
            row.Z = count_intersections(shot.solution, singular->as_curve(), shot.solution.s_start(), hi, Frame::Raw)
                        .Z();
        }
        try {
            row.bubbles = static_cast<int>(detect_bubbles(shot.solution, nullptr, opts.min_phi).size());
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoBubbles)
                throw;
            row.bubbles = 0;
        }
    } catch (const Error& e) {
        row.lambda = std::numeric_limits<double>::quiet_NaN();
        row.status = std::string(to_string(e.code()));
        row.detail = e.what();
    }
    return row;
}

} // namespace

Diagram trace_diagram(const Nonlinearity& nl, std::span<const double> mu_grid, const DiagramOptions& opts,
                      const SingularSolution* singular)
{
    if (mu_grid.empty())
        fail(ErrorCode::Domain, "empty mu grid");
    for (std::size_t i = 0; i < mu_grid.size(); ++i) {
        if (!(mu_grid[i] > 0.0) || !std::isfinite(mu_grid[i]))
            fail(ErrorCode::Domain, fmt::format("mu grid value {} must be positive", mu_grid[i]));
        if (i > 0 && !(mu_grid[i] > mu_grid[i - 1]))
            fail(ErrorCode::Domain, "mu grid must be strictly increasing");
    }
    if (!(opts.refine_dx > 0.0) || opts.max_refine_shots < 0)
        fail(ErrorCode::Domain, "refine_dx must be positive and max_refine_shots nonnegative");

    Diagram diagram;
    if (singular) {
        diagram.lambda_star = singular->lambda_star();
        diagram.R_bar_star = singular->R_bar_star();
    }
    diagram.rows = parallel_map(mu_grid.size(), opts.jobs,
                                [&](std::size_t i) { return shoot_row(nl, mu_grid[i], opts, singular); });

    if (diagram.lambda_star) {
        const double ls = *diagram.lambda_star;
        std::vector<std::pair<DiagramRow, DiagramRow>> brackets;
        for (std::size_t i = 1; i < diagram.rows.size(); ++i) {
            const DiagramRow& a = diagram.rows[i - 1];
            const DiagramRow& b = diagram.rows[i];
            if (a.ok() && b.ok() && (a.lambda > ls) != (b.lambda > ls))
                brackets.emplace_back(a, b);
        }
        auto refined = parallel_map(brackets.size(), opts.jobs, [&](std::size_t i) {
            auto [a, b] = brackets[i];
            std::vector<DiagramRow> extra;
            for (int shot = 0; shot < opts.max_refine_shots && b.mu - a.mu >= opts.refine_dx; ++shot) {
                DiagramRow mid = shoot_row(nl, 0.5 * (a.mu + b.mu), opts, singular);
                mid.refined = true;
                extra.push_back(mid);
                if (!mid.ok())
                    break;
                ((mid.lambda > ls) == (a.lambda > ls) ? a : b) = mid;
            }
            return extra;
        });
        for (auto& extra : refined)
            diagram.rows.insert(diagram.rows.end(), extra.begin(), extra.end());
        std::sort(diagram.rows.begin(), diagram.rows.end(),
                  [](const DiagramRow& l, const DiagramRow& r) { return l.mu < r.mu; });
    }
    return diagram;
}

CrossingReport count_lambda_crossings(const Diagram& diagram)
{
    if (!diagram.lambda_star)
        fail(ErrorCode::Domain, "lambda crossings need lambda*");
    const double ls = *diagram.lambda_star;
    CrossingReport rep;
    const DiagramRow* prev = nullptr;
    for (const auto& row : diagram.rows) {
        if (!row.ok() || row.lambda == ls)
            continue;
        if (prev && (prev->lambda > ls) != (row.lambda > ls)) {
            const double t = (ls - prev->lambda) / (row.lambda - prev->lambda);
            rep.mu.push_back(prev->mu + t * (row.mu - prev->mu));
        }
        prev = &row;
    }
    rep.count = static_cast<int>(rep.mu.size());
    return rep;
}

double bessel_j0_first_zero()
{
    // J0 and J1 from their ascending series; 40 terms are plenty for x < 3.
    auto series = [](double x) {
        const double q = 0.25 * x * x;
        double term0 = 1.0, j0 = 1.0;
        double term1 = 0.5 * x, j1 = term1;
        for (int k = 1; k < 40; ++k) {
            term0 *= -q / (k * k);
            term1 *= -q / (k * (k + 1.0));
            j0 += term0;
            j1 += term1;
        }
        return std::pair{j0, -j1};
    };
    RootOptions opts;
    opts.width = 1e-15;
    opts.residual_tol = 1e-14;
    return bracketed_root([&](double x) { return series(x).first; }, series, 2.0, 3.0, opts).x;
}

KaplanReport kaplan_check(const Nonlinearity& nl, const Diagram& diagram)
{
    KaplanReport rep;
    const double j = bessel_j0_first_zero();
    rep.Lambda1 = j * j;

    // log(f(t)/t) over t = e^x.
    auto log_ratio = [&](double x) {
        const LogValue lf = nl.log_f(std::exp(x));
        return lf.is_zero() ? std::numeric_limits<double>::infinity() * -1.0 : lf.log_abs - x;
    };
    const double x_lo = std::log(1e-12), x_hi = std::log(50.0);
    const int n = 2000;
    int best = 0;
    double best_val = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= n; ++i) {
        const double v = log_ratio(x_lo + (x_hi - x_lo) * i / n);
        if (v < best_val) {
            best_val = v;
            best = i;
        }
    }
    const double a = x_lo + (x_hi - x_lo) * std::max(best - 1, 0) / n;
    const double b = x_lo + (x_hi - x_lo) * std::min(best + 1, n) / n;
    const auto [x_min, v_min] = boost::math::tools::brent_find_minima(log_ratio, a, b, 50);
    const double v = std::min(v_min, best_val);
    rep.c = std::exp(v);
    rep.t_at_inf = std::exp(v_min <= best_val ? x_min : x_lo + (x_hi - x_lo) * best / n);
    rep.h2_holds = rep.c > 1e-9;

    for (const auto& row : diagram.rows)
        if (row.ok())
            rep.max_lambda = std::max(rep.max_lambda, row.lambda);
    if (rep.h2_holds) {
        rep.bound = rep.Lambda1 / rep.c;
        rep.all_below = rep.max_lambda <= rep.bound * (1.0 + 1e-9);
    }
    return rep;
}

std::string diagram_csv(const Diagram& diagram)
{
    std::string out = "mu,lambda,Z,bubbles\n";
    for (const auto& row : diagram.rows)
        out += fmt::format("{},{},{},{}\n", fmt_real(row.mu), fmt_real(row.lambda),
                           row.Z ? std::to_string(*row.Z) : std::string(), row.bubbles);
    return out;
}

std::string diagram_json(const Diagram& diagram, const CrossingReport& crossings,
                         const std::optional<KaplanReport>& kaplan)
{
    nlohmann::json j;
    j["lambda_star"] = diagram.lambda_star ? nlohmann::json(*diagram.lambda_star) : nlohmann::json();
    j["R_bar_star"] = diagram.R_bar_star ? nlohmann::json(*diagram.R_bar_star) : nlohmann::json();
    j["crossings"] = {{"count", crossings.count}, {"mu", crossings.mu}};
    if (kaplan) {
        j["kaplan"] = {{"h2_holds", kaplan->h2_holds}, {"c", kaplan->c},         {"t_at_inf", kaplan->t_at_inf},
                       {"Lambda1", kaplan->Lambda1},   {"bound", kaplan->bound}, {"max_lambda", kaplan->max_lambda},
                       {"all_below", kaplan->all_below}};
    }
    j["rows"] = nlohmann::json::array();
    for (const auto& row : diagram.rows) {
        j["rows"].push_back({{"mu", row.mu},
                             {"lambda", row.ok() ? nlohmann::json(row.lambda) : nlohmann::json()},
                             {"lambda_error", row.lambda_error},
                             {"Z", row.Z ? nlohmann::json(*row.Z) : nlohmann::json()},
                             {"bubbles", row.bubbles},
                             {"status", row.status},
                             {"detail", row.detail},
                             {"refined", row.refined}});
    }
    return j.dump(2) + "\n";
}

} // namespace blowup
