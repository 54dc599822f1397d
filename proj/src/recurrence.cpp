#include "blowup/recurrence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>

#include <fmt/format.h>

#include "blowup/errors.hpp"
#include "blowup/io.hpp"
#include "blowup/roots.hpp"

namespace blowup {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Every ratio x in (0,1) is solved as y = log(1/x). With expm1 the residual
// keeps full precision both when x -> 0 (p -> 2) and when x -> 1 (large k or
// large p).
template <class G, class GD>
double solve_log_ratio(G&& g, GD&& gd, double tol)
{
    double hi = std::log(1.0 / tol);
    while (g(hi) <= 0.0) {
        hi *= 2.0;
        if (hi > 1e6)
            fail(ErrorCode::Convergence, "could not bracket recurrence root");
    }
    double lo = tol;
    while (g(lo) >= 0.0) {
        lo *= 0.5;
        if (lo < 1e-300)
            fail(ErrorCode::Convergence, "could not bracket recurrence root near x = 1");
    }
    RootOptions opts;
    opts.width = 1e-12 * std::max(1.0, lo);
    opts.residual_tol = tol;
    return bracketed_root(g, gd, lo, hi, opts).x;
}

// Root of (2p/(2+a))(1-x) - 1 + x^p in (0,1), as y = log(1/x).
double solve_delta_ratio(double p, double a_prev, double tol)
{
    const double c = 2.0 * p / (2.0 + a_prev);
    auto g = [=](double y) { return -c * std::expm1(-y) + std::expm1(-p * y); };
    auto gd = [=](double y) {
        return std::pair{g(y), c * std::exp(-y) - p * std::exp(-p * y)};
    };
    return solve_log_ratio(g, gd, tol);
}

// Root of (2/(2+a)) log(1/x) - 1 + x in (0,1), as y = log(1/x).
double solve_hat_ratio(double a_prev, double tol)
{
    const double c = 2.0 / (2.0 + a_prev);
    auto g = [=](double y) { return c * y + std::expm1(-y); };
    auto gd = [=](double y) { return std::pair{g(y), c - std::exp(-y)}; };
    return solve_log_ratio(g, gd, tol);
}

void fill_derived(RecurrenceRow& row, double p)
{
    const double shrink = 1.0 - row.a / (2.0 * (p - 1.0));
    row.E = 2.0 * row.a * std::exp(-(p - 1.0) * row.log_delta);
    row.delta_star = shrink * row.delta;
    row.beta_star = (2.0 + row.a) * std::pow(shrink, p - 1.0);
}

} // namespace

RecurrenceTable::RecurrenceTable(double p, double tol, std::vector<RecurrenceRow> rows)
    : p_(p), tol_(tol), rows_(std::move(rows))
{
}

const RecurrenceRow& RecurrenceTable::row(int k) const
{
    if (k < 0 || k > max_k())
        fail(ErrorCode::Domain, fmt::format("recurrence row {} outside table 0..{}", k, max_k()));
    return rows_[static_cast<std::size_t>(k)];
}

std::string RecurrenceTable::to_csv() const
{
    std::string out = "k,delta,a,d,E,delta_star,beta_star\n";
    for (const auto& r : rows_) {
        out += fmt::format("{},{},{},{},{},{},{}\n", r.k, fmt_real(r.delta), fmt_real(r.a), fmt_real(r.d),
                           fmt_real(r.E), fmt_real(r.delta_star), fmt_real(r.beta_star));
    }
    return out;
}

RecurrenceTable compute_recurrence(double p, int K, double tol)
{
    if (!(p > 2.0) || !std::isfinite(p))
        fail(ErrorCode::Domain, fmt::format("recurrence needs p > 2, got {}", p));
    if (K < 1)
        fail(ErrorCode::Domain, "recurrence needs K >= 1");
    if (!(tol > 0.0 && tol <= 1e-6))
        fail(ErrorCode::Domain, fmt::format("tolerance {} outside (0, 1e-6]", tol));

    std::vector<RecurrenceRow> rows;
    rows.reserve(static_cast<std::size_t>(K) + 1);
    RecurrenceRow first;
    first.d = kNaN;
    fill_derived(first, p);
    rows.push_back(first);

    for (int k = 1; k <= K; ++k) {
        const RecurrenceRow& prev = rows.back();
        const double y = solve_delta_ratio(p, prev.a, tol);
        RecurrenceRow row;
        row.k = k;
        row.d = std::exp(-y);
        row.log_delta = prev.log_delta - y;
        row.delta = std::exp(row.log_delta);
        row.a = 2.0 - std::exp(-(p - 1.0) * y) * (2.0 + prev.a);
        if (!(row.a > 0.0 && row.a < prev.a))
            fail(ErrorCode::Convergence, fmt::format("a_{} = {} left (0, a_{})", k, row.a, k - 1));
        fill_derived(row, p);
        rows.push_back(row);
    }
    return RecurrenceTable(p, tol, std::move(rows));
}

std::shared_ptr<const RecurrenceTable> cached_recurrence(double p, int K)
{
    static std::mutex mutex;
    static std::map<std::pair<double, int>, std::shared_ptr<const RecurrenceTable>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[{p, K}];
    if (!slot)
        slot = std::make_shared<const RecurrenceTable>(compute_recurrence(p, K));
    return slot;
}

double beta_k(const RecurrenceTable& table, int k, double delta)
{
    const RecurrenceRow& row = table.row(k);
    const RecurrenceRow& next = table.row(k + 1);
    const double slack = 10.0 * table.tol() * row.delta;
    if (!(delta >= next.delta - slack && delta <= row.delta + slack))
        fail(ErrorCode::Bracket,
             fmt::format("delta={} outside [delta_{}, delta_{}] = [{}, {}]", delta, k + 1, k, next.delta, row.delta));
    const double p = table.p();
    const double x = delta / row.delta;
    return 2.0 * (2.0 + row.a) * std::pow(x, p) / (2.0 + row.a - 2.0 * p * (1.0 - x));
}

std::vector<HatRow> compute_hat_recurrence(int K, double tol)
{
    if (K < 1)
        fail(ErrorCode::Domain, "hat recurrence needs K >= 1");
    std::vector<HatRow> rows;
    rows.reserve(static_cast<std::size_t>(K) + 1);
    HatRow first;
    first.beta_hat_star = 4.0 / std::exp(1.0);
    rows.push_back(first);
    for (int k = 1; k <= K; ++k) {
        const HatRow& prev = rows.back();
        const double y = solve_hat_ratio(prev.a_hat, tol);
        HatRow row;
        row.k = k;
        row.c_hat = prev.c_hat * std::exp(-y);
        row.a_hat = 2.0 - std::exp(-y) * (2.0 + prev.a_hat);
        row.beta_hat_star = (2.0 + row.a_hat) * std::exp(-0.5 * row.a_hat);
        rows.push_back(row);
    }
    return rows;
}

std::string hat_table_csv(const std::vector<HatRow>& rows)
{
    std::string out = "k,c_hat,a_hat,beta_hat_star\n";
    for (const auto& r : rows)
        out += fmt::format("{},{},{},{}\n", r.k, fmt_real(r.c_hat), fmt_real(r.a_hat), fmt_real(r.beta_hat_star));
    return out;
}

LimitReport limit_convergence_report(int k, std::span<const double> p_grid)
{
    if (k < 1)
        fail(ErrorCode::Domain, "limit report needs k >= 1");
    LimitReport report;
    report.k = k;
    const auto hat = compute_hat_recurrence(k);
    report.a_hat = hat.back().a_hat;
    report.c_hat = hat.back().c_hat;

    for (double p : p_grid) {
        const RecurrenceTable table = compute_recurrence(p, k);
        const RecurrenceRow& row = table.row(k);
        report.rows.push_back({p, row.a, std::exp((p - 1.0) * row.log_delta), row.d});
    }

    // Trends are judged along p sorted ascending, whatever the input order.
    std::vector<LimitRow> sorted = report.rows;
    std::sort(sorted.begin(), sorted.end(), [](const auto& l, const auto& r) { return l.p < r.p; });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (std::fabs(sorted[i].a_k - report.a_hat) >= std::fabs(sorted[i - 1].a_k - report.a_hat))
            report.hat_gap_shrinks = false;
        if (2.0 - sorted[i - 1].a_k >= 2.0 - sorted[i].a_k)
            report.two_gap_shrinks = false;
    }
    return report;
}

} // namespace blowup
