#include "blowup/bubble_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "blowup/errors.hpp"
#include "blowup/io.hpp"

namespace blowup {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// A second peak closer than this (in log phi) to the minimum separating it
// from its neighbour is integration noise on one peak, not a new bubble.
constexpr double kMinProminence = 1e-3;

double log_phi_at(const RadialSolution& sol, double s, double u)
{
    const double p = sol.p();
    if (!(u > 0.0)) {
        if (p > 1.0)
            return kNegInf;
        if (p < 1.0)
            return std::numeric_limits<double>::infinity();
    }
    const LogValue lf = sol.nonlinearity().log_f(std::max(u, 0.0));
    if (lf.is_zero())
        return kNegInf;
    const double pow_term = p == 1.0 ? 0.0 : (p - 1.0) * std::log(u);
    return std::log(p) + std::log(sol.lambda()) + 2.0 * s + pow_term + lf.log_abs;
}

double top_beta_target(double p) { return p >= 2.0 ? 2.0 : 4.0 / p; }

nlohmann::json comparison_json(const std::optional<Comparison>& c)
{
    if (!c)
        return nullptr;
    return {{"value", c->value}, {"target", c->target}, {"rel_gap", c->rel_gap}};
}

} // namespace

PhiPsiSample phi_psi_at(const RadialSolution& sol, const Sample& smp)
{
    PhiPsiSample out;
    out.s = smp.s;
    out.log_phi = log_phi_at(sol, smp.s, smp.u);
    out.phi = std::exp(out.log_phi);
    const double p = sol.p();
    const double upow = smp.u > 0.0 ? std::pow(smp.u, p - 1.0) : (p == 1.0 ? 1.0 : 0.0);
    out.psi = p * upow * smp.A;
    return out;
}

std::vector<PhiPsiSample> compute_phi_psi(const RadialSolution& sol)
{
    std::vector<PhiPsiSample> out;
    out.reserve(sol.samples().size());
    for (const auto& smp : sol.samples())
        out.push_back(phi_psi_at(sol, smp));
    return out;
}

std::string phi_psi_csv(const std::vector<PhiPsiSample>& trace)
{
    std::string out = "s,phi,psi\n";
    for (const auto& t : trace)
        out += fmt::format("{},{},{}\n", fmt_real(t.s), fmt_real(t.phi), fmt_real(t.psi));
    return out;
}

Comparison compare(double value, double target)
{
    return {value, target, std::fabs(value - target) / std::fabs(target)};
}

std::vector<BubbleReport> detect_bubbles(const RadialSolution& sol, const RecurrenceTable* table, double min_phi)
{
    if (!(min_phi > 0.0))
        fail(ErrorCode::Domain, "min_phi must be positive");
    const auto& smp = sol.samples();
    const auto trace = compute_phi_psi(sol);
    const std::size_t n = trace.size();
    const double log_min = std::log(min_phi);

    double max_log = kNegInf;
    for (const auto& t : trace)
        max_log = std::max(max_log, t.log_phi);
    if (!(max_log >= log_min))
        fail(ErrorCode::NoBubbles, fmt::format("max phi = {} below min_phi = {}", std::exp(max_log), min_phi));

    std::vector<std::size_t> peaks;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double l = trace[i].log_phi;
        if (l > trace[i - 1].log_phi && l >= trace[i + 1].log_phi && l >= log_min)
            peaks.push_back(i);
    }

    // Merge peaks that are not separated by a real dip.
    std::vector<std::size_t> kept;
    for (std::size_t idx : peaks) {
        if (!kept.empty()) {
            const std::size_t prev = kept.back();
            double dip = trace[prev].log_phi;
            for (std::size_t j = prev; j <= idx; ++j)
                dip = std::min(dip, trace[j].log_phi);
            if (std::min(trace[prev].log_phi, trace[idx].log_phi) - dip < kMinProminence) {
                if (trace[idx].log_phi > trace[prev].log_phi)
                    kept.back() = idx;
                continue;
            }
        }
        kept.push_back(idx);
    }
    if (kept.empty())
        fail(ErrorCode::NoBubbles, "phi has no interior maximum above min_phi");

    // Basin edges: the phi minimum between consecutive peaks.
    std::vector<std::size_t> edges{0};
    for (std::size_t b = 0; b + 1 < kept.size(); ++b) {
        std::size_t arg = kept[b];
        for (std::size_t j = kept[b]; j <= kept[b + 1]; ++j)
            if (trace[j].log_phi < trace[arg].log_phi)
                arg = j;
        edges.push_back(arg);
    }
    edges.push_back(n - 1);

    const double p = sol.p();
    const double mu = sol.mu();
    const double mu_pow = std::pow(mu, p);
    std::vector<BubbleReport> out;
    for (std::size_t b = 0; b < kept.size(); ++b) {
        const std::size_t i = kept[b];
        // Parabola through three neighbouring samples, falling back to the
        // sample itself when the vertex is not an improvement.
        const double x0 = smp[i - 1].s, x1 = smp[i].s, x2 = smp[i + 1].s;
        const double y0 = trace[i - 1].log_phi, y1 = trace[i].log_phi, y2 = trace[i + 1].log_phi;
        const double d01 = (y1 - y0) / (x1 - x0);
        const double d12 = (y2 - y1) / (x2 - x1);
        const double curv = (d12 - d01) / (x2 - x0);
        Sample at = smp[i];
        PhiPsiSample pp = trace[i];
        if (curv < 0.0) {
            const double vertex = 0.5 * (x0 + x1) - d01 / (2.0 * curv);
            if (vertex > x0 && vertex < x2) {
                const Sample cand = sol.state_at(vertex);
                const PhiPsiSample cpp = phi_psi_at(sol, cand);
                if (cpp.log_phi >= pp.log_phi) {
                    at = cand;
                    pp = cpp;
                }
            }
        }

        BubbleReport r;
        r.k = static_cast<int>(b);
        r.s = at.s;
        r.disc_s = sol.disc_log_radius(at.s);
        r.u = at.u;
        r.ratio = at.u / mu;
        r.phi = pp.phi;
        r.psi = pp.psi;
        const Sample& lo = smp[edges[b]];
        const Sample& hi = smp[edges[b + 1]];
        r.basin_lo = lo.s;
        r.basin_hi = hi.s;
        // The first basin reaches down to r = 0, whose share A, M already hold.
        const double M_lo = edges[b] == 0 ? 0.0 : lo.M;
        const double A_lo = edges[b] == 0 ? 0.0 : lo.A;
        r.energy_pM = hi.M - M_lo;
        r.energy_E = p * std::pow(mu, p - 1.0) * (hi.A - A_lo);
        r.loc_stat = -r.disc_s / mu_pow;

        if (table && r.k <= table->max_k()) {
            const RecurrenceRow& row = table->row(r.k);
            r.ratio_vs_delta = compare(r.ratio, row.delta);
            r.phi_vs_target = compare(r.phi, 0.5 * row.a * row.a);
            r.psi_vs_target = compare(r.psi, 2.0);
            r.energy_pM_vs_target = compare(r.energy_pM, 2.0 * row.a);
            r.energy_E_vs_target = compare(r.energy_E, row.E);
            r.loc_vs_target = compare(r.loc_stat, 0.5 * std::exp(p * row.log_delta));
        }
        out.push_back(r);
    }
    return out;
}

std::vector<OscillationEntry> oscillation_report(const RadialSolution& sol,
                                                 const std::vector<BubbleReport>& bubbles,
                                                 const RecurrenceTable* table)
{
    const double p = sol.p();
    const double mu = sol.mu();
    const auto& smp = sol.samples();
    std::vector<OscillationEntry> out;
    for (std::size_t b = 0; b < bubbles.size(); ++b) {
        const BubbleReport& br = bubbles[b];
        OscillationEntry e;
        e.k = br.k;
        const double log_inv_r = -br.disc_s;
        const double top = log_inv_r > 0.0 ? std::pow(br.u, p) / log_inv_r : std::numeric_limits<double>::quiet_NaN();
        e.top_beta = compare(top, top_beta_target(p));

        if (table && b + 1 < bubbles.size() && br.k <= table->max_k()) {
            const RecurrenceRow& row = table->row(br.k);
            const double level = row.delta_star * mu;
            // u is monotone, so the crossing is unique.
            auto it = std::find_if(smp.begin(), smp.end(), [&](const Sample& x) { return x.u <= level; });
            if (it != smp.begin() && it != smp.end()) {
                double lo = std::prev(it)->s, hi = it->s;
                for (int i = 0; i < 200 && hi - lo > 1e-12 * std::max(1.0, std::fabs(lo)); ++i) {
                    const double mid = 0.5 * (lo + hi);
                    (sol.state_at(mid).u > level ? lo : hi) = mid;
                }
                const double s = 0.5 * (lo + hi);
                const double li = -sol.disc_log_radius(s);
                if (li > 0.0) {
                    e.valley_s = s;
                    e.valley_beta = compare(std::pow(level, p) / li, row.beta_star);
                }
            }
        }
        out.push_back(e);
    }
    return out;
}

IntersectionReport count_intersections(const RadialSolution& sol, const Curve& curve, double s_lo, double s_hi,
                                       Frame frame)
{
    if (!(s_lo <= s_hi))
        fail(ErrorCode::Domain, fmt::format("intersection interval [{}, {}] is empty", s_lo, s_hi));
    IntersectionReport rep;
    rep.curve = curve_id(curve);
    rep.frame = frame;
    rep.s_lo = std::max(s_lo, sol.s_start());
    rep.s_hi = std::min(s_hi, sol.s_end());

    auto curve_s = [&](double s) { return frame == Frame::Disc ? sol.disc_log_radius(s) : s; };
    auto diff_at = [&](double s, double u) -> std::optional<double> {
        const double cs = curve_s(s);
        if (!curve_defined(curve, cs))
            return std::nullopt;
        return u - eval_curve(curve, cs);
    };

    const double abs_tol = sol.options().abs_tol;
    // The last defined point whose difference carries a sign.
    bool have_last = false;
    double last_s = 0.0, last_d = 0.0;
    // A run of points with |diff| < abs_tol that contains no sign change is a tangency.
    bool touching = false;
    std::size_t zeros_at_touch = 0;
    double touch_s = 0.0, touch_min = 0.0;
    bool touch_at_edge = false;
    auto close_touch = [&](bool at_edge) {
        if (touching && !at_edge && !touch_at_edge && rep.zeros.size() == zeros_at_touch)
            rep.tangencies.push_back(touch_s);
        touching = false;
    };

    for (const auto& smp : sol.samples()) {
        if (smp.s < rep.s_lo || smp.s > rep.s_hi)
            continue;
        const auto d = diff_at(smp.s, smp.u);
        if (!d) {
            have_last = false;
            close_touch(true);
            continue;
        }
        // Differences below abs_tol carry no sign: at r = 1 in the disc
        // frame both u and the curve vanish.
        const bool small = std::fabs(*d) < abs_tol;
        if (have_last && !small && (last_d > 0.0) != (*d > 0.0)) {
            double lo = last_s, hi = smp.s;
            const bool lo_positive = last_d > 0.0;
            while (hi - lo > 1e-10) {
                const double mid = 0.5 * (lo + hi);
                const auto dm = diff_at(mid, sol.state_at(mid).u);
                if (!dm)
                    break;
                ((*dm > 0.0) == lo_positive ? lo : hi) = mid;
            }
            rep.zeros.push_back(0.5 * (lo + hi));
        }
        if (small) {
            if (!touching) {
                touching = true;
                touch_at_edge = !have_last;
                zeros_at_touch = rep.zeros.size();
                touch_min = std::numeric_limits<double>::infinity();
            }
            if (std::fabs(*d) < touch_min) {
                touch_min = std::fabs(*d);
                touch_s = smp.s;
            }
        } else {
            close_touch(false);
        }
        if (!small) {
            have_last = true;
            last_s = smp.s;
            last_d = *d;
        }
    }
    close_touch(true);
    return rep;
}

std::string analysis_json(const AnalysisReport& report)
{
    nlohmann::json j;
    j["mu"] = report.mu;
    j["lambda"] = report.lambda;
    j["p"] = report.p;
    j["bubbles"] = nlohmann::json::array();
    for (const auto& b : report.bubbles) {
        j["bubbles"].push_back({{"k", b.k},
                                {"s", b.s},
                                {"disc_s", b.disc_s},
                                {"u", b.u},
                                {"ratio", b.ratio},
                                {"phi", b.phi},
                                {"psi", b.psi},
                                {"energy_pM", b.energy_pM},
                                {"energy_E", b.energy_E},
                                {"loc_stat", b.loc_stat},
                                {"basin", {b.basin_lo, b.basin_hi}},
                                {"ratio_vs_delta", comparison_json(b.ratio_vs_delta)},
                                {"phi_vs_target", comparison_json(b.phi_vs_target)},
                                {"psi_vs_target", comparison_json(b.psi_vs_target)},
                                {"energy_pM_vs_target", comparison_json(b.energy_pM_vs_target)},
                                {"energy_E_vs_target", comparison_json(b.energy_E_vs_target)},
                                {"loc_vs_target", comparison_json(b.loc_vs_target)}});
    }
    j["oscillation"] = nlohmann::json::array();
    for (const auto& o : report.oscillation) {
        j["oscillation"].push_back({{"k", o.k},
                                    {"top_beta", comparison_json(o.top_beta)},
                                    {"valley_beta", comparison_json(o.valley_beta)},
                                    {"valley_s", o.valley_s ? nlohmann::json(*o.valley_s) : nlohmann::json()}});
    }
    j["intersections"] = nlohmann::json::array();
    for (const auto& i : report.intersections) {
        j["intersections"].push_back({{"curve", i.curve},
                                      {"frame", i.frame == Frame::Disc ? "disc" : "raw"},
                                      {"interval", {i.s_lo, i.s_hi}},
                                      {"Z", i.Z()},
                                      {"zeros", i.zeros},
                                      {"tangencies", i.tangencies}});
    }
    return j.dump(2) + "\n";
}

} // namespace blowup
