#include <cmath>
#include <sstream>
#include <string>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "blowup/bubble_analysis.hpp"
#include "blowup/errors.hpp"

using namespace blowup;

namespace {

const Nonlinearity gelfand({1.0, UnitH{}, {}});
const Nonlinearity h4_3({3.0, H4{1.0}, {}});

// Exact unit-disc solution: u = mu - 2 log(1 + c r^2), c = e^{mu/2} - 1, so
// phi = lambda r^2 e^u = 8 c r^2 / (1 + c r^2)^2 peaks at 2 where c r^2 = 1.
struct GelfandExact {
    double mu, c, lambda;
    explicit GelfandExact(double m) : mu(m), c(std::exp(m / 2.0) - 1.0), lambda(8.0 * c * std::exp(-m)) {}
    double u(double s) const { return mu - 2.0 * std::log1p(c * std::exp(2.0 * s)); }
};

} // namespace

TEST_SUITE("bubble_analysis")
{
    TEST_CASE("phi and psi follow the closed form")
    {
        const GelfandExact ex(4.0);
        const RadialSolution sol = integrate_radial(gelfand, ex.lambda, ex.mu, StopAt::RadiusOne);
        for (const auto& smp : sol.samples()) {
            const double x = ex.c * std::exp(2.0 * smp.s);
            const PhiPsiSample pp = phi_psi_at(sol, smp);
            CHECK(pp.phi == doctest::Approx(8.0 * x / ((1.0 + x) * (1.0 + x))).epsilon(1e-7));
            CHECK(pp.psi == doctest::Approx(4.0 * x / (1.0 + x)).epsilon(1e-7));
            CHECK(pp.log_phi == doctest::Approx(std::log(pp.phi)).epsilon(1e-12));
        }
        const std::string csv = phi_psi_csv(compute_phi_psi(sol));
        CHECK(csv.rfind("s,phi,psi\n", 0) == 0);
    }

    TEST_CASE("single Liouville bubble")
    {
        const GelfandExact ex(4.0);
        const RadialSolution sol = integrate_radial(gelfand, ex.lambda, ex.mu, StopAt::RadiusOne);
        const auto bubbles = detect_bubbles(sol);
        REQUIRE(bubbles.size() == 1);
        const BubbleReport& b = bubbles[0];
        CHECK(b.phi == doctest::Approx(2.0).epsilon(1e-8));
        CHECK(b.s == doctest::Approx(-0.5 * std::log(ex.c)).epsilon(1e-5));
        CHECK(b.u == doctest::Approx(ex.u(b.s)).epsilon(1e-8));
        CHECK(b.psi == doctest::Approx(2.0).epsilon(1e-7));
        CHECK(b.energy_pM == doctest::Approx(4.0 * ex.c / (1.0 + ex.c)).epsilon(1e-7));
        CHECK_FALSE(b.phi_vs_target.has_value());

        const auto osc = oscillation_report(sol, bubbles, nullptr);
        REQUIRE(osc.size() == 1);
        CHECK(osc[0].top_beta.target == 4.0);
        CHECK(osc[0].top_beta.value == doctest::Approx(b.u / -b.disc_s).epsilon(1e-12));
        CHECK_FALSE(osc[0].valley_beta.has_value());
    }

    TEST_CASE("threshold above every peak")
    {
        const GelfandExact ex(2.0);
        const RadialSolution sol = integrate_radial(gelfand, ex.lambda, ex.mu, StopAt::RadiusOne);
        try {
            detect_bubbles(sol, nullptr, 5.0);
            FAIL("expected NoBubbles");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::NoBubbles);
        }
    }

    TEST_CASE("bubble tower of an H4 nonlinearity")
    {
        const auto table = cached_recurrence(3.0);
        const ShotResult shot = shoot_first_zero(h4_3, 6.0);
        const auto bubbles = detect_bubbles(shot.solution, table.get());
        REQUIRE(bubbles.size() >= 2);
        CHECK(bubbles[0].phi >= 1.6);
        CHECK(bubbles[0].phi <= 2.05);
        CHECK(bubbles[0].ratio == doctest::Approx(1.0).epsilon(0.05));
        CHECK(bubbles[1].ratio_vs_delta->rel_gap < 0.2);
        CHECK(bubbles[1].phi_vs_target->rel_gap < 0.3);
        CHECK(bubbles[1].phi_vs_target->target == doctest::Approx(1.0717968).epsilon(1e-7));
        for (std::size_t k = 1; k < bubbles.size(); ++k) {
            CHECK(bubbles[k].s > bubbles[k - 1].s);
            CHECK(bubbles[k].k == static_cast<int>(k));
            CHECK(bubbles[k].basin_lo >= bubbles[k - 1].basin_hi - 1e-12);
        }
        const auto osc = oscillation_report(shot.solution, bubbles, table.get());
        CHECK(osc[0].top_beta.target == 2.0);
        REQUIRE(osc[0].valley_beta.has_value());
        CHECK(std::fabs(shot.solution.state_at(*osc[0].valley_s).u - table->row(0).delta_star * 6.0) < 1e-9);

        const ShotResult lower = shoot_first_zero(h4_3, 4.0);
        const double gap4 = std::fabs(detect_bubbles(lower.solution)[0].phi - 2.0);
        CHECK(std::fabs(bubbles[0].phi - 2.0) < gap4);
    }

    TEST_CASE("intersections with a level curve")
    {
        const GelfandExact ex(4.0);
        const RadialSolution sol = integrate_radial(gelfand, ex.lambda, ex.mu, StopAt::RadiusOne);
        std::vector<double> s, v;
        for (int i = 0; i <= 40; ++i) {
            s.push_back(-8.0 + 0.2 * i);
            v.push_back(2.0);
        }
        const TabulatedCurve level(s, v);
        const IntersectionReport rep = count_intersections(sol, level, sol.s_start(), sol.s_end(), Frame::Raw);
        REQUIRE(rep.Z() == 1);
        CHECK(rep.zeros[0] == doctest::Approx(0.5 * std::log((std::exp(1.0) - 1.0) / ex.c)).epsilon(1e-9));
        CHECK(rep.tangencies.empty());
    }

    TEST_CASE("intersections with the singular envelopes")
    {
        const ShotResult shot = shoot_first_zero(h4_3, 6.0);
        const auto& sol = shot.solution;
        const IntersectionReport u2 = count_intersections(sol, UBeta{2.0, 3.0}, sol.s_start(), sol.s_end());
        const IntersectionReport u15 = count_intersections(sol, UBeta{1.5, 3.0}, sol.s_start(), sol.s_end());
        CHECK(u2.Z() == 4);
        CHECK(u15.Z() == 3);
        for (std::size_t i = 1; i < u2.zeros.size(); ++i)
            CHECK(u2.zeros[i] > u2.zeros[i - 1]);
        for (double z : u2.zeros) {
            const double d = shot.solution.state_at(z).u - eval_curve(UBeta{2.0, 3.0}, sol.disc_log_radius(z));
            CHECK(std::fabs(d) < 1e-8);
        }
        const IntersectionReport raw = count_intersections(sol, UBeta{2.0, 3.0}, sol.s_start(), sol.s_end(), Frame::Raw);
        CHECK(raw.Z() == 5);
    }

    TEST_CASE("analysis JSON")
    {
        const ShotResult shot = shoot_first_zero(h4_3, 5.0);
        const auto table = cached_recurrence(3.0);
        AnalysisReport rep;
        rep.mu = 5.0;
        rep.lambda = shot.lambda;
        rep.p = 3.0;
        rep.bubbles = detect_bubbles(shot.solution, table.get());
        rep.oscillation = oscillation_report(shot.solution, rep.bubbles, table.get());
        rep.intersections.push_back(
            count_intersections(shot.solution, UBeta{2.0, 3.0}, shot.solution.s_start(), shot.solution.s_end()));
        const auto j = nlohmann::json::parse(analysis_json(rep));
        CHECK(j["mu"] == 5.0);
        CHECK(j["bubbles"].size() == rep.bubbles.size());
        CHECK(j["intersections"][0]["Z"] == rep.intersections[0].Z());
    }

    TEST_CASE("comparison")
    {
        const Comparison c = compare(1.1, 1.0);
        CHECK(c.rel_gap == doctest::Approx(0.1));
    }
}
