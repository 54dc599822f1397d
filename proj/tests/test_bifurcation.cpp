#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/special_functions/bessel.hpp>
#include <doctest.h>

#include "blowup/bifurcation.hpp"
#include "blowup/errors.hpp"

using namespace blowup;

namespace {

const Nonlinearity gelfand({1.0, UnitH{}, {}});
const Nonlinearity h4_3({3.0, H4{1.0}, {}});

const SingularSolution& singular_h4()
{
    static const SingularSolution sg = build_singular_solution(h4_3);
    return sg;
}

std::vector<double> uniform(double lo, double hi, int n)
{
    std::vector<double> g;
    for (int i = 0; i < n; ++i)
        g.push_back(lo + (hi - lo) * i / (n - 1));
    return g;
}

} // namespace

TEST_SUITE("bifurcation")
{
    TEST_CASE("singular solution core is exact")
    {
        const SingularSolution& sg = singular_h4();
        CHECK(sg.s_join() == doctest::Approx(-0.5).epsilon(1e-15));
        for (double s = std::log(1e-8); s < sg.s_join(); s += 0.37) {
            const auto [U, dU] = sg.value(s);
            CHECK(U == doctest::Approx(std::cbrt(-2.0 * s)).epsilon(1e-14));
            CHECK(std::fabs(sg.core_residual(s)) < 1e-10);
        }
        const auto below = sg.value(sg.s_join() - 1e-9);
        const auto above = sg.value(sg.s_join() + 1e-9);
        CHECK(std::fabs(below.first - above.first) < 1e-8);
        CHECK(std::fabs(below.second - above.second) < 1e-7);
        CHECK(sg.R_bar_star() == doctest::Approx(1.258665423).epsilon(1e-8));
        CHECK(sg.lambda_star() == doctest::Approx(sg.R_bar_star() * sg.R_bar_star()).epsilon(1e-14));
        CHECK(eval_curve(sg.as_curve(), -3.0) == doctest::Approx(std::cbrt(6.0)).epsilon(1e-14));
    }

    TEST_CASE("critical parameter is stable under tolerance")
    {
        SolverOptions loose;
        loose.rel_tol = 1e-8;
        loose.abs_tol = 1e-10;
        const SingularSolution coarse = build_singular_solution(h4_3, loose);
        CHECK(std::fabs(coarse.lambda_star() / singular_h4().lambda_star() - 1.0) < 1e-7);
        CHECK_THROWS_AS(build_singular_solution(gelfand), Error);
    }

    TEST_CASE("crossing counter on a synthetic diagram")
    {
        Diagram d;
        d.lambda_star = 1.0;
        const double lam[] = {0.5, 1.5, 0.5, 1.5, 0.5};
        for (int i = 0; i < 5; ++i) {
            DiagramRow r;
            r.mu = i;
            r.lambda = lam[i];
            d.rows.push_back(r);
        }
        const CrossingReport cr = count_lambda_crossings(d);
        CHECK(cr.count == 4);
        REQUIRE(cr.mu.size() == 4);
        CHECK(cr.mu[0] == doctest::Approx(0.5));
        CHECK(cr.mu[3] == doctest::Approx(3.5));

        d.rows[2].status = "Convergence";
        CHECK(count_lambda_crossings(d).count == 2);
    }

    TEST_CASE("H4 diagram oscillates around the singular value")
    {
        const SingularSolution& sg = singular_h4();
        const auto grid = uniform(2.0, 6.0, 21);
        DiagramOptions o;
        o.jobs = 2;
        const Diagram d = trace_diagram(h4_3, grid, o, &sg);
        REQUIRE(d.lambda_star.has_value());
        int prevZ = 0;
        for (const auto& r : d.rows) {
            CAPTURE(r.mu);
            REQUIRE(r.ok());
            REQUIRE(r.Z.has_value());
            CHECK(*r.Z >= prevZ);
            prevZ = *r.Z;
            CHECK(r.lambda > *d.lambda_star / 4.0);
            CHECK(r.lambda < 4.0 * *d.lambda_star);
        }
        CHECK(prevZ >= 3);
        const CrossingReport cr = count_lambda_crossings(d);
        CHECK(cr.count >= 2);
        CHECK(cr.mu[0] == doctest::Approx(3.17355).epsilon(1e-3));
        for (std::size_t i = 1; i < d.rows.size(); ++i)
            CHECK(d.rows[i].mu > d.rows[i - 1].mu);

        DiagramOptions serial = o;
        serial.jobs = 1;
        CHECK(diagram_csv(trace_diagram(h4_3, grid, serial, &sg)) == diagram_csv(d));
    }

    TEST_CASE("Gelfand diagram without a singular solution")
    {
        const auto grid = uniform(0.5, 4.0, 8);
        const Diagram d = trace_diagram(gelfand, grid);
        CHECK_FALSE(d.lambda_star.has_value());
        for (const auto& r : d.rows) {
            CHECK_FALSE(r.Z.has_value());
            CHECK(r.lambda == doctest::Approx(gelfand_oracle(r.mu)).epsilon(1e-8));
        }
        const std::string csv = diagram_csv(d);
        CHECK(csv.rfind("mu,lambda,Z,bubbles\n", 0) == 0);
        CHECK(csv.find(",,") != std::string::npos);

        const KaplanReport k = kaplan_check(gelfand, d);
        CHECK(k.h2_holds);
        CHECK(k.c == doctest::Approx(std::numbers::e).epsilon(1e-9));
        CHECK(k.t_at_inf == doctest::Approx(1.0).epsilon(1e-4));
        CHECK(k.all_below);
        CHECK(k.max_lambda <= 2.0 + 1e-9);
    }

    TEST_CASE("lower bound fails for a vanishing weight")
    {
        const Nonlinearity nl({2.0, PowerExp{2.0, 0.0, 1.0}, 0.0});
        Diagram d;
        DiagramRow r;
        r.mu = 1.0;
        r.lambda = 1.0;
        d.rows.push_back(r);
        const KaplanReport k = kaplan_check(nl, d);
        CHECK_FALSE(k.h2_holds);
    }

    TEST_CASE("first Bessel zero")
    {
        CHECK(bessel_j0_first_zero() == doctest::Approx(boost::math::cyl_bessel_j_zero(0.0, 1)).epsilon(1e-13));
    }
}
