#include <cmath>
#include <numbers>
#include <vector>

#include <doctest.h>

#include "blowup/errors.hpp"
#include "blowup/log_value.hpp"
#include "blowup/nonlinearity.hpp"

using namespace blowup;

namespace {

Nonlinearity unit(double p) { return Nonlinearity({p, UnitH{}, {}}); }
Nonlinearity h4(double p, double tau0 = 1.0) { return Nonlinearity({p, H4{tau0}, {}}); }

// int_0^1 e^{s^2} ds = sum 1/(k! (2k+1)).
double erfi_integral_oracle()
{
    double sum = 0.0, fact = 1.0;
    for (int k = 0; k < 30; ++k) {
        if (k > 0)
            fact *= k;
        sum += 1.0 / (fact * (2 * k + 1));
    }
    return sum;
}

} // namespace

TEST_SUITE("nonlinearity")
{
    TEST_CASE("log f closed forms")
    {
        CHECK(unit(1.0).log_f(0.0).log_abs == doctest::Approx(0.0));
        CHECK(unit(1.0).log_f(0.0).sign == 1);
        const double expect_h4 = std::log(8.0 / 9.0) - 5.0 * std::log(2.0) + 8.0;
        CHECK(h4(3.0).log_f(2.0).log_abs == doctest::Approx(expect_h4).epsilon(1e-14));
        CHECK(expect_h4 == doctest::Approx(4.416481).epsilon(1e-6));
        const Nonlinearity pe({2.0, PowerExp{1.0, 0.0, 7.0}, {}});
        CHECK(pe.log_f(3.0).log_abs == doctest::Approx(std::log(3.0) + 9.0).epsilon(1e-14));
    }

    TEST_CASE("log f stays finite far beyond double range")
    {
        const Nonlinearity nl = unit(2.0);
        const LogValue v = nl.log_f(1e4);
        CHECK(v.log_abs == doctest::Approx(1e8));
        CHECK(std::isinf(v.value()));
    }

    TEST_CASE("log f prime")
    {
        CHECK(unit(1.0).log_f_prime(1.0).log_abs == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(unit(2.0).log_f_prime(2.0).log_abs == doctest::Approx(std::log(4.0) + 4.0).epsilon(1e-14));

        const Nonlinearity nl = h4(3.0);
        const double t = 2.0, h = 1e-6;
        const double fd = (nl.log_f(t + h).log_abs - nl.log_f(t - h).log_abs) / (2.0 * h);
        const double analytic = std::exp(nl.log_f_prime(t).log_abs - nl.log_f(t).log_abs);
        CHECK(std::fabs(analytic / fd - 1.0) < 1e-6);
    }

    TEST_CASE("log f prime at zero")
    {
        CHECK(unit(2.0).log_f_prime(0.0).is_zero());
        CHECK(unit(1.0).log_f_prime(0.0).log_abs == doctest::Approx(0.0));
        CHECK(h4(3.0).log_f_prime(0.0).is_zero());
        CHECK_THROWS_AS(unit(0.5).log_f_prime(0.0), Error);
    }

    TEST_CASE("primitive")
    {
        CHECK(unit(1.0).primitive(1.0) == doctest::Approx(std::numbers::e - 1.0).epsilon(1e-12));
        CHECK(unit(3.0).primitive(0.0) == 0.0);
        CHECK(h4(3.0).primitive(0.0) == 0.0);
        CHECK(unit(2.0).primitive(1.0) == doctest::Approx(erfi_integral_oracle()).epsilon(1e-11));
        CHECK(erfi_integral_oracle() == doctest::Approx(1.4626517).epsilon(1e-7));

        const Nonlinearity nl = h4(3.0);
        double prev = 0.0;
        for (double t = 0.25; t <= 4.0; t += 0.25) {
            const double F = nl.primitive(t);
            CHECK(F > prev);
            prev = F;
        }
    }

    TEST_CASE("primitive range gate")
    {
        try {
            unit(3.0).primitive(9.0);
            FAIL("expected a range error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::Range);
        }
    }

    TEST_CASE("growth ratio report")
    {
        const std::vector<double> grid{10.0, 20.0, 50.0};
        const H1Report u = unit(3.0).check_h1(grid);
        for (double r : u.ratio)
            CHECK(r == 0.0);

        const Nonlinearity pe({2.0, PowerExp{1.0, 0.0, 1.0}, {}});
        const std::vector<double> t100{100.0};
        CHECK(pe.check_h1(t100).ratio[0] == doctest::Approx(1e-4).epsilon(1e-12));

        // h = c t^{1-2p}: h'/(t^{p-1} h) = (1-2p)/t^p.
        const H1Report r = h4(3.0).check_h1(grid);
        CHECK(r.ratio[0] == doctest::Approx(-5.0 / 1000.0).epsilon(1e-12));
        CHECK(r.decaying);
        const H1Report rp = Nonlinearity({3.0, PowerExp{-2.0, 1.5, 2.0}, {}}).check_h1(grid);
        CHECK(rp.decaying);
    }

    TEST_CASE("derivative of log f approaches p t^{p-1}")
    {
        for (const auto& nl : {h4(3.0), Nonlinearity({3.0, PowerExp{-1.0, 0.5, 1.0}, {}})}) {
            double prev = 1e300;
            for (double t : {10.0, 20.0, 50.0, 100.0}) {
                const double gap = std::fabs(nl.dlog_f(t) / (3.0 * t * t) - 1.0);
                CHECK(gap < prev);
                prev = gap;
            }
        }
    }

    TEST_CASE("joins are continuous")
    {
        const double eps = 1e-9;
        const Nonlinearity pe({3.0, PowerExp{-1.0, 0.5, 1.0}, 1.5});
        const Nonlinearity h = h4(3.0, 1.2);
        for (const Nonlinearity* nl : {&pe, &h}) {
            const double tj = nl->t_join();
            const double jump = nl->log_f(tj + eps).log_abs - nl->log_f(tj - eps).log_abs;
            CHECK(std::fabs(jump - 2.0 * eps * nl->dlog_f(tj)) < 1e-12);
            CHECK(std::fabs(nl->dlog_f(tj - eps) - nl->dlog_f(tj + eps)) < 1e-7);
        }
        CHECK(std::fabs(h.d2log_f(1.2 - eps) - h.d2log_f(1.2 + eps)) < 1e-6);
    }

    TEST_CASE("H4 blend is positive and flat at the origin")
    {
        const Nonlinearity nl = h4(3.0);
        const double f_join = std::exp(nl.log_f(1.0).log_abs);
        CHECK(std::exp(nl.log_f(0.0).log_abs) == doctest::Approx(0.5 * f_join).epsilon(1e-14));
        for (int i = 0; i <= 200; ++i)
            CHECK(nl.log_f(i / 200.0).sign == 1);
        CHECK(std::fabs(nl.dlog_f(1e-6)) < 1e-9);
    }

    TEST_CASE("invalid specs are rejected")
    {
        CHECK_THROWS_AS(h4(2.0), Error);
        CHECK_THROWS_AS(h4(3.0, -1.0), Error);
        CHECK_THROWS_AS(Nonlinearity({2.0, PowerExp{0.0, 1.0, 2.5}, {}}), Error);
        CHECK_THROWS_AS(Nonlinearity({0.0, UnitH{}, {}}), Error);
        CHECK_THROWS_AS(Nonlinearity({2.0, PowerExp{-1.0, 0.0, 1.0}, 0.0}), Error);
        CHECK_THROWS_AS(unit(2.0).log_f(-1.0), Error);
    }

    TEST_CASE("LogValue")
    {
        CHECK(LogValue::zero().is_zero());
        CHECK(LogValue::from_double(0.0).sign == 0);
        for (double x : {3.5, -2.25, 1e-300, -7e300}) {
            const LogValue v = LogValue::from_double(x);
            CHECK(v.value() == doctest::Approx(x).epsilon(1e-12));
        }
        const LogValue p = LogValue::from_double(-2.0) * LogValue::from_double(3.0);
        CHECK(p.value() == doctest::Approx(-6.0));
    }
}
