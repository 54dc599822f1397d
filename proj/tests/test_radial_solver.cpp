#include <algorithm>
#include <cmath>
#include <random>

#include <doctest.h>

#include "blowup/errors.hpp"
#include "blowup/radial_solver.hpp"

using namespace blowup;

namespace {

const Nonlinearity gelfand({1.0, UnitH{}, {}});
const Nonlinearity h4_3({3.0, H4{1.0}, {}});

// u = mu - 2 log(1 + lambda e^mu r^2 / 8) vanishes at r = 1.
double gelfand_lambda(double mu) { return 8.0 * (std::exp(mu / 2.0) - 1.0) * std::exp(-mu); }

ErrorCode code_of(auto&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return ErrorCode::Io;
}

} // namespace

TEST_SUITE("radial_solver")
{
    TEST_CASE("Gelfand shots match the closed form")
    {
        for (double mu : {0.5, 1.0, 2.0 * std::log(2.0), 2.0, 3.0, 4.0, 6.0}) {
            CAPTURE(mu);
            const ShotResult shot = shoot_first_zero(gelfand, mu);
            CHECK(std::fabs(shot.lambda / gelfand_lambda(mu) - 1.0) < 1e-8);
            CHECK(gelfand_oracle(mu) == doctest::Approx(gelfand_lambda(mu)).epsilon(1e-14));
            CHECK(shot.solution.termination() == Termination::HitZero);
        }
        CHECK(shoot_first_zero(gelfand, 1.0).lambda == doctest::Approx(1.909209748).epsilon(1e-9));
    }

    TEST_CASE("closed-form profile along the run")
    {
        const double mu = 3.0;
        const double lam = gelfand_lambda(mu);
        const RadialSolution sol = integrate_radial(gelfand, lam, mu, StopAt::RadiusOne);
        CHECK(std::fabs(sol.s_end()) < 1e-8);
        CHECK(std::fabs(sol.samples().back().u) < 1e-8);
        for (double s : {-3.0, -2.0, -1.0, -0.5, -0.1}) {
            const double r2 = std::exp(2.0 * s);
            const double exact = mu - 2.0 * std::log1p(lam * std::exp(mu) * r2 / 8.0);
            CHECK(std::fabs(sol.state_at(s).u - exact) < 1e-9);
        }
    }

    TEST_CASE("lambda scaling between the two run modes")
    {
        const ShotResult shot = shoot_first_zero(h4_3, 5.0);
        const RadialSolution direct = integrate_radial(h4_3, shot.lambda, 5.0, StopAt::FirstZero);
        CHECK(direct.termination() == Termination::HitZero);
        CHECK(std::fabs(direct.s_end()) < 1e-7);
    }

    TEST_CASE("start offset does not move lambda")
    {
        const double base = shoot_first_zero(h4_3, 4.0).lambda;
        for (double off : {4.0, 8.0}) {
            SolverOptions o;
            o.s_start_offset = off;
            CHECK(std::fabs(shoot_first_zero(h4_3, 4.0, o).lambda / base - 1.0) < 1e-9);
        }
    }

    TEST_CASE("error estimate bounds the tolerance halving gap")
    {
        for (double mu : {2.0, 4.0, 6.0}) {
            CAPTURE(mu);
            SolverOptions o;
            o.rel_tol = 1e-8;
            o.abs_tol = 1e-10;
            const ShotResult coarse = shoot_first_zero(h4_3, mu, o);
            o.rel_tol /= 2.0;
            o.abs_tol /= 2.0;
            const ShotResult fine = shoot_first_zero(h4_3, mu, o);
            CHECK(std::fabs(coarse.lambda - fine.lambda) < 10.0 * coarse.lambda_error);
        }
    }

    TEST_CASE("integral identities on random sample pairs")
    {
        const ShotResult shot = shoot_first_zero(h4_3, 6.0);
        const auto& sol = shot.solution;
        const std::size_t n = sol.samples().size();
        std::mt19937_64 rng(7);
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        for (int trial = 0; trial < 100; ++trial) {
            std::size_t i = pick(rng), j = pick(rng);
            if (i > j)
                std::swap(i, j);
            const IdentityResiduals r = identity_residuals(sol, i, j);
            CHECK(std::fabs(r.id0_rel()) < 1e-8);
            CHECK(std::fabs(r.id2_rel()) < 1e-7);
        }
        CHECK_THROWS_AS(identity_residuals(sol, 3, 2), Error);
    }

    TEST_CASE("Pohozaev balance")
    {
        const ShotResult g = shoot_first_zero(gelfand, 1.0);
        for (double frac : {0.0, 0.3, 0.7, 1.0}) {
            const double s = frac == 1.0 ? g.solution.s_end()
                                         : g.solution.s_start() + frac * (g.solution.s_end() - g.solution.s_start());
            const auto res = pohozaev_residual(g.solution, s);
            REQUIRE(res.has_value());
            CHECK(std::fabs(*res) < 1e-8);
        }
        const ShotResult h = shoot_first_zero(h4_3, 5.0);
        const auto mid = pohozaev_residual(h.solution, 0.5 * (h.solution.s_start() + h.solution.s_end()));
        REQUIRE(mid.has_value());
        CHECK(std::fabs(*mid) < 1e-7);
        const ShotResult big = shoot_first_zero(h4_3, 9.0);
        CHECK_FALSE(pohozaev_residual(big.solution, big.solution.s_end()).has_value());
    }

    TEST_CASE("monotone running quantities")
    {
        const ShotResult shot = shoot_first_zero(h4_3, 6.0);
        const auto& s = shot.solution.samples();
        for (std::size_t k = 1; k < s.size(); ++k) {
            CHECK(s[k].s > s[k - 1].s);
            CHECK(s[k].u <= s[k - 1].u);
            // Increments below one ulp may round either way.
            CHECK(s[k].A >= s[k - 1].A * (1.0 - 1e-15));
            CHECK(s[k].M >= s[k - 1].M * (1.0 - 1e-15));
        }
    }

    TEST_CASE("state_at reproduces stored samples")
    {
        const ShotResult shot = shoot_first_zero(h4_3, 4.0);
        const auto& s = shot.solution.samples();
        for (std::size_t k = 0; k < s.size(); k += 97) {
            const Sample x = shot.solution.state_at(s[k].s);
            CHECK(x.u == doctest::Approx(s[k].u).epsilon(1e-12));
        }
        CHECK_THROWS_AS(shot.solution.state_at(shot.solution.s_end() + 1.0), Error);
    }

    TEST_CASE("superquadratic exponent without weight reaches a zero")
    {
        const Nonlinearity nl({3.0, UnitH{}, {}});
        const ShotResult shot = shoot_first_zero(nl, 4.0);
        CHECK(shot.solution.termination() == Termination::HitZero);
        CHECK(shot.lambda > 0.0);
    }

    TEST_CASE("error codes")
    {
        CHECK(code_of([] { integrate_radial(gelfand, 1.0, -1.0, StopAt::FirstZero); }) == ErrorCode::Domain);
        CHECK(code_of([] { integrate_radial(gelfand, 0.0, 1.0, StopAt::FirstZero); }) == ErrorCode::Domain);
        SolverOptions small;
        small.max_steps = 100;
        CHECK(code_of([&] { integrate_radial(gelfand, 1.0, 1.0, StopAt::FirstZero, small); }) == ErrorCode::Domain);
        CHECK(code_of([] { integrate_from_state(gelfand, Sample{-5.0, 1.0, 1.0, 0, 0, 0}, 1.0); }) ==
              ErrorCode::Domain);
        SolverOptions budget;
        budget.max_steps = 10000;
        CHECK(code_of([&] { integrate_from_state(gelfand, Sample{-1e4, 1.0, -1e-9, 0, 0, 0}, 1.0, budget); }) ==
              ErrorCode::StepLimit);
    }
}
