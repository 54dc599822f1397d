#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "blowup/nonlinearity.hpp"

namespace blowup {

struct SolverOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    /// The run starts at r = gamma_0 e^{-offset}, gamma_0 the bubble scale.
    double s_start_offset = 6.0;
    std::size_t max_steps = 200000;
    bool dense_output = true;
    /// Uniform s-points added to the stored samples when dense_output is set.
    std::size_t dense_samples = 2048;
    double max_step = 0.5;
    double initial_step = 1e-2;
};

void validate(const SolverOptions& opts);

enum class StopAt { RadiusOne, FirstZero };
enum class Termination { HitZero, ReachedBoundary, StepLimit };

std::string to_string(Termination t);

/// One stored point, s = log r. A, M, W are the running integrals
/// A = int lambda f(u) t dt, M = int p lambda u^{p-1} f(u) t dt,
/// W = int lambda f(u) t log t dt over [0, r].
struct Sample {
    double s = 0.0;
    double u = 0.0;
    double v = 0.0; // du/ds = r u'(r)
    double A = 0.0;
    double M = 0.0;
    double W = 0.0;
};

class RadialSolution {
public:
    RadialSolution(Nonlinearity nonlinearity, double lambda, double mu, SolverOptions opts);

    const Nonlinearity& nonlinearity() const { return nl_; }
    const SolverOptions& options() const { return opts_; }
    double lambda() const { return lambda_; }
    double mu() const { return mu_; }
    double p() const { return nl_.p(); }

    const std::vector<Sample>& samples() const { return samples_; }
    Termination termination() const { return termination_; }
    double s_start() const { return samples_.front().s; }
    /// log of the zero radius for HitZero, 0 for ReachedBoundary.
    double s_end() const { return samples_.back().s; }
    std::size_t steps() const { return steps_; }
    /// Accumulated local-error bound on u at s_end.
    double u_error() const { return u_error_; }

    /// Continuous state at s in [s_start, s_end] (one fresh 5th-order step
    /// from the nearest stored sample on the left).
    Sample state_at(double s) const;

    /// log radius in the unit-disc frame, where the solution vanishes at r = 1.
    double disc_log_radius(double s) const { return s - s_end(); }

    /// CSV "s,u,duds,A,M,W".
    std::string to_csv() const;

private:
    friend class RadialIntegrator;

    Nonlinearity nl_;
    double lambda_;
    double mu_;
    SolverOptions opts_;
    std::vector<Sample> samples_;
    Termination termination_ = Termination::StepLimit;
    std::size_t steps_ = 0;
    double u_error_ = 0.0;
};

/// Integrates -u'' - u'/r = lambda f(u), u(0) = mu, u'(0) = 0 in s = log r.
RadialSolution integrate_radial(const Nonlinearity& nl, double lambda, double mu, StopAt stop,
                                const SolverOptions& opts = {});

/// Integrates lambda = 1 from an arbitrary start state (used for the singular
/// solution). Stops at the first zero of u.
RadialSolution integrate_from_state(const Nonlinearity& nl, const Sample& start, double mu_label,
                                    const SolverOptions& opts = {});

struct ShotResult {
    double mu = 0.0;
    double s_bar = 0.0;
    double lambda = 0.0;       // e^{2 s_bar}
    double lambda_error = 0.0; // propagated from RadialSolution::u_error
    RadialSolution solution;
};

/// Solves the lambda = 1 form to its first zero r_bar; lambda(mu) = r_bar^2.
ShotResult shoot_first_zero(const Nonlinearity& nl, double mu, const SolverOptions& opts = {});

struct IdentityResiduals {
    double id0 = 0.0;       // (-du/ds) - A at the first sample
    double id0_scale = 1.0; // 1 + A
    double id2 = 0.0;
    double id2_scale = 1.0; // magnitude of the largest term in the identity

    double id0_rel() const { return id0 / id0_scale; }
    double id2_rel() const { return id2 / id2_scale; }
};

/// Green identities between samples i and j (i <= j).
IdentityResiduals identity_residuals(const RadialSolution& sol, std::size_t i, std::size_t j);

/// (r u')^2 - 4 int_0^r lambda F(u) t dt + 2 lambda F(u(r)) r^2 at s, by
/// re-integrating with both F-terms co-integrated, divided by the largest of
/// the three terms (at least 1): past the first bubble the two F-terms reach
/// 1e30 and more while their sum stays O(1). Empty when F(mu) is not directly
/// representable.
std::optional<double> pohozaev_residual(const RadialSolution& sol, double s);

/// lambda(mu) for -u'' - u'/r = lambda e^u on the unit disc:
/// 8b/(1+b)^2 with b = e^{mu/2} - 1.
double gelfand_oracle(double mu);

} // namespace blowup
