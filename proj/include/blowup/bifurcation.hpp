#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "blowup/nonlinearity.hpp"
#include "blowup/profiles.hpp"
#include "blowup/radial_solver.hpp"

namespace blowup {

/// The singular solution U* of -U'' - U'/r = f(U) for an H4 nonlinearity:
/// U = (2 log(1/r))^{1/p} for r <= R0 = e^{-tau0^p/2}, integrated from R0
/// to its first zero R_bar* beyond.
class SingularSolution {
public:
    SingularSolution(Nonlinearity nl, RadialSolution tail);

    const Nonlinearity& nonlinearity() const { return nl_; }
    double tau0() const;
    double s_join() const { return s_join_; } // log R0
    double s_bar_star() const { return tail_.s_end(); }
    double R_bar_star() const;
    double lambda_star() const;
    const RadialSolution& tail() const { return tail_; }

    /// U and dU/ds at s <= log R_bar*.
    std::pair<double, double> value(double s) const;

    /// r^2 (-U'' - U'/r - f(U)) at s <= s_join from the analytic derivatives.
    double core_residual(double s) const;

    /// Closed-form core for s <= s_join, interpolated tail above.
    const Curve& as_curve() const { return curve_; }

    /// CSV "s,U,dUds": the core on a uniform grid over [core_s_min, s_join)
    /// followed by the tail samples.
    std::string to_csv(double core_s_min = -1000.0, int core_points = 8192) const;

private:
    Nonlinearity nl_;
    RadialSolution tail_;
    double s_join_;
    Curve curve_;
};

SingularSolution build_singular_solution(const Nonlinearity& nl, const SolverOptions& opts = {});

struct DiagramOptions {
    SolverOptions solver;
    double refine_dx = 1e-3;
    int max_refine_shots = 20; // per crossing
    unsigned jobs = 0;         // 0 = hardware concurrency
    double min_phi = 0.05;
};

struct DiagramRow {
    double mu = 0.0;
    double lambda = 0.0;
    double lambda_error = 0.0;
    std::optional<int> Z;  // intersections with U* on (0, min(r_bar, R_bar*))
    int bubbles = 0;
    std::string status = "ok"; // or an error code name
    std::string detail;
    bool refined = false;      // inserted by crossing refinement

    bool ok() const { return status == "ok"; }
};

struct Diagram {
    std::vector<DiagramRow> rows; // sorted by mu
    std::optional<double> lambda_star;
    std::optional<double> R_bar_star;
};

/// Shoots every mu (in parallel), then bisects each sign change of
/// lambda - lambda* down to refine_dx.
Diagram trace_diagram(const Nonlinearity& nl, std::span<const double> mu_grid, const DiagramOptions& opts = {},
                      const SingularSolution* singular = nullptr);

struct CrossingReport {
    int count = 0;
    std::vector<double> mu; // linear interpolation inside each bracketing pair
};

CrossingReport count_lambda_crossings(const Diagram& diagram);

struct KaplanReport {
    bool h2_holds = false;
    double c = 0.0;       // inf_{t>0} f(t)/t
    double t_at_inf = 0.0;
    double Lambda1 = 0.0; // first Dirichlet eigenvalue of the unit disc
    double bound = 0.0;   // Lambda1 / c
    double max_lambda = 0.0;
    bool all_below = false;
};

/// Checks every lambda(mu) against Lambda1 / c. Reports h2_holds = false
/// (and no bound) when the grid infimum of f(t)/t is not positive.
KaplanReport kaplan_check(const Nonlinearity& nl, const Diagram& diagram);

/// First positive zero of J0 from its ascending series.
double bessel_j0_first_zero();

/// CSV "mu,lambda,Z,bubbles"; Z is empty when no singular solution was used.
std::string diagram_csv(const Diagram& diagram);
std::string diagram_json(const Diagram& diagram, const CrossingReport& crossings,
                         const std::optional<KaplanReport>& kaplan);

} // namespace blowup
