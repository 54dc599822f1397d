#pragma once

#include <optional>
#include <string>
#include <vector>

#include "blowup/profiles.hpp"
#include "blowup/radial_solver.hpp"
#include "blowup/recurrence.hpp"

namespace blowup {

struct PhiPsiSample {
    double s = 0.0;
    double log_phi = 0.0;
    double phi = 0.0; // p lambda r^2 u^{p-1} f(u)
    double psi = 0.0; // p u^{p-1} A = -p r u^{p-1} u'
};

PhiPsiSample phi_psi_at(const RadialSolution& sol, const Sample& smp);
std::vector<PhiPsiSample> compute_phi_psi(const RadialSolution& sol);
std::string phi_psi_csv(const std::vector<PhiPsiSample>& trace);

/// A measured quantity next to its asymptotic target.
struct Comparison {
    double value = 0.0;
    double target = 0.0;
    double rel_gap = 0.0; // |value - target| / |target|
};

Comparison compare(double value, double target);

struct BubbleReport {
    int k = 0;
    double s = 0.0;      // log radius of the phi peak
    double disc_s = 0.0; // same, in the frame where u vanishes at r = 1
    double u = 0.0;
    double ratio = 0.0;  // u / mu
    double phi = 0.0;
    double psi = 0.0;
    double energy_pM = 0.0; // int p lambda u^{p-1} f r dr over the basin
    double energy_E = 0.0;  // p mu^{p-1} int lambda f r dr over the basin
    double loc_stat = 0.0;  // log(1/r_k) / mu^p, disc frame
    double basin_lo = 0.0;
    double basin_hi = 0.0;

    // Present when a recurrence table for p > 2 was supplied.
    std::optional<Comparison> ratio_vs_delta;
    std::optional<Comparison> phi_vs_target;     // a_k^2 / 2
    std::optional<Comparison> psi_vs_target;     // 2
    std::optional<Comparison> energy_pM_vs_target; // 2 a_k
    std::optional<Comparison> energy_E_vs_target;  // 2 a_k / delta_k^{p-1}
    std::optional<Comparison> loc_vs_target;     // delta_k^p / 2
};

/// Local maxima of log phi above log(min_phi), ordered by s. Throws
/// NoBubbles when max phi < min_phi.
std::vector<BubbleReport> detect_bubbles(const RadialSolution& sol, const RecurrenceTable* table = nullptr,
                                         double min_phi = 0.05);

struct OscillationEntry {
    int k = 0;
    Comparison top_beta;                 // u^p / log(1/r) at the k-th peak
    std::optional<Comparison> valley_beta; // same at the u/mu = delta_k* crossing
    std::optional<double> valley_s;
};

std::vector<OscillationEntry> oscillation_report(const RadialSolution& sol,
                                                 const std::vector<BubbleReport>& bubbles,
                                                 const RecurrenceTable* table);

/// Curves are evaluated either at the solution's own log radius (Raw) or at
/// the log radius of the unit-disc rescaling (Disc).
enum class Frame { Raw, Disc };

struct IntersectionReport {
    std::string curve;
    Frame frame = Frame::Disc;
    double s_lo = 0.0;
    double s_hi = 0.0;
    std::vector<double> zeros;       // raw log radius, strictly increasing
    std::vector<double> tangencies;
    int Z() const { return static_cast<int>(zeros.size()); }
};

/// Strict sign changes of u(s) - U(s) on the stored grid inside
/// [s_lo, s_hi], each refined by bisection to 1e-10 in s. Grid points where
/// the curve is undefined are skipped.
IntersectionReport count_intersections(const RadialSolution& sol, const Curve& curve, double s_lo, double s_hi,
                                       Frame frame = Frame::Disc);

struct AnalysisReport {
    double mu = 0.0;
    double lambda = 0.0;
    double p = 0.0;
    std::vector<BubbleReport> bubbles;
    std::vector<OscillationEntry> oscillation;
    std::vector<IntersectionReport> intersections;
};

std::string analysis_json(const AnalysisReport& report);

} // namespace blowup
