#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace blowup {

/// z_0(r) = log(64 / (8 + r^2)^2), the regular Liouville bubble.
struct Regular0 {};

/// z(r) = log(2 a^2 b / (r^{2-a} (1 + b r^a)^2)), singular at the origin.
struct SingularA {
    double a = 1.0;
    double b = 1.0;
};

/// z~_0(r) = log(16 / (2 + r^2)^2).
struct Tilde0 {};

using Profile = std::variant<Regular0, SingularA, Tilde0>;

/// SingularA normalized so that z(a/sqrt2) = 0: b = (sqrt2 / a)^a.
SingularA singular_profile(double a);

struct ProfileValue {
    double z = 0.0;
    double dz = 0.0;  // dz/dr
    double d2z = 0.0; // d^2z/dr^2
};

/// Derivatives in s = log r.
struct LogRadiusValue {
    double z = 0.0;
    double z_s = 0.0;
    double z_ss = 0.0;
};

LogRadiusValue eval_profile_log(const Profile& profile, double s);

/// Analytic (z, z', z''). r = 0 is accepted for Regular0 and Tilde0 only.
ProfileValue eval_profile(const Profile& profile, double r);

/// int_0^inf e^z r dr by quadrature in s = log r.
double profile_mass(const Profile& profile, double tol = 1e-10);

/// Closed-form mass: 4, 2a or 4.
double profile_mass_exact(const Profile& profile);

/// r^2 (-z'' - z'/r - e^z), i.e. -z_ss - e^{z + 2s} in log radius.
/// The r^2 weight keeps the check meaningful over many decades of r.
double profile_residual(const Profile& profile, double r);

/// R^2 e^{z(R)}: 64R^2/(8+R^2)^2 for Regular0, 2a^2 b R^a/(1+bR^a)^2 for
/// SingularA.
double phi_of_profile(const Profile& profile, double R);

/// CSV "s,z,zprime,residual" on s = -10..10 in steps of 0.05.
std::string profile_csv(const Profile& profile);

// ---------------------------------------------------------------------------
// Envelope curves, evaluated in log radius s = log r < 0.

/// U_beta(r) = (beta log(1/r))^{1/p}.
struct UBeta {
    double beta = 2.0;
    double p = 3.0;
};

/// V_L(r) = {2 log(1/r) - (1 - (1-m)/p) log(2 log(1/r)) + L}^{1/p}.
struct VL {
    double L = 0.0;
    double p = 3.0;
    double m = 0.0;
};

/// Samples (s_i, U_i) with strictly increasing s, monotone-cubic interpolation.
class TabulatedCurve {
public:
    TabulatedCurve(std::vector<double> s, std::vector<double> values);

    double operator()(double s) const;
    double s_min() const { return s_min_; }
    double s_max() const { return s_max_; }

private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
    double s_min_ = 0.0;
    double s_max_ = 0.0;
};

/// head for s <= tail.s_min(), tail above it.
struct SplicedCurve {
    UBeta head;
    TabulatedCurve tail;
};

using Curve = std::variant<UBeta, VL, TabulatedCurve, SplicedCurve>;

bool curve_defined(const Curve& curve, double s);
double eval_curve(const Curve& curve, double s);
std::string curve_id(const Curve& curve);

} // namespace blowup
