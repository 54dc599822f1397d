#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace blowup {

/// One bubble's characterization numbers. d is NaN at k = 0.
struct RecurrenceRow {
    int k = 0;
    double delta = 1.0;
    double log_delta = 0.0;
    double a = 2.0;
    double d = 0.0;
    double E = 0.0;          // 2 a_k / delta_k^{p-1}
    double delta_star = 0.0; // (1 - a_k/(2(p-1))) delta_k
    double beta_star = 0.0;  // (2 + a_k)(1 - a_k/(2(p-1)))^{p-1}
};

class RecurrenceTable {
public:
    RecurrenceTable(double p, double tol, std::vector<RecurrenceRow> rows);

    double p() const { return p_; }
    double tol() const { return tol_; }
    const std::vector<RecurrenceRow>& rows() const { return rows_; }
    const RecurrenceRow& row(int k) const;
    int max_k() const { return static_cast<int>(rows_.size()) - 1; }

    /// CSV with header k,delta,a,d,E,delta_star,beta_star at 17 digits.
    std::string to_csv() const;

private:
    double p_;
    double tol_;
    std::vector<RecurrenceRow> rows_;
};

/// Rows 0..K of the bubble recurrence for exponent p > 2.
RecurrenceTable compute_recurrence(double p, int K, double tol = 1e-10);

/// Memoized compute_recurrence at the default tolerance; thread-safe.
std::shared_ptr<const RecurrenceTable> cached_recurrence(double p, int K = 64);

/// beta_k(delta) on [delta_{k+1}, delta_k]; equals 2 at both ends.
double beta_k(const RecurrenceTable& table, int k, double delta);

struct HatRow {
    int k = 0;
    double c_hat = 1.0;
    double a_hat = 2.0;
    double beta_hat_star = 0.0; // (2 + a_hat) e^{-a_hat/2}
};

/// The p -> infinity limit sequences, rows 0..K.
std::vector<HatRow> compute_hat_recurrence(int K, double tol = 1e-10);
std::string hat_table_csv(const std::vector<HatRow>& rows);

struct LimitRow {
    double p = 0.0;
    double a_k = 0.0;
    double delta_pow = 0.0; // delta_k(p)^{p-1}
    double d_k = 0.0;
};

struct LimitReport {
    int k = 0;
    double a_hat = 0.0;
    double c_hat = 0.0;
    std::vector<LimitRow> rows;     // in the order of the supplied grid
    bool hat_gap_shrinks = true;    // |a_k(p) - a_hat_k| decreases as p increases
    bool two_gap_shrinks = true;    // 2 - a_k(p) decreases as p decreases
};

LimitReport limit_convergence_report(int k, std::span<const double> p_grid);

} // namespace blowup
