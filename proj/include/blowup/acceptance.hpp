#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace blowup {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0; // wall time; printed, never written to artifacts
};

struct AcceptanceOptions {
    std::filesystem::path out_dir = "verify_out";
    unsigned jobs = 0;
    bool check_determinism = true;
};

/// Runs every acceptance criterion, writing artifacts under out_dir/cNN_name
/// and a summary.json without timings.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts);

/// One "PASS|FAIL  id  name  detail  (t s)" line per criterion.
std::string format_results(const std::vector<CriterionResult>& results);

} // namespace blowup
