#include <algorithm>
#include <iostream>

#include "blowup/acceptance.hpp"

int main(int argc, char** argv)
{
    blowup::AcceptanceOptions opts;
    opts.out_dir = argc > 1 ? argv[1] : "acceptance_out";
    const auto results = blowup::run_acceptance(opts);
    std::cout << blowup::format_results(results);
    const bool all = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.pass; });
    return all ? 0 : 1;
}
