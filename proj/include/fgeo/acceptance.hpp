#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace fgeo {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct AcceptanceOptions {
    std::uint64_t seed = 20240611;
    std::vector<int> only;  // empty: all ten criteria
    // Called after each criterion finishes.
    std::function<void(const CriterionResult&)> progress;
};

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts = {});

// "PASS  C3 partition function ... (1.2 s)"
std::string format_result(const CriterionResult& r);

} // namespace fgeo
