// Acceptance criteria 1-10: one PASS/FAIL line each; exit status 1 if any fails.
#include "fgeo/acceptance.hpp"

#include <cstdio>
#include <cstdlib>
#include <string>

int main(int argc, char** argv) {
    fgeo::AcceptanceOptions opts;
    for (int i = 1; i < argc; ++i) opts.only.push_back(std::atoi(argv[i]));
    opts.progress = [](const fgeo::CriterionResult& r) {
        std::printf("%s\n", fgeo::format_result(r).c_str());
        std::fflush(stdout);
    };
    int failed = 0;
    for (const auto& r : fgeo::run_acceptance(opts)) failed += r.passed ? 0 : 1;
    std::printf("%d criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
