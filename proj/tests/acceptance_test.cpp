// Acceptance harness: runs every verification criterion on the built-in
// corpus and prints one PASS/FAIL line per criterion. Exit code 0 iff all
// criteria pass.
#include <cstdio>

#include "frag/verify.hpp"

int main() {
    std::vector<frag::CriterionResult> results = frag::run_acceptance();
    for (const auto& r : results)
        std::printf("criterion %d (%s): %s - %s [%.1fs]\n", r.id, r.name.c_str(),
                    r.passed ? "PASS" : "FAIL", r.detail.c_str(), r.seconds);
    std::printf("%s\n", frag::all_passed(results) ? "ACCEPTANCE: PASS" : "ACCEPTANCE: FAIL");
    return frag::all_passed(results) ? 0 : 1;
}
