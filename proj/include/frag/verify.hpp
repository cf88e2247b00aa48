#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace frag {

struct CriterionResult {
    int id;
    std::string name;
    bool passed;
    std::string detail;  // observed vs expected with the applied tolerance
    double seconds;
};

struct AcceptanceOptions {
    int workers = 0;                     // 0: env / hardware default
    std::uint64_t base_seed = 20240901;  // pinned: the acceptance run is reproducible
};

// Runs every acceptance criterion on the built-in corpus. Expensive (several
// minutes single-threaded); criteria are independent and internally parallel.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt = {});

bool all_passed(const std::vector<CriterionResult>& results);

// CSV: id,name,passed,seconds,detail
void write_verdict_csv(const std::vector<CriterionResult>& results, std::ostream& os);

}  // namespace frag
