#pragma once

#include <ostream>
#include <vector>

#include "frag/fragcore.hpp"
#include "frag/test_function.hpp"

namespace frag {

struct StoppedBlock {
    double size;         // relative to the path's initial mass, < eta
    double parent_size;  // relative, >= eta
    double creation_time;
};

// Terminal state of a fragmentation stopped at the first-passage line below
// eta: for every line of descent, the first block whose size drops below eta.
struct StoppedConfiguration {
    double eta;
    std::vector<StoppedBlock> blocks;
};

struct IncompleteStopLine : std::runtime_error {
    std::vector<std::uint64_t> unfinished;
    IncompleteStopLine(std::string msg, std::vector<std::uint64_t> ids)
        : std::runtime_error(std::move(msg)), unfinished(std::move(ids)) {}
};

// Walks the recorded genealogy; throws IncompleteStopLine when some line of
// descent has not yet passed below eta (retry with a larger horizon).
StoppedConfiguration stop_at(const PathRecord& path, double eta);

// Lambda_eta(p*) = sum_k size_k^{1+p*}; a unit-mean martingale in eta.
double lambda_martingale(const StoppedConfiguration& sc, double p_star);

// <rho_eta, f> = sum_k size_k^{1+p*} f(size_k / eta).
double empirical_mean(const StoppedConfiguration& sc, const TestFunction& f, double p_star);

// CSV: eta,size,parent_size,creation_time
void write_stopped_csv(const StoppedConfiguration& sc, std::ostream& os);

}  // namespace frag
