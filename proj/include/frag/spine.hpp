#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "frag/fragcore.hpp"
#include "frag/measure.hpp"
#include "frag/stats.hpp"

namespace frag {

// Tagged-fragment path under the size-biased tilting by |Pi_1|^p: the spine
// jumps at constant rate sum_a w_a sum_n r_{a,n}^{1+p}, multiplying its size
// by the sampled ratio; the remaining children immigrate as siblings.
struct SpinePath {
    double p = 0.0;
    double horizon = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> jump_times;                   // strictly increasing
    std::vector<double> spine_sizes;                  // after each jump, strictly decreasing
    std::vector<RankedMassVector> sibling_configs;    // absolute sizes, one per jump
    std::vector<std::size_t> atom_indices;            // sampled atom per jump
    std::vector<std::size_t> child_indices;           // sampled child per jump

    double spine_size_at(double t) const;
    double xi_at(double t) const;  // -ln(spine size): the killed subordinator
};

// Rejects dissipative nu (the sibling-projection identity is only available
// in the conservative case) and p <= -1.
SpinePath simulate_spine(const DislocationMeasure& nu, double p, double horizon,
                         std::uint64_t seed);

// nu_I: atoms reweighted by weight_a -> weight_a * sum_n ratios_a[n]^{1+p};
// the law of the atom producing the spine's sibling configuration.
DislocationMeasure spine_immigration_measure(const DislocationMeasure& nu, double p);

struct ReconstructionSlice {
    RankedMassVector full;  // spine block merged with all sibling-descendant blocks
    double spine_size;
    double immigrant_total;
    RankedMassVector immigrant_blocks;
};

// Spine path plus one ordinary fragmentation per sibling block, all on
// derived seeds, queryable at any t <= horizon. The slice satisfies
// sum(full) = spine_size + immigrant_total exactly.
struct SpineReconstruction {
    SpinePath spine;
    // sibling_paths[j] holds one fragmentation per block of sibling_configs[j],
    // started at jump_times[j] with that block's absolute size.
    std::vector<std::vector<PathRecord>> sibling_paths;

    ReconstructionSlice at(double t) const;
};

SpineReconstruction reconstruct(const DislocationMeasure& nu, double p, double horizon,
                                std::uint64_t seed, double size_floor = 1e-9);

struct TiltedMomentCheck {
    double mc_mean;
    double stderr_;
    double analytic;  // e^{-t (Phi(p+q) - Phi(p))}
};

// Monte-Carlo mean of spine_size(t)^q against the tilted Laplace exponent.
TiltedMomentCheck tilted_moment_check(const DislocationMeasure& nu, double p, double q, double t,
                                      const MCParams& mc);

// CSV: time,spine_size,sibling_1,sibling_2,...
void write_spine_csv(const SpinePath& path, std::ostream& os);

}  // namespace frag
