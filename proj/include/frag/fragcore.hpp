#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <unordered_map>
#include <vector>

#include "frag/measure.hpp"
#include "frag/ranked.hpp"

namespace frag {

struct SimulationParams {
    double alpha = 0.0;        // self-similarity index: block of size x splits at rate * x^alpha
    double horizon = 10.0;     // max process time
    double size_floor = 1e-9;  // blocks below it freeze (no further splits)
    std::uint64_t seed = 0;
    std::int64_t max_events = 10'000'000;
};

struct JumpEvent {
    double time;
    std::uint64_t parent_block;
    double parent_size;
    RankedMassVector ratios;  // the sampled dislocation atom
    std::vector<std::uint64_t> child_blocks;  // one id per ratio entry, same order as ratios
};

struct BlockState {
    std::uint64_t id;
    double size;
    double birth_time;
    std::optional<std::uint64_t> parent;
    bool frozen;  // below size_floor, retained for exact mass accounting
};

// Full genealogy of one fragmentation run. Immutable once returned.
struct PathRecord {
    SimulationParams params;
    double initial_mass = 1.0;
    std::uint64_t root_id = 0;
    std::vector<JumpEvent> events;  // strictly increasing in time
    std::vector<BlockState> terminal_blocks;  // alive at the end (frozen or unsplit)
    std::unordered_map<std::uint64_t, std::size_t> split_index;  // block id -> its event
    bool truncated = false;  // max_events hit; the experiment layer must enlarge caps

    // True when every line of descent ended below the floor (nothing left to split).
    bool fully_frozen() const;
};

// Event-driven simulation. Each live block of size x waits an exponential
// time with rate total_rate * x^alpha, then splits by an atom sampled with
// probability weight / total_rate. Ratio and clock draws come from per-block
// counter-based substreams keyed by genealogical position, so alpha is a pure
// time-reparameterisation: same seed, same genealogy, different timestamps.
PathRecord simulate(const DislocationMeasure& nu, const SimulationParams& params,
                    double initial_mass = 1.0);

// Simulates with the floor set below eta and doubles the horizon until every
// line of descent has passed below eta (at most max_doublings times).
PathRecord simulate_to_stopline(const DislocationMeasure& nu, SimulationParams params, double eta,
                                double initial_mass = 1.0, int max_doublings = 24);

// Ranked sizes of all blocks alive at time t (frozen blocks at their frozen size).
RankedMassVector masses_at(const PathRecord& path, double t);

// M_t(p) = sum_k (size_k(t)/initial)^{1+p} * exp(phi_value * t). Errors out if
// a frozen block existed before t, since freezing would bias the sum.
double additive_martingale(const PathRecord& path, double p, double t, double phi_value);

// Line-oriented event log: time,parent_id,parent_size,ratio1,...,ratioK
void write_event_log(const PathRecord& path, std::ostream& os);

// Size of the largest block along a time grid, computed with hard pruning:
// blocks below prune_floor are discarded outright. Exact whenever the true
// largest block at the final grid time is still >= prune_floor, which the
// function verifies by halving the floor and rerunning until the returned
// trajectory ends above it.
std::vector<double> largest_block_trajectory(const DislocationMeasure& nu, double alpha,
                                             const std::vector<double>& t_grid,
                                             std::uint64_t seed, double prune_floor_hint);

}  // namespace frag
