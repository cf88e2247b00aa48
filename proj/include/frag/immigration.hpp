#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "frag/fragcore.hpp"
#include "frag/characteristic.hpp"
#include "frag/stopline.hpp"

namespace frag {

// Distribution of immigrating configurations (the marks of the Poisson
// stream). A discrete mixture is enough for the representable nu_I.
struct MarkSampler {
    std::vector<std::pair<double, RankedMassVector>> choices;  // weight, configuration

    static MarkSampler fixed(RankedMassVector config) {
        return {{{1.0, std::move(config)}}};
    }
    const RankedMassVector& sample(double u) const;  // u uniform on (0,1)
    double total_weight() const;
    // E[ sum_k mark_k^q ], the closed-form ingredient of the Poisson-integral mean.
    double mean_power_sum(double q) const;
};

struct ImmigrationSchedule {
    RankedMassVector initial_config;  // u, present at time 0
    double rate = 0.0;                // Poisson intensity of immigration times
    MarkSampler mark;
    double size_decay_theta = 0.0;  // arrival at r is scaled by e^{-theta r}
    double horizon = 0.0;           // arrivals on [0, horizon]
};

struct ImmigrantRecord {
    std::size_t j;
    double t_immigrate;
    double v;  // block mass
    std::uint64_t path_seed;
    std::shared_ptr<const PathRecord> path;  // unit-mass fragmentation, may be unbuilt
};

struct CompositePath {
    ImmigrationSchedule schedule;
    std::vector<ImmigrantRecord> immigrants;

    double mass_summability(double p_star) const;  // sum_j v_j^{1+p*}
};

// Poisson(rate * horizon) arrivals uniform on [0, horizon], one record per
// block of each immigrating configuration, plus the initial configuration at
// time 0. Deterministic given the seed; paths are left unbuilt.
std::vector<ImmigrantRecord> sample_immigration(const ImmigrationSchedule& schedule,
                                                std::uint64_t seed);

// Samples the stream and simulates every immigrant's unit-mass path. With
// min_eta > 0, paths of immigrants with v >= min_eta are built exactly to the
// stop line at min_eta / v (size floor raised to match, so martingale-type
// readouts need the min_local_horizon mode instead). With min_local_horizon,
// every path runs to at least that local time at the base floor.
CompositePath make_composite(const DislocationMeasure& nu, const ImmigrationSchedule& schedule,
                             std::uint64_t seed, const SimulationParams& base,
                             double min_eta = 0.0, double min_local_horizon = 0.0);

// <rho^I_eta, f^I> = sum_j v_j^{1+p*_j} <rho^(j)_eta, f^(j)>; immigrants with
// v_j < eta contribute v_j^{1+p*_j} f(v_j/eta) through their unsplit root.
// fs and p_stars have either one entry (shared) or one per immigrant.
double composite_empirical(const CompositePath& cp, const std::vector<TestFunction>& fs,
                           double eta, const std::vector<double>& p_stars);

// Z^I_eta: each immigrant's process counted with phi at local threshold
// eta / v_j; immigrants entirely below eta contribute nothing.
double composite_count(const CompositePath& cp, const Characteristic& phi, double eta);

struct LargestBlockInfo {
    double size;
    std::size_t j_argmax;
    double t_immigrate_of_argmax;
};

// max_j v_j * (largest block of path j at t - t_j); ties resolved toward the
// smallest index.
LargestBlockInfo largest_block(const CompositePath& cp, double t);

// M^I_t(p) = sum_{t_j <= t} v_j^{1+p} M^(j)_{t - t_j}(p) with phi_value = Phi(p).
double composite_martingale(const CompositePath& cp, double p, double t, double phi_value);

struct LimitTableRow {
    double eta;
    double value;              // <rho^I_eta, 1>
    double small_immigrant_tail;  // sum over v_j < eta of v_j^{1+p*}
    double small_block_subsum;    // stopped blocks of composite size < eta^2
};

std::vector<LimitTableRow> lambda_I_limit_estimate(const CompositePath& cp,
                                                   const std::vector<double>& eta_grid,
                                                   double p_star);

// Largest-block trajectory of the composite process along t_grid, computed
// with per-immigrant certified pruning (exact despite never building the
// full trees). phi_prime_bar seeds the pruning-floor guess.
struct CompositeTrajectory {
    std::vector<double> lambda1;
    std::vector<double> t_immigrate_argmax;
};

CompositeTrajectory composite_largest_trajectory(const DislocationMeasure& nu,
                                                 const ImmigrationSchedule& schedule,
                                                 std::uint64_t seed,
                                                 const std::vector<double>& t_grid,
                                                 double phi_prime_bar);

struct DecayEstimate {
    double slope;
    double ci_lo;
    double ci_hi;
    double tj_over_t_max;  // max over grid and paths of t_{j_t} / t
};

// Pooled OLS slope of -ln lambda^I_1(t) on t with a path-resampling bootstrap CI.
DecayEstimate decay_rate_estimate(const std::vector<CompositeTrajectory>& ensemble,
                                  const std::vector<double>& t_grid, int bootstrap_n = 400,
                                  double ci_level = 0.99, std::uint64_t seed = 11);

}  // namespace frag
