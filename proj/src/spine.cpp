#include "frag/spine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "frag/rng.hpp"

namespace frag {

namespace {

constexpr std::uint64_t kSpineSalt = 0x59135;
constexpr std::uint64_t kSiblingSalt = 0x51b;

}  // namespace

double SpinePath::spine_size_at(double t) const {
    double size = 1.0;
    for (std::size_t i = 0; i < jump_times.size() && jump_times[i] <= t; ++i)
        size = spine_sizes[i];
    return size;
}

double SpinePath::xi_at(double t) const { return -std::log(spine_size_at(t)); }

SpinePath simulate_spine(const DislocationMeasure& nu, double p, double horizon,
                         std::uint64_t seed) {
    if (!nu.conservative())
        throw std::invalid_argument(
            "simulate_spine: dissipative nu rejected; the sibling projection is only "
            "derived for conservative measures");
    if (!(p > -1.0)) throw std::invalid_argument("simulate_spine: requires p > -1");
    if (!(horizon >= 0.0)) throw std::invalid_argument("simulate_spine: negative horizon");

    // One categorical draw over (atom, child) pairs weighted by w_a * r^{1+p}.
    struct Pair {
        std::size_t atom;
        std::size_t child;
        double weight;
    };
    std::vector<Pair> pairs;
    std::vector<double> weights;
    double rate = 0.0;
    for (std::size_t a = 0; a < nu.atoms().size(); ++a) {
        const auto& atom = nu.atoms()[a];
        for (std::size_t n = 0; n < atom.ratios.size(); ++n) {
            double w = atom.weight * std::pow(atom.ratios[n], 1.0 + p);
            pairs.push_back({a, n, w});
            weights.push_back(w);
            rate += w;
        }
    }

    SpinePath path;
    path.p = p;
    path.horizon = horizon;
    path.seed = seed;

    CounterRng rng(derive_key(seed, kSpineSalt));
    double t = 0.0;
    double size = 1.0;
    while (true) {
        t += rng.exponential(rate);
        if (t > horizon) break;
        const Pair& pick = pairs[rng.categorical(weights, rate)];
        const RankedMassVector& ratios = nu.atoms()[pick.atom].ratios;
        std::vector<double> siblings;
        siblings.reserve(ratios.size() - 1);
        for (std::size_t n = 0; n < ratios.size(); ++n)
            if (n != pick.child) siblings.push_back(size * ratios[n]);
        path.jump_times.push_back(t);
        size *= ratios[pick.child];
        path.spine_sizes.push_back(size);
        path.sibling_configs.emplace_back(std::move(siblings));
        path.atom_indices.push_back(pick.atom);
        path.child_indices.push_back(pick.child);
    }
    return path;
}

DislocationMeasure spine_immigration_measure(const DislocationMeasure& nu, double p) {
    if (!(p > -1.0))
        throw std::invalid_argument("spine_immigration_measure: requires p > -1");
    std::vector<DislocationAtom> atoms;
    atoms.reserve(nu.atoms().size());
    for (const auto& atom : nu.atoms())
        atoms.push_back({atom.weight * atom.ratios.power_sum(1.0 + p), atom.ratios});
    return DislocationMeasure(std::move(atoms));
}

SpineReconstruction reconstruct(const DislocationMeasure& nu, double p, double horizon,
                                std::uint64_t seed, double size_floor) {
    SpineReconstruction rec;
    rec.spine = simulate_spine(nu, p, horizon, seed);

    std::uint64_t sib_root = derive_key(seed, kSiblingSalt);
    for (std::size_t j = 0; j < rec.spine.jump_times.size(); ++j) {
        std::uint64_t jump_key = derive_key(sib_root, j);
        std::vector<PathRecord> paths;
        const RankedMassVector& config = rec.spine.sibling_configs[j];
        for (std::size_t k = 0; k < config.size(); ++k) {
            SimulationParams params;
            params.horizon = horizon - rec.spine.jump_times[j];
            params.size_floor = size_floor;
            params.seed = derive_key(jump_key, k);
            paths.push_back(simulate(nu, params, config[k]));
        }
        rec.sibling_paths.push_back(std::move(paths));
    }
    return rec;
}

ReconstructionSlice SpineReconstruction::at(double t) const {
    if (t < 0.0 || t > spine.horizon)
        throw std::invalid_argument("SpineReconstruction::at: t outside [0, horizon]");

    ReconstructionSlice slice;
    slice.spine_size = spine.spine_size_at(t);

    std::vector<double> immigrant_blocks;
    for (std::size_t j = 0; j < spine.jump_times.size() && spine.jump_times[j] <= t; ++j) {
        for (const PathRecord& path : sibling_paths[j]) {
            RankedMassVector blocks = masses_at(path, t - spine.jump_times[j]);
            immigrant_blocks.insert(immigrant_blocks.end(), blocks.begin(), blocks.end());
        }
    }
    slice.immigrant_blocks = RankedMassVector(std::move(immigrant_blocks));
    slice.immigrant_total = slice.immigrant_blocks.sum();
    slice.full = slice.immigrant_blocks + RankedMassVector({slice.spine_size});
    return slice;
}

TiltedMomentCheck tilted_moment_check(const DislocationMeasure& nu, double p, double q, double t,
                                      const MCParams& mc) {
    if (!(p > -1.0 && p + q > -1.0))
        throw std::invalid_argument("tilted_moment_check: requires p > -1 and p + q > -1");

    auto statistic = [&](std::int64_t, std::uint64_t seed) {
        SpinePath path = simulate_spine(nu, p, t, seed);
        return std::pow(path.spine_size_at(t), q);
    };
    MCResult r = run_mc(statistic, mc);

    double analytic = std::exp(-t * (phi(nu, p + q) - phi(nu, p)));
    return {r.mean, r.se, analytic};
}

void write_spine_csv(const SpinePath& path, std::ostream& os) {
    os << "time,spine_size,siblings\n";
    os.precision(17);
    for (std::size_t j = 0; j < path.jump_times.size(); ++j) {
        os << path.jump_times[j] << ',' << path.spine_sizes[j];
        for (double s : path.sibling_configs[j]) os << ',' << s;
        os << '\n';
    }
}

}  // namespace frag
