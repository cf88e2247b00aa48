#include "frag/fragcore.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>

#include "frag/rng.hpp"

namespace frag {

namespace {

// Substream tags within a block's key.
constexpr std::uint64_t kAtomStream = 0;
constexpr std::uint64_t kClockStream = 1;
constexpr std::uint64_t kChildBase = 2;

struct Pending {
    double t_split;
    std::uint64_t key;
    double size;
    double birth;
    std::optional<std::uint64_t> parent;

    bool operator>(const Pending& o) const {
        if (t_split != o.t_split) return t_split > o.t_split;
        return key > o.key;  // deterministic tie-break
    }
};

using MinHeap = std::priority_queue<Pending, std::vector<Pending>, std::greater<Pending>>;

double uniform_from(std::uint64_t key, std::uint64_t stream) {
    CounterRng rng(derive_key(key, stream));
    return rng.uniform();
}

double split_wait(std::uint64_t key, double size, double total_rate, double alpha) {
    double rate = total_rate * std::pow(size, alpha);
    return -std::log(uniform_from(key, kClockStream)) / rate;
}

std::size_t pick_atom(const DislocationMeasure& nu, std::uint64_t key) {
    double u = uniform_from(key, kAtomStream) * nu.total_rate();
    double acc = 0.0;
    std::size_t last = 0;
    for (std::size_t i = 0; i < nu.atoms().size(); ++i) {
        acc += nu.atoms()[i].weight;
        last = i;
        if (u < acc) return i;
    }
    return last;
}

void validate(const SimulationParams& params, double initial_mass) {
    if (!(params.horizon >= 0.0)) throw std::invalid_argument("simulate: horizon must be >= 0");
    if (!(params.size_floor > 0.0 && params.size_floor < 1.0))
        throw std::invalid_argument("simulate: size_floor must lie in (0,1)");
    if (params.max_events <= 0) throw std::invalid_argument("simulate: max_events must be positive");
    if (!(initial_mass > 0.0)) throw std::invalid_argument("simulate: initial mass must be positive");
}

}  // namespace

bool PathRecord::fully_frozen() const {
    return std::all_of(terminal_blocks.begin(), terminal_blocks.end(),
                       [](const BlockState& b) { return b.frozen; });
}

PathRecord simulate(const DislocationMeasure& nu, const SimulationParams& params,
                    double initial_mass) {
    validate(params, initial_mass);

    PathRecord path;
    path.params = params;
    path.initial_mass = initial_mass;
    path.root_id = derive_key(params.seed, 0);

    const double floor_abs = params.size_floor * initial_mass;
    MinHeap heap;

    if (initial_mass < floor_abs) {
        path.terminal_blocks.push_back({path.root_id, initial_mass, 0.0, std::nullopt, true});
        return path;
    }
    heap.push({split_wait(path.root_id, initial_mass, nu.total_rate(), params.alpha), path.root_id,
               initial_mass, 0.0, std::nullopt});

    bool stopped = false;
    while (!heap.empty()) {
        Pending b = heap.top();
        if (!stopped && b.t_split > params.horizon) stopped = true;
        if (!stopped && static_cast<std::int64_t>(path.events.size()) >= params.max_events) {
            stopped = true;
            path.truncated = true;
        }
        if (stopped) {
            // Everything left in the heap survives to the horizon unsplit.
            heap.pop();
            path.terminal_blocks.push_back({b.key, b.size, b.birth, b.parent, false});
            continue;
        }
        heap.pop();

        const auto& atom = nu.atoms()[pick_atom(nu, b.key)];
        JumpEvent ev;
        ev.time = b.t_split;
        ev.parent_block = b.key;
        ev.parent_size = b.size;
        ev.ratios = atom.ratios;
        ev.child_blocks.reserve(atom.ratios.size());
        for (std::size_t i = 0; i < atom.ratios.size(); ++i) {
            std::uint64_t child_key = derive_key(b.key, kChildBase + i);
            double child_size = b.size * atom.ratios[i];
            ev.child_blocks.push_back(child_key);
            if (child_size < floor_abs) {
                path.terminal_blocks.push_back({child_key, child_size, b.t_split, b.key, true});
            } else {
                heap.push({b.t_split + split_wait(child_key, child_size, nu.total_rate(),
                                                  params.alpha),
                           child_key, child_size, b.t_split, b.key});
            }
        }
        path.split_index.emplace(b.key, path.events.size());
        path.events.push_back(std::move(ev));
    }
    return path;
}

PathRecord simulate_to_stopline(const DislocationMeasure& nu, SimulationParams params, double eta,
                                double initial_mass, int max_doublings) {
    if (!(eta > 0.0 && eta <= 1.0))
        throw std::invalid_argument("simulate_to_stopline: eta must lie in (0,1]");
    params.size_floor = std::min(params.size_floor, 0.5 * eta);
    if (params.horizon <= 0.0) params.horizon = 1.0;  // a zero horizon cannot be doubled
    const double threshold = eta * initial_mass;
    for (int attempt = 0; attempt <= max_doublings; ++attempt) {
        PathRecord path = simulate(nu, params, initial_mass);
        if (path.truncated)
            throw std::runtime_error(
                "simulate_to_stopline: max_events exceeded; enlarge the event cap");
        bool complete = std::all_of(
            path.terminal_blocks.begin(), path.terminal_blocks.end(),
            [&](const BlockState& b) { return b.size < threshold; });
        if (complete) return path;
        params.horizon *= 2.0;
    }
    throw std::runtime_error("simulate_to_stopline: stopping line still incomplete after doubling "
                             "the horizon " +
                             std::to_string(max_doublings) + " times");
}

RankedMassVector masses_at(const PathRecord& path, double t) {
    if (!(t >= 0.0 && t <= path.params.horizon))
        throw std::invalid_argument("masses_at: t outside [0, horizon]");
    std::unordered_map<std::uint64_t, double> alive;
    alive.emplace(path.root_id, path.initial_mass);
    for (const auto& ev : path.events) {
        if (ev.time > t) break;
        alive.erase(ev.parent_block);
        for (std::size_t i = 0; i < ev.ratios.size(); ++i)
            alive.emplace(ev.child_blocks[i], ev.parent_size * ev.ratios[i]);
    }
    std::vector<double> sizes;
    sizes.reserve(alive.size());
    for (const auto& [id, size] : alive) sizes.push_back(size);
    return RankedMassVector(std::move(sizes));
}

double additive_martingale(const PathRecord& path, double p, double t, double phi_value) {
    if (!(p > -1.0)) throw std::invalid_argument("additive_martingale: p must exceed -1");
    for (const auto& b : path.terminal_blocks)
        if (b.frozen && b.birth_time <= t)
            throw std::runtime_error(
                "additive_martingale: a block froze before t; rerun with a smaller size_floor");
    double sum = 0.0;
    for (double m : masses_at(path, t)) sum += std::pow(m / path.initial_mass, 1.0 + p);
    return sum * std::exp(phi_value * t);
}

void write_event_log(const PathRecord& path, std::ostream& os) {
    os << "time,parent_id,parent_size";
    std::size_t max_children = 0;
    for (const auto& ev : path.events) max_children = std::max(max_children, ev.ratios.size());
    for (std::size_t i = 0; i < max_children; ++i) os << ",ratio" << (i + 1);
    os << '\n';
    os.precision(17);
    for (const auto& ev : path.events) {
        os << ev.time << ',' << ev.parent_block << ',' << ev.parent_size;
        for (double r : ev.ratios) os << ',' << r;
        for (std::size_t i = ev.ratios.size(); i < max_children; ++i) os << ',';
        os << '\n';
    }
}

namespace {

std::vector<double> pruned_trajectory(const DislocationMeasure& nu, double alpha,
                                      const std::vector<double>& t_grid, std::uint64_t seed,
                                      double floor) {
    MinHeap heap;
    std::multiset<double> alive;
    std::uint64_t root = derive_key(seed, 0);
    alive.insert(1.0);
    heap.push({split_wait(root, 1.0, nu.total_rate(), alpha), root, 1.0, 0.0, std::nullopt});

    std::vector<double> out;
    out.reserve(t_grid.size());
    auto current_max = [&] { return alive.empty() ? 0.0 : *alive.rbegin(); };

    while (!heap.empty() && out.size() < t_grid.size()) {
        Pending b = heap.top();
        while (out.size() < t_grid.size() && t_grid[out.size()] < b.t_split)
            out.push_back(current_max());
        if (out.size() == t_grid.size()) break;
        heap.pop();
        alive.erase(alive.find(b.size));
        const auto& atom = nu.atoms()[pick_atom(nu, b.key)];
        for (std::size_t i = 0; i < atom.ratios.size(); ++i) {
            double child_size = b.size * atom.ratios[i];
            if (child_size < floor) continue;  // cannot be the largest block on the grid
            std::uint64_t child_key = derive_key(b.key, kChildBase + i);
            alive.insert(child_size);
            heap.push({b.t_split + split_wait(child_key, child_size, nu.total_rate(), alpha),
                       child_key, child_size, b.t_split, b.key});
        }
    }
    while (out.size() < t_grid.size()) out.push_back(current_max());
    return out;
}

}  // namespace

std::vector<double> largest_block_trajectory(const DislocationMeasure& nu, double alpha,
                                             const std::vector<double>& t_grid,
                                             std::uint64_t seed, double prune_floor_hint) {
    if (t_grid.empty()) throw std::invalid_argument("largest_block_trajectory: empty grid");
    if (!std::is_sorted(t_grid.begin(), t_grid.end()))
        throw std::invalid_argument("largest_block_trajectory: grid must be sorted");
    double floor = std::min(std::max(prune_floor_hint, 1e-300), 0.5);
    for (int attempt = 0; attempt < 60; ++attempt) {
        std::vector<double> traj = pruned_trajectory(nu, alpha, t_grid, seed, floor);
        // Pruning is exact iff the floor never exceeded the true largest block,
        // which is certified by the trajectory itself staying above the floor.
        if (traj.back() >= floor) return traj;
        floor *= 0.25;
    }
    throw std::runtime_error("largest_block_trajectory: could not certify the pruning floor");
}

}  // namespace frag
