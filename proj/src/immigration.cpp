#include "frag/immigration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "frag/rng.hpp"

namespace frag {

namespace {

constexpr std::uint64_t kArrivalSalt = 0xA11;
constexpr std::uint64_t kPathSalt = 0x1bb;

const PathRecord& built_path(const ImmigrantRecord& rec) {
    if (!rec.path)
        throw std::runtime_error("immigration: immigrant path not built (use make_composite)");
    return *rec.path;
}

}  // namespace

const RankedMassVector& MarkSampler::sample(double u) const {
    if (choices.empty()) throw std::invalid_argument("MarkSampler: no choices");
    double target = u * total_weight();
    double acc = 0.0;
    for (const auto& [w, config] : choices) {
        acc += w;
        if (target < acc) return config;
    }
    return choices.back().second;
}

double MarkSampler::total_weight() const {
    double total = 0.0;
    for (const auto& [w, config] : choices) {
        if (!(w > 0.0)) throw std::invalid_argument("MarkSampler: weights must be positive");
        total += w;
    }
    return total;
}

double MarkSampler::mean_power_sum(double q) const {
    double total = total_weight();
    double sum = 0.0;
    for (const auto& [w, config] : choices) sum += w * config.power_sum(q);
    return sum / total;
}

double CompositePath::mass_summability(double p_star) const {
    double sum = 0.0;
    for (const auto& rec : immigrants) sum += std::pow(rec.v, 1.0 + p_star);
    return sum;
}

std::vector<ImmigrantRecord> sample_immigration(const ImmigrationSchedule& schedule,
                                                std::uint64_t seed) {
    if (schedule.rate < 0.0 || schedule.horizon < 0.0)
        throw std::invalid_argument("sample_immigration: rate and horizon must be >= 0");

    std::vector<std::pair<double, RankedMassVector>> configs;  // arrival time, raw mark
    configs.emplace_back(0.0, schedule.initial_config);

    if (schedule.rate > 0.0 && schedule.horizon > 0.0) {
        CounterRng rng(derive_key(seed, kArrivalSalt));
        std::int64_t n = rng.poisson(schedule.rate * schedule.horizon);
        std::vector<double> times(static_cast<std::size_t>(n));
        for (auto& t : times) t = rng.uniform() * schedule.horizon;
        std::sort(times.begin(), times.end());
        for (double t : times) configs.emplace_back(t, schedule.mark.sample(rng.uniform()));
    }

    std::vector<ImmigrantRecord> records;
    std::uint64_t path_key = derive_key(seed, kPathSalt);
    for (const auto& [t, config] : configs) {
        double scale = std::exp(-schedule.size_decay_theta * t);
        for (double m : config) {
            ImmigrantRecord rec;
            rec.j = records.size();
            rec.t_immigrate = t;
            rec.v = m * scale;
            rec.path_seed = derive_key(path_key, rec.j);
            records.push_back(std::move(rec));
        }
    }
    return records;
}

CompositePath make_composite(const DislocationMeasure& nu, const ImmigrationSchedule& schedule,
                             std::uint64_t seed, const SimulationParams& base, double min_eta,
                             double min_local_horizon) {
    CompositePath cp;
    cp.schedule = schedule;
    cp.immigrants = sample_immigration(schedule, seed);

    for (auto& rec : cp.immigrants) {
        SimulationParams params = base;
        params.seed = rec.path_seed;
        params.horizon = std::max(base.horizon, min_local_horizon);
        if (min_eta > 0.0 && rec.v >= min_eta) {
            // Deep enough that stop lines at any eta >= min_eta exist; freezing
            // just below the local line keeps the event count proportional to
            // the number of stopped blocks.
            double eta_local = min_eta / rec.v;
            params.size_floor = 0.49 * eta_local;
            rec.path = std::make_shared<const PathRecord>(
                simulate_to_stopline(nu, params, eta_local));
        } else {
            rec.path = std::make_shared<const PathRecord>(simulate(nu, params));
        }
    }
    return cp;
}

double composite_empirical(const CompositePath& cp, const std::vector<TestFunction>& fs,
                           double eta, const std::vector<double>& p_stars) {
    if (!(eta > 0.0)) throw std::invalid_argument("composite_empirical: eta must be positive");
    auto sized = [&](std::size_t n) {
        return n == 1 || n == cp.immigrants.size();
    };
    if (fs.empty() || p_stars.empty() || !sized(fs.size()) || !sized(p_stars.size()))
        throw std::invalid_argument(
            "composite_empirical: fs and p_stars need 1 or n_immigrants entries");

    double total = 0.0;
    for (std::size_t i = 0; i < cp.immigrants.size(); ++i) {
        const ImmigrantRecord& rec = cp.immigrants[i];
        const TestFunction& f = fs[fs.size() == 1 ? 0 : i];
        double p_star = p_stars[p_stars.size() == 1 ? 0 : i];
        double vp = std::pow(rec.v, 1.0 + p_star);
        if (rec.v < eta) {
            total += vp * f(rec.v / eta);
        } else {
            StoppedConfiguration sc = stop_at(built_path(rec), eta / rec.v);
            total += vp * empirical_mean(sc, f, p_star);
        }
    }
    return total;
}

double composite_count(const CompositePath& cp, const Characteristic& phi, double eta) {
    if (!(eta > 0.0)) throw std::invalid_argument("composite_count: eta must be positive");
    double total = 0.0;
    for (const auto& rec : cp.immigrants) {
        if (rec.v < eta) continue;  // every x exceeds 1, the characteristic vanishes
        total += count_with_characteristic(built_path(rec), phi, eta / rec.v);
    }
    return total;
}

LargestBlockInfo largest_block(const CompositePath& cp, double t) {
    LargestBlockInfo best{0.0, 0, 0.0};
    for (const auto& rec : cp.immigrants) {
        if (rec.t_immigrate > t) continue;
        double size = rec.v * masses_at(built_path(rec), t - rec.t_immigrate).largest();
        if (size > best.size) best = {size, rec.j, rec.t_immigrate};
    }
    return best;
}

double composite_martingale(const CompositePath& cp, double p, double t, double phi_value) {
    double total = 0.0;
    for (const auto& rec : cp.immigrants) {
        if (rec.t_immigrate > t) continue;
        total += std::pow(rec.v, 1.0 + p) *
                 additive_martingale(built_path(rec), p, t - rec.t_immigrate, phi_value);
    }
    return total;
}

std::vector<LimitTableRow> lambda_I_limit_estimate(const CompositePath& cp,
                                                   const std::vector<double>& eta_grid,
                                                   double p_star) {
    std::vector<LimitTableRow> rows;
    rows.reserve(eta_grid.size());
    double q = 1.0 + p_star;
    for (double eta : eta_grid) {
        LimitTableRow row{eta, 0.0, 0.0, 0.0};
        double eta2 = eta * eta;
        for (const auto& rec : cp.immigrants) {
            double vp = std::pow(rec.v, q);
            if (rec.v < eta) {
                row.value += vp;
                row.small_immigrant_tail += vp;
                if (rec.v < eta2) row.small_block_subsum += vp;
            } else {
                StoppedConfiguration sc = stop_at(built_path(rec), eta / rec.v);
                for (const auto& b : sc.blocks) {
                    double abs_size = rec.v * b.size;
                    double term = std::pow(abs_size, q);
                    row.value += term;
                    if (abs_size < eta2) row.small_block_subsum += term;
                }
            }
        }
        rows.push_back(row);
    }
    return rows;
}

CompositeTrajectory composite_largest_trajectory(const DislocationMeasure& nu,
                                                 const ImmigrationSchedule& schedule,
                                                 std::uint64_t seed,
                                                 const std::vector<double>& t_grid,
                                                 double phi_prime_bar) {
    if (t_grid.empty())
        throw std::invalid_argument("composite_largest_trajectory: empty grid");
    if (!std::is_sorted(t_grid.begin(), t_grid.end()))
        throw std::invalid_argument("composite_largest_trajectory: grid must be increasing");

    std::vector<ImmigrantRecord> records = sample_immigration(schedule, seed);
    double t_last = t_grid.back();

    CompositeTrajectory out;
    out.lambda1.assign(t_grid.size(), 0.0);
    out.t_immigrate_argmax.assign(t_grid.size(), 0.0);

    for (const auto& rec : records) {
        if (rec.t_immigrate > t_last) continue;
        std::vector<double> local_grid;
        std::vector<std::size_t> grid_index;
        for (std::size_t i = 0; i < t_grid.size(); ++i) {
            if (t_grid[i] >= rec.t_immigrate) {
                local_grid.push_back(t_grid[i] - rec.t_immigrate);
                grid_index.push_back(i);
            }
        }
        double hint = std::exp(-phi_prime_bar * (t_last - rec.t_immigrate)) / 25.0;
        std::vector<double> traj =
            largest_block_trajectory(nu, 0.0, local_grid, rec.path_seed, hint);
        for (std::size_t k = 0; k < traj.size(); ++k) {
            double size = rec.v * traj[k];
            std::size_t i = grid_index[k];
            if (size > out.lambda1[i]) {  // strict: ties keep the earlier immigrant
                out.lambda1[i] = size;
                out.t_immigrate_argmax[i] = rec.t_immigrate;
            }
        }
    }
    return out;
}

DecayEstimate decay_rate_estimate(const std::vector<CompositeTrajectory>& ensemble,
                                  const std::vector<double>& t_grid, int bootstrap_n,
                                  double ci_level, std::uint64_t seed) {
    if (ensemble.empty()) throw std::invalid_argument("decay_rate_estimate: empty ensemble");

    std::vector<std::vector<std::pair<double, double>>> paths;
    paths.reserve(ensemble.size());
    double tj_over_t = 0.0;
    for (const auto& traj : ensemble) {
        if (traj.lambda1.size() != t_grid.size())
            throw std::invalid_argument("decay_rate_estimate: trajectory/grid size mismatch");
        std::vector<std::pair<double, double>> pts;
        for (std::size_t i = 0; i < t_grid.size(); ++i) {
            if (!(traj.lambda1[i] > 0.0))
                throw std::runtime_error("decay_rate_estimate: vanished largest block");
            pts.emplace_back(t_grid[i], -std::log(traj.lambda1[i]));
            if (t_grid[i] > 0.0)
                tj_over_t = std::max(tj_over_t, traj.t_immigrate_argmax[i] / t_grid[i]);
        }
        paths.push_back(std::move(pts));
    }

    SlopeFit fit = slope_regression(paths, bootstrap_n, ci_level, seed);
    return {fit.slope, fit.ci_lo, fit.ci_hi, tj_over_t};
}

}  // namespace frag
