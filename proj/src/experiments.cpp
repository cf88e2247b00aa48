#include "frag/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>
#include <vector>

#include "frag/characteristic.hpp"
#include "frag/fragcore.hpp"
#include "frag/immigration.hpp"
#include "frag/measure.hpp"
#include "frag/rng.hpp"
#include "frag/spine.hpp"
#include "frag/stats.hpp"
#include "frag/stopline.hpp"
#include "frag/verify.hpp"

namespace frag {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void require_grid(const std::vector<double>& grid, const char* name) {
    if (grid.empty())
        throw ConfigError(std::string("config error at grids.") + name +
                          ": required by this experiment kind");
}

void add_exact(SummaryTable& table, const std::string& statistic, double grid, double value) {
    table.rows.push_back({statistic, grid, value, 0.0, value, value, 1});
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& writer) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write output file: " + path.string());
    writer(os);
}

template <typename Body>
void parallel_for(std::int64_t n, int workers, const Body& body) {
    workers = std::min<std::int64_t>(std::max(workers, 1), n);
    if (workers <= 1) {
        for (std::int64_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::int64_t chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        std::int64_t begin = w * chunk;
        std::int64_t end = std::min(n, begin + chunk);
        pool.emplace_back([&, begin, end] {
            for (std::int64_t i = begin; i < end; ++i) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

SummaryTable run_phi(const ExperimentConfig& cfg) {
    require_grid(cfg.p_grid, "p");
    SummaryTable table;
    for (double p : cfg.p_grid) {
        add_exact(table, "phi", p, phi(cfg.measure, p));
        add_exact(table, "phi_prime", p, phi_prime(cfg.measure, p));
    }
    StructuralConstants sc = structural_constants(cfg.measure);
    add_exact(table, "p_star", 0.0, sc.p_star);
    add_exact(table, "p_bar", 0.0, sc.p_bar);
    add_exact(table, "phi_prime_at_star", 0.0, sc.phi_prime_at_star);
    add_exact(table, "phi_prime_at_bar", 0.0, sc.phi_prime_at_bar);
    return table;
}

SummaryTable run_simulate(const ExperimentConfig& cfg, const fs::path& out_dir) {
    PathRecord path = simulate(cfg.measure, cfg.sim);
    write_file(out_dir / "events.csv", [&](std::ostream& os) { write_event_log(path, os); });
    SummaryTable table;
    add_exact(table, "n_events", 0.0, static_cast<double>(path.events.size()));
    add_exact(table, "n_terminal_blocks", 0.0, static_cast<double>(path.terminal_blocks.size()));
    RankedMassVector final_masses = masses_at(path, cfg.sim.horizon);
    add_exact(table, "largest_at_horizon", 0.0, final_masses.largest());
    add_exact(table, "total_mass_at_horizon", 0.0, final_masses.sum());
    add_exact(table, "truncated", 0.0, path.truncated ? 1.0 : 0.0);
    return table;
}

SummaryTable run_stopline(const ExperimentConfig& cfg, const fs::path& out_dir) {
    require_grid(cfg.eta_grid, "eta");
    double p_star = malthusian(cfg.measure);
    TestFunction f = make_test_function(cfg.f_spec);

    SummaryTable table;
    for (double eta : cfg.eta_grid) {
        auto statistic = [&](std::int64_t, std::uint64_t seed) {
            SimulationParams params = cfg.sim;
            params.seed = seed;
            // Any floor below eta/2 yields the identical stop line; take the
            // cheapest one instead of inheriting the much deeper default.
            params.size_floor = 0.49 * eta;
            PathRecord path = simulate_to_stopline(cfg.measure, params, eta);
            StoppedConfiguration sc = stop_at(path, eta);
            return std::vector<double>{lambda_martingale(sc, p_star),
                                       empirical_mean(sc, f, p_star)};
        };
        auto results = run_mc_multi(statistic, 2, cfg.mc);
        table.add("lambda_martingale", eta, results[0]);
        table.add("empirical_mean", eta, results[1]);
    }

    SimulationParams params = cfg.sim;
    params.size_floor = 0.49 * cfg.eta_grid.front();
    PathRecord path = simulate_to_stopline(cfg.measure, params, cfg.eta_grid.front());
    StoppedConfiguration sc = stop_at(path, cfg.eta_grid.front());
    write_file(out_dir / "stopped.csv", [&](std::ostream& os) { write_stopped_csv(sc, os); });
    return table;
}

SummaryTable run_characteristic(const ExperimentConfig& cfg) {
    require_grid(cfg.eta_grid, "eta");
    double p_star = malthusian(cfg.measure);
    double eta_min = *std::min_element(cfg.eta_grid.begin(), cfg.eta_grid.end());
    CharacteristicSpec spec = parse_characteristic_spec(cfg.characteristic_spec);

    auto base_path = [&](std::uint64_t seed) {
        SimulationParams params = cfg.sim;
        params.seed = seed;
        // Any floor below eta/2 yields the identical stop line; take the
        // cheapest one instead of inheriting the much deeper default.
        params.size_floor = 0.49 * eta_min;
        return simulate_to_stopline(cfg.measure, params, eta_min);
    };

    SummaryTable table;
    if (spec.kind == CharacteristicSpec::Kind::Energy) {
        EnergySpec espec = make_energy_spec(spec);
        if (!(espec.p < p_star))
            throw ConfigError("config error at characteristic: energy exponent must be < p*");
        auto statistic = [&](std::int64_t, std::uint64_t seed) {
            PathRecord path = base_path(seed);
            std::vector<double> out;
            for (double eta : cfg.eta_grid) out.push_back(energy(path, espec, eta, p_star));
            return out;
        };
        auto results = run_mc_multi(statistic, cfg.eta_grid.size(), cfg.mc);
        for (std::size_t i = 0; i < cfg.eta_grid.size(); ++i)
            table.add("energy", cfg.eta_grid[i], results[i]);
        return table;
    }

    Characteristic phi_c = make_characteristic(spec, p_star);
    auto statistic = [&](std::int64_t, std::uint64_t seed) {
        PathRecord path = base_path(seed);
        std::vector<double> out;
        for (double eta : cfg.eta_grid) {
            double z = count_with_characteristic(path, phi_c, eta);
            out.push_back(z);
            out.push_back(std::pow(eta, 1.0 + p_star) * z);
        }
        return out;
    };
    auto results = run_mc_multi(statistic, 2 * cfg.eta_grid.size(), cfg.mc);
    for (std::size_t i = 0; i < cfg.eta_grid.size(); ++i) {
        table.add("count_raw", cfg.eta_grid[i], results[2 * i]);
        table.add("count_scaled", cfg.eta_grid[i], results[2 * i + 1]);
    }
    return table;
}

SummaryTable run_immigration(const ExperimentConfig& cfg) {
    if (!cfg.schedule)
        throw ConfigError("config error at schedule: required by kind = immigration");
    require_grid(cfg.eta_grid, "eta");
    double p_star = malthusian(cfg.measure);
    TestFunction f = make_test_function(cfg.f_spec);
    double eta_min = *std::min_element(cfg.eta_grid.begin(), cfg.eta_grid.end());

    auto statistic = [&](std::int64_t, std::uint64_t seed) {
        CompositePath cp = make_composite(cfg.measure, *cfg.schedule, seed, cfg.sim, eta_min);
        auto rows = lambda_I_limit_estimate(cp, cfg.eta_grid, p_star);
        std::vector<double> out;
        for (std::size_t i = 0; i < cfg.eta_grid.size(); ++i) {
            out.push_back(composite_empirical(cp, {f}, cfg.eta_grid[i], {p_star}));
            out.push_back(rows[i].small_immigrant_tail);
            out.push_back(rows[i].small_block_subsum);
        }
        out.push_back(cp.mass_summability(p_star));
        return out;
    };
    auto results = run_mc_multi(statistic, 3 * cfg.eta_grid.size() + 1, cfg.mc);

    SummaryTable table;
    for (std::size_t i = 0; i < cfg.eta_grid.size(); ++i) {
        table.add("composite_empirical", cfg.eta_grid[i], results[3 * i]);
        table.add("small_immigrant_tail", cfg.eta_grid[i], results[3 * i + 1]);
        table.add("small_block_subsum", cfg.eta_grid[i], results[3 * i + 2]);
    }
    table.add("mass_summability", 0.0, results.back());
    return table;
}

SummaryTable run_decay(const ExperimentConfig& cfg, const fs::path& out_dir) {
    require_grid(cfg.t_grid, "t");
    if (cfg.t_grid.size() < 2)
        throw ConfigError("config error at grids.t: decay needs at least two times");
    StructuralConstants sc = structural_constants(cfg.measure);

    ImmigrationSchedule sched;
    sched.initial_config = RankedMassVector({1.0});
    if (cfg.schedule) sched = *cfg.schedule;

    std::vector<CompositeTrajectory> ensemble(cfg.mc.n_paths);
    parallel_for(cfg.mc.n_paths, resolve_workers(cfg.mc.workers), [&](std::int64_t i) {
        ensemble[i] = composite_largest_trajectory(
            cfg.measure, sched, cfg.mc.base_seed ^ static_cast<std::uint64_t>(i), cfg.t_grid,
            sc.phi_prime_at_bar);
    });

    write_file(out_dir / "trajectories.csv", [&](std::ostream& os) {
        os << "path,t,lambda1,t_immigrate_argmax\n";
        os.precision(17);
        for (std::size_t p = 0; p < ensemble.size(); ++p)
            for (std::size_t i = 0; i < cfg.t_grid.size(); ++i)
                os << p << ',' << cfg.t_grid[i] << ',' << ensemble[p].lambda1[i] << ','
                   << ensemble[p].t_immigrate_argmax[i] << '\n';
    });

    DecayEstimate est = decay_rate_estimate(ensemble, cfg.t_grid, 400, cfg.mc.ci_level,
                                            derive_key(cfg.mc.base_seed, 0xdeca));
    SummaryTable table;
    table.rows.push_back(
        {"decay_slope", 0.0, est.slope, 0.0, est.ci_lo, est.ci_hi, cfg.mc.n_paths});
    add_exact(table, "tj_over_t_max", 0.0, est.tj_over_t_max);
    add_exact(table, "phi_prime_at_bar", 0.0, sc.phi_prime_at_bar);
    return table;
}

SummaryTable run_spine(const ExperimentConfig& cfg, const fs::path& out_dir) {
    double p = cfg.p_grid.empty() ? 0.5 : cfg.p_grid.front();
    double horizon = cfg.sim.horizon;

    SpinePath path = simulate_spine(cfg.measure, p, horizon, cfg.sim.seed);
    write_file(out_dir / "spine.csv", [&](std::ostream& os) { write_spine_csv(path, os); });

    SummaryTable table;
    add_exact(table, "n_jumps", 0.0, static_cast<double>(path.jump_times.size()));
    add_exact(table, "spine_size_at_horizon", 0.0, path.spine_size_at(horizon));

    std::vector<double> qs = cfg.q_grid.empty() ? std::vector<double>{1.0} : cfg.q_grid;
    double t = cfg.t_grid.empty() ? horizon : cfg.t_grid.front();
    for (double q : qs) {
        TiltedMomentCheck c = tilted_moment_check(cfg.measure, p, q, t, cfg.mc);
        table.rows.push_back({"tilted_mc_mean", q, c.mc_mean, c.stderr_,
                              c.mc_mean - 3.0 * c.stderr_, c.mc_mean + 3.0 * c.stderr_,
                              cfg.mc.n_paths});
        add_exact(table, "tilted_analytic", q, c.analytic);
    }
    return table;
}

int run_verify(const ExperimentConfig& cfg, const fs::path& out_dir) {
    AcceptanceOptions opt;
    opt.workers = cfg.mc.workers;
    std::vector<CriterionResult> results = run_acceptance(opt);
    write_file(out_dir / "verdict.csv",
               [&](std::ostream& os) { write_verdict_csv(results, os); });
    for (const auto& r : results)
        std::cout << "criterion " << r.id << " (" << r.name << "): "
                  << (r.passed ? "PASS" : "FAIL") << (r.detail.empty() ? "" : " - " + r.detail)
                  << '\n';
    return all_passed(results) ? 0 : 1;
}

}  // namespace

int run_experiment(const ExperimentConfig& cfg, const nlohmann::json& config_echo) {
    // Config-level preconditions come before any filesystem writes, so a
    // malformed config leaves no partial outputs behind.
    if (cfg.kind == "phi") require_grid(cfg.p_grid, "p");
    if (cfg.kind == "stopline" || cfg.kind == "characteristic" || cfg.kind == "immigration")
        require_grid(cfg.eta_grid, "eta");
    if (cfg.kind == "immigration" && !cfg.schedule)
        throw ConfigError("config error at schedule: required by kind = immigration");
    if (cfg.kind == "decay" && cfg.t_grid.size() < 2)
        throw ConfigError("config error at grids.t: decay needs at least two times");

    fs::path out_dir(cfg.output_dir);
    fs::create_directories(out_dir);

    int exit_code = 0;
    SummaryTable table;
    if (cfg.kind == "phi") {
        table = run_phi(cfg);
    } else if (cfg.kind == "simulate") {
        table = run_simulate(cfg, out_dir);
    } else if (cfg.kind == "stopline") {
        table = run_stopline(cfg, out_dir);
    } else if (cfg.kind == "characteristic") {
        table = run_characteristic(cfg);
    } else if (cfg.kind == "immigration") {
        table = run_immigration(cfg);
    } else if (cfg.kind == "decay") {
        table = run_decay(cfg, out_dir);
    } else if (cfg.kind == "spine") {
        table = run_spine(cfg, out_dir);
    } else if (cfg.kind == "verify") {
        exit_code = run_verify(cfg, out_dir);
    } else {
        throw ConfigError("config error at kind: unknown kind '" + cfg.kind + "'");
    }

    if (cfg.kind != "verify")
        write_file(out_dir / "summary.csv", [&](std::ostream& os) { table.write_csv(os); });

    json manifest;
    manifest["kind"] = cfg.kind;
    manifest["config"] = config_echo;
    manifest["base_seed"] = cfg.mc.base_seed;
    manifest["sim_seed"] = cfg.sim.seed;
    manifest["workers_resolved"] = resolve_workers(cfg.mc.workers);
    manifest["exit_code"] = exit_code;
    write_file(out_dir / "manifest.json",
               [&](std::ostream& os) { os << manifest.dump(2) << '\n'; });
    return exit_code;
}

}  // namespace frag
