#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "frag/config.hpp"
#include "frag/stats.hpp"
#include "frag/stopline.hpp"

using namespace frag;

namespace {

SimulationParams params_with(double horizon, double floor, std::uint64_t seed) {
    SimulationParams p;
    p.horizon = horizon;
    p.size_floor = floor;
    p.seed = seed;
    return p;
}

}  // namespace

TEST_CASE("binary stop line at 0.3 is four quarters") {
    DislocationMeasure nu = make_measure("binary");
    PathRecord path = simulate_to_stopline(nu, params_with(10.0, 0.14, 4), 0.3);
    StoppedConfiguration sc = stop_at(path, 0.3);
    REQUIRE(sc.blocks.size() == 4);
    for (const auto& b : sc.blocks) {
        CHECK(b.size == 0.25);
        CHECK(b.parent_size == 0.5);
        CHECK(b.creation_time > 0.0);
    }
    CHECK(lambda_martingale(sc, 0.0) == doctest::Approx(1.0).epsilon(1e-14));

    // size/eta = 5/6 for every block: indicator windows pick it up exactly.
    TestFunction in = TestFunction::indicator(0.8, 0.9);
    CHECK(empirical_mean(sc, in, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    TestFunction out = TestFunction::indicator(0.0, 0.8);
    CHECK(empirical_mean(sc, out, 0.0) == 0.0);
}

TEST_CASE("stop_at reports unfinished lines") {
    DislocationMeasure nu = make_measure("binary");
    PathRecord path = simulate(nu, params_with(0.0, 1e-9, 9));  // nothing ever splits
    try {
        stop_at(path, 0.5);
        FAIL("expected IncompleteStopLine");
    } catch (const IncompleteStopLine& e) {
        REQUIRE(e.unfinished.size() == 1);
        CHECK(e.unfinished.front() == path.root_id);
    }
}

TEST_CASE("stop_at validates eta against the simulation floor") {
    DislocationMeasure nu = make_measure("binary");
    PathRecord path = simulate(nu, params_with(2.0, 0.01, 2));
    CHECK_THROWS_AS(stop_at(path, 0.005), std::invalid_argument);
    CHECK_THROWS_AS(stop_at(path, 1.5), std::invalid_argument);
}

TEST_CASE("stopped martingale keeps unit mean for the dissipative measure") {
    // With a single dislocation atom, sum r^{1+p*} = 1 exactly, so the
    // stopped martingale is conserved split by split: it is 1 on every path
    // up to floating-point rounding, not merely in the mean.
    DislocationMeasure nu = make_measure("dissipative");
    double p_star = malthusian(nu);
    auto statistic = [&](std::int64_t, std::uint64_t seed) {
        SimulationParams params = params_with(10.0, 0.49 * 0.02, seed);
        PathRecord path = simulate_to_stopline(nu, params, 0.02);
        return lambda_martingale(stop_at(path, 0.02), p_star);
    };
    MCParams mc;
    mc.n_paths = 500;
    mc.base_seed = 77;
    MCResult r = run_mc(statistic, mc);
    CHECK(std::abs(r.mean - 1.0) <= 1e-11);
    CHECK(r.se <= 1e-11);
}

TEST_CASE("stopped blocks sum to total mass for conservative measures") {
    DislocationMeasure nu = make_measure("mixture");
    SimulationParams params = params_with(10.0, 0.49 * 0.05, 31);
    PathRecord path = simulate_to_stopline(nu, params, 0.05);
    StoppedConfiguration sc = stop_at(path, 0.05);
    double total = 0.0;
    for (const auto& b : sc.blocks) {
        total += b.size;
        CHECK(b.size < 0.05);
        CHECK(b.parent_size >= 0.05);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("stopped CSV has the documented header") {
    DislocationMeasure nu = make_measure("binary");
    PathRecord path = simulate_to_stopline(nu, params_with(10.0, 0.14, 4), 0.3);
    std::ostringstream os;
    write_stopped_csv(stop_at(path, 0.3), os);
    CHECK(os.str().rfind("eta,size,parent_size,creation_time\n", 0) == 0);
}
