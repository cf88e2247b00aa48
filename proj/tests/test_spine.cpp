#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "frag/config.hpp"
#include "frag/spine.hpp"
#include "frag/stats.hpp"

using namespace frag;

TEST_CASE("binary spine at p = 0 halves at every jump") {
    DislocationMeasure B = make_measure("binary");
    SpinePath path = simulate_spine(B, 0.0, 6.0, 12);
    REQUIRE(!path.jump_times.empty());
    for (std::size_t n = 0; n < path.spine_sizes.size(); ++n) {
        CHECK(path.spine_sizes[n] == std::pow(2.0, -static_cast<double>(n + 1)));
        REQUIRE(path.sibling_configs[n].size() == 1);
        // Conservative: spine + sibling = previous spine size, exactly.
        double prev = n == 0 ? 1.0 : path.spine_sizes[n - 1];
        CHECK(path.spine_sizes[n] + path.sibling_configs[n].sum() == prev);
        if (n) CHECK(path.jump_times[n] > path.jump_times[n - 1]);
    }
    CHECK(path.xi_at(path.jump_times.back()) ==
          doctest::Approx(-std::log(path.spine_sizes.back())));
}

TEST_CASE("spine jump rates: 1 at p = 0 and 1/2 at p = 1") {
    DislocationMeasure B = make_measure("binary");
    MCParams mc;
    mc.n_paths = 4000;
    mc.base_seed = 31;
    for (auto [p, rate] : {std::pair{0.0, 1.0}, {1.0, 0.5}}) {
        auto statistic = [&, p = p](std::int64_t, std::uint64_t seed) {
            return static_cast<double>(simulate_spine(B, p, 4.0, seed).jump_times.size());
        };
        MCResult r = run_mc(statistic, mc);
        CHECK(std::abs(r.mean - 4.0 * rate) <= 3.0 * r.se);
    }
}

TEST_CASE("dissipative measures are rejected") {
    CHECK_THROWS_AS(simulate_spine(make_measure("dissipative"), 0.0, 1.0, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(simulate_spine(make_measure("binary"), -1.5, 1.0, 1), std::invalid_argument);
}

TEST_CASE("spine immigration measure reweights atom by atom") {
    DislocationMeasure B = make_measure("binary");
    CHECK(spine_immigration_measure(B, 0.0).atoms()[0].weight == doctest::Approx(1.0));
    CHECK(spine_immigration_measure(B, 1.0).atoms()[0].weight == doctest::Approx(0.5));

    DislocationMeasure X = make_measure("mixture");
    DislocationMeasure XI = spine_immigration_measure(X, 1.0);
    REQUIRE(XI.atoms().size() == 2);
    for (std::size_t a = 0; a < 2; ++a)
        CHECK(XI.atoms()[a].weight ==
              doctest::Approx(X.atoms()[a].weight * X.atoms()[a].ratios.power_sum(2.0)));
}

TEST_CASE("reconstruction: full = spine + immigrants, total mass one") {
    DislocationMeasure B = make_measure("binary");
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        SpineReconstruction rec = reconstruct(B, 0.5, 3.0, seed);
        for (int k = 0; k <= 10; ++k) {
            double t = 0.3 * k;
            ReconstructionSlice slice = rec.at(t);
            CHECK(std::abs(slice.full.sum() - 1.0) <= 1e-12);
            CHECK(std::abs(slice.full.sum() - slice.spine_size - slice.immigrant_total) <= 1e-12);
        }
        if (!rec.spine.jump_times.empty()) {
            double before = 0.5 * rec.spine.jump_times.front();
            ReconstructionSlice slice = rec.at(before);
            CHECK(slice.immigrant_blocks.empty());
            CHECK(slice.spine_size == 1.0);
        }
    }
}

TEST_CASE("tilted moments match the shifted Laplace exponent") {
    DislocationMeasure B = make_measure("binary");
    MCParams mc;
    mc.n_paths = 50;
    mc.base_seed = 2;
    TiltedMomentCheck trivial = tilted_moment_check(B, 0.5, 0.0, 2.0, mc);
    CHECK(trivial.mc_mean == 1.0);
    CHECK(trivial.analytic == 1.0);

    mc.n_paths = 4000;
    TiltedMomentCheck c = tilted_moment_check(B, 0.0, 1.0, 2.0, mc);
    CHECK(c.analytic == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(std::abs(c.mc_mean - c.analytic) <= 3.0 * c.stderr_);
}

TEST_CASE("sibling atom frequencies follow the reweighted measure") {
    DislocationMeasure X = make_measure("mixture");
    DislocationMeasure XI = spine_immigration_measure(X, 0.5);
    std::vector<std::int64_t> counts(2, 0);
    std::int64_t draws = 0;
    for (std::uint64_t i = 0; draws < 20000; ++i) {
        SpinePath sp = simulate_spine(X, 0.5, 5.0, 1000 + i);
        for (std::size_t a : sp.atom_indices) {
            ++counts[a];
            ++draws;
        }
    }
    double chi2 = 0.0;
    for (std::size_t a = 0; a < 2; ++a) {
        double expected = static_cast<double>(draws) * XI.atoms()[a].weight / XI.total_rate();
        chi2 += (counts[a] - expected) * (counts[a] - expected) / expected;
    }
    CHECK(chi_square_pvalue(chi2, 1) > 0.01);
}
