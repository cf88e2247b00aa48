#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "frag/stats.hpp"

using namespace frag;

TEST_CASE("run_mc on a constant statistic") {
    auto statistic = [](std::int64_t, std::uint64_t) { return 2.5; };
    MCParams mc;
    mc.n_paths = 100;
    MCResult r = run_mc(statistic, mc);
    CHECK(r.mean == 2.5);
    CHECK(r.se == 0.0);
    CHECK(r.ci_lo == 2.5);
    CHECK(r.ci_hi == 2.5);
    CHECK(r.n == 100);
}

TEST_CASE("results are bit-identical across worker counts") {
    // A seed-dependent, deliberately ill-conditioned statistic.
    auto statistic = [](std::int64_t i, std::uint64_t seed) {
        std::mt19937_64 gen(seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        return 1e6 * normal(gen) + std::sin(static_cast<double>(i));
    };
    MCParams mc;
    mc.n_paths = 5000;
    mc.base_seed = 4;
    mc.workers = 1;
    MCResult a = run_mc(statistic, mc);
    mc.workers = 8;
    MCResult b = run_mc(statistic, mc);
    CHECK(a.mean == b.mean);
    CHECK(a.se == b.se);
    CHECK(a.ci_lo == b.ci_lo);
    CHECK(a.ci_hi == b.ci_hi);
}

TEST_CASE("run_mc_multi matches two independent run_mc calls") {
    auto multi = [](std::int64_t i, std::uint64_t seed) {
        std::mt19937_64 gen(seed);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double x = u(gen);
        return std::vector<double>{x, x * x + static_cast<double>(i % 2)};
    };
    MCParams mc;
    mc.n_paths = 2000;
    mc.base_seed = 9;
    auto rs = run_mc_multi(multi, 2, mc);
    REQUIRE(rs.size() == 2);
    auto first = [&](std::int64_t i, std::uint64_t seed) { return multi(i, seed)[0]; };
    auto second = [&](std::int64_t i, std::uint64_t seed) { return multi(i, seed)[1]; };
    CHECK(rs[0].mean == run_mc(first, mc).mean);
    CHECK(rs[1].mean == run_mc(second, mc).mean);
    CHECK(rs[0].se == run_mc(first, mc).se);

    auto wrong = [](std::int64_t, std::uint64_t) { return std::vector<double>{1.0}; };
    CHECK_THROWS_AS(run_mc_multi(wrong, 2, mc), std::invalid_argument);
}

TEST_CASE("Moments merge agrees with a single pass") {
    std::mt19937_64 gen(1);
    std::normal_distribution<double> normal(3.0, 2.0);
    std::vector<double> xs(1000);
    for (double& x : xs) x = normal(gen);

    Moments whole;
    for (double x : xs) whole.add(x);
    for (std::size_t cut : {1UL, 137UL, 500UL, 999UL}) {
        Moments lo, hi;
        for (std::size_t i = 0; i < cut; ++i) lo.add(xs[i]);
        for (std::size_t i = cut; i < xs.size(); ++i) hi.add(xs[i]);
        Moments merged = Moments::merge(lo, hi);
        CHECK(merged.n == whole.n);
        CHECK(merged.mean == doctest::Approx(whole.mean).epsilon(1e-13));
        CHECK(merged.variance() == doctest::Approx(whole.variance()).epsilon(1e-12));
    }
    Moments empty;
    Moments same = Moments::merge(empty, whole);
    CHECK(same.n == whole.n);
    CHECK(same.mean == whole.mean);
}

TEST_CASE("slope_regression is exact on noiseless lines") {
    std::vector<std::vector<std::pair<double, double>>> paths(4);
    for (auto& path : paths)
        for (double t : {1.0, 2.0, 5.0, 9.0}) path.push_back({t, 4.0 - 0.7 * t});
    SlopeFit fit = slope_regression(paths, 60);
    CHECK(fit.slope == doctest::Approx(-0.7).epsilon(1e-12));
    CHECK(fit.intercept == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(fit.ci_lo == doctest::Approx(-0.7).epsilon(1e-9));
    CHECK(fit.ci_hi == doctest::Approx(-0.7).epsilon(1e-9));

    std::vector<std::vector<std::pair<double, double>>> degenerate(2);
    for (auto& path : degenerate) path.push_back({1.0, 1.0});
    CHECK_THROWS_AS(slope_regression(degenerate, 10), std::invalid_argument);
    CHECK_THROWS_AS(slope_regression({}, 10), std::invalid_argument);
}

TEST_CASE("bootstrap interval covers the truth on noisy replicates") {
    std::mt19937_64 gen(2026);
    std::normal_distribution<double> noise(0.0, 0.05);
    int covered = 0;
    const int replicates = 100;
    for (int rep = 0; rep < replicates; ++rep) {
        std::vector<std::vector<std::pair<double, double>>> paths(30);
        for (auto& path : paths) {
            double shift = noise(gen);  // per-path level noise: the resampling unit
            for (double t : {1.0, 2.0, 3.0, 4.0})
                path.push_back({t, 1.0 - 0.5 * t + shift + 0.2 * noise(gen)});
        }
        SlopeFit fit = slope_regression(paths, 300, 0.99, 1000 + rep);
        if (fit.ci_lo <= -0.5 && -0.5 <= fit.ci_hi) ++covered;
    }
    // Nominal coverage is 99%; the percentile bootstrap undercovers a little
    // at 30 paths, so gate well below the nominal level but far above chance.
    CHECK(covered >= 90);
}

TEST_CASE("normal quantile and chi-square tail values") {
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959964).epsilon(1e-5));
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(normal_quantile(0.995) == doctest::Approx(2.575829).epsilon(1e-5));
    CHECK(chi_square_pvalue(3.841459, 1) == doctest::Approx(0.05).epsilon(1e-5));
    CHECK(chi_square_pvalue(0.0, 3) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("summary table CSV layout") {
    SummaryTable table;
    MCResult r{1.5, 0.1, 1.2, 1.8, 10};
    table.add("lambda", 0.25, r);
    std::ostringstream os;
    table.write_csv(os);
    std::string text = os.str();
    CHECK(text.rfind("statistic,grid,mean,stderr,ci_lo,ci_hi,n\n", 0) == 0);
    CHECK(text.find("lambda,") != std::string::npos);
}

TEST_CASE("resolve_workers honors explicit requests") {
    CHECK(resolve_workers(3) == 3);
    CHECK(resolve_workers(1) == 1);
    CHECK(resolve_workers(0) >= 1);
}
