#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace frag {

struct MCParams {
    std::int64_t n_paths = 1000;
    std::uint64_t base_seed = 1;
    std::int64_t batch = 1024;  // reduction batch size (result-invariant)
    double ci_level = 0.99;
    int workers = 0;  // 0: FRAGSIM_WORKERS env var, else hardware concurrency
};

struct MCResult {
    double mean;
    double se;     // NaN when n < 2
    double ci_lo;  // normal-approximation interval
    double ci_hi;
    std::int64_t n;
};

// Streaming mean/variance accumulator with exact pairwise merge.
struct Moments {
    std::int64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    static Moments merge(const Moments& a, const Moments& b);
    double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
};

// Evaluates statistic(i, base_seed ^ i) for i in [0, n_paths), in parallel,
// and reduces in index order: the result is bit-identical for any worker
// count. The statistic must be a pure function of (index, seed).
MCResult run_mc(const std::function<double(std::int64_t index, std::uint64_t seed)>& statistic,
                const MCParams& mc);

// Same contract as run_mc for a statistic producing `dim` values per path
// (one simulation shared by several readouts); returns one MCResult per slot.
std::vector<MCResult> run_mc_multi(
    const std::function<std::vector<double>(std::int64_t index, std::uint64_t seed)>& statistic,
    std::size_t dim, const MCParams& mc);

struct SummaryRow {
    std::string statistic;
    double grid;
    double mean;
    double se;
    double ci_lo;
    double ci_hi;
    std::int64_t n;
};

struct SummaryTable {
    std::vector<SummaryRow> rows;

    void add(const std::string& statistic, double grid, const MCResult& r) {
        rows.push_back({statistic, grid, r.mean, r.se, r.ci_lo, r.ci_hi, r.n});
    }
    // Fixed column order: statistic,grid,mean,stderr,ci_lo,ci_hi,n
    void write_csv(std::ostream& os) const;
};

struct SlopeFit {
    double slope;
    double intercept;
    double ci_lo;  // percentile bootstrap over path resampling
    double ci_hi;
};

// Pooled OLS of value on t across paths; each inner vector is one path's
// (t, value) samples and is the resampling unit for the bootstrap.
SlopeFit slope_regression(const std::vector<std::vector<std::pair<double, double>>>& paths,
                          int bootstrap_n, double ci_level = 0.99, std::uint64_t seed = 7);

double normal_quantile(double prob);
double chi_square_pvalue(double statistic, int dof);

int resolve_workers(int requested);

}  // namespace frag
