#include "frag/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "frag/rng.hpp"

namespace frag {

Moments Moments::merge(const Moments& a, const Moments& b) {
    if (a.n == 0) return b;
    if (b.n == 0) return a;
    Moments out;
    out.n = a.n + b.n;
    double d = b.mean - a.mean;
    double na = static_cast<double>(a.n);
    double nb = static_cast<double>(b.n);
    double nt = static_cast<double>(out.n);
    out.mean = a.mean + d * nb / nt;
    out.m2 = a.m2 + b.m2 + d * d * na * nb / nt;
    return out;
}

int resolve_workers(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("FRAGSIM_WORKERS")) {
        int w = std::atoi(env);
        if (w > 0) return w;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

namespace {

// Runs body(i) for i in [0, n) on `workers` threads; the first exception
// thrown by any worker is rethrown on the calling thread after the join.
void parallel_indices(std::int64_t n, int workers,
                      const std::function<void(std::int64_t)>& body) {
    if (workers <= 1) {
        for (std::int64_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::int64_t chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        std::int64_t begin = w * chunk;
        std::int64_t end = std::min(n, begin + chunk);
        pool.emplace_back([&, begin, end] {
            try {
                for (std::int64_t i = begin; i < end; ++i) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace

MCResult run_mc(const std::function<double(std::int64_t, std::uint64_t)>& statistic,
                const MCParams& mc) {
    if (mc.n_paths < 1) throw std::invalid_argument("run_mc: n_paths must be >= 1");
    if (!(mc.ci_level > 0.0 && mc.ci_level < 1.0))
        throw std::invalid_argument("run_mc: ci_level must lie in (0,1)");

    std::vector<double> values(static_cast<std::size_t>(mc.n_paths));
    int workers = std::min<std::int64_t>(resolve_workers(mc.workers), mc.n_paths);
    parallel_indices(mc.n_paths, workers, [&](std::int64_t i) {
        values[i] = statistic(i, mc.base_seed ^ static_cast<std::uint64_t>(i));
    });

    // Deterministic batched reduction in index order.
    std::int64_t batch = std::max<std::int64_t>(1, mc.batch);
    Moments total;
    for (std::int64_t b = 0; b < mc.n_paths; b += batch) {
        Moments part;
        std::int64_t end = std::min(mc.n_paths, b + batch);
        for (std::int64_t i = b; i < end; ++i) part.add(values[i]);
        total = Moments::merge(total, part);
    }

    MCResult r{};
    r.n = total.n;
    r.mean = total.mean;
    if (total.n < 2) {
        r.se = r.ci_lo = r.ci_hi = std::numeric_limits<double>::quiet_NaN();
        return r;
    }
    r.se = std::sqrt(total.variance() / static_cast<double>(total.n));
    double z = normal_quantile(0.5 + 0.5 * mc.ci_level);
    r.ci_lo = r.mean - z * r.se;
    r.ci_hi = r.mean + z * r.se;
    return r;
}

std::vector<MCResult> run_mc_multi(
    const std::function<std::vector<double>(std::int64_t, std::uint64_t)>& statistic,
    std::size_t dim, const MCParams& mc) {
    if (mc.n_paths < 1) throw std::invalid_argument("run_mc_multi: n_paths must be >= 1");
    if (dim == 0) throw std::invalid_argument("run_mc_multi: dim must be positive");

    std::vector<std::vector<double>> values(static_cast<std::size_t>(mc.n_paths));
    int workers = std::min<std::int64_t>(resolve_workers(mc.workers), mc.n_paths);
    parallel_indices(mc.n_paths, workers, [&](std::int64_t i) {
        values[i] = statistic(i, mc.base_seed ^ static_cast<std::uint64_t>(i));
        if (values[i].size() != dim)
            throw std::invalid_argument("run_mc_multi: statistic returned the wrong dimension");
    });

    std::vector<MCResult> out(dim);
    std::int64_t batch = std::max<std::int64_t>(1, mc.batch);
    double z = normal_quantile(0.5 + 0.5 * mc.ci_level);
    for (std::size_t d = 0; d < dim; ++d) {
        Moments total;
        for (std::int64_t b = 0; b < mc.n_paths; b += batch) {
            Moments part;
            std::int64_t end = std::min(mc.n_paths, b + batch);
            for (std::int64_t i = b; i < end; ++i) part.add(values[i][d]);
            total = Moments::merge(total, part);
        }
        MCResult& r = out[d];
        r.n = total.n;
        r.mean = total.mean;
        if (total.n < 2) {
            r.se = r.ci_lo = r.ci_hi = std::numeric_limits<double>::quiet_NaN();
        } else {
            r.se = std::sqrt(total.variance() / static_cast<double>(total.n));
            r.ci_lo = r.mean - z * r.se;
            r.ci_hi = r.mean + z * r.se;
        }
    }
    return out;
}

void SummaryTable::write_csv(std::ostream& os) const {
    os << "statistic,grid,mean,stderr,ci_lo,ci_hi,n\n";
    os.precision(17);
    for (const auto& row : rows)
        os << row.statistic << ',' << row.grid << ',' << row.mean << ',' << row.se << ','
           << row.ci_lo << ',' << row.ci_hi << ',' << row.n << '\n';
}

namespace {

double ols_slope(const std::vector<const std::vector<std::pair<double, double>>*>& paths,
                 double* intercept) {
    double n = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto* p : paths)
        for (const auto& [x, y] : *p) {
            n += 1.0;
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
    double denom = n * sxx - sx * sx;
    if (!(denom > 0.0)) throw std::invalid_argument("slope_regression: degenerate design matrix");
    double slope = (n * sxy - sx * sy) / denom;
    if (intercept) *intercept = (sy - slope * sx) / n;
    return slope;
}

}  // namespace

SlopeFit slope_regression(const std::vector<std::vector<std::pair<double, double>>>& paths,
                          int bootstrap_n, double ci_level, std::uint64_t seed) {
    if (paths.empty()) throw std::invalid_argument("slope_regression: no paths");
    std::vector<const std::vector<std::pair<double, double>>*> all;
    all.reserve(paths.size());
    for (const auto& p : paths) all.push_back(&p);

    SlopeFit fit{};
    fit.slope = ols_slope(all, &fit.intercept);

    if (bootstrap_n > 0 && paths.size() > 1) {
        CounterRng rng(derive_key(seed, 0xb007));
        std::vector<double> slopes;
        slopes.reserve(bootstrap_n);
        std::vector<const std::vector<std::pair<double, double>>*> sample(paths.size());
        for (int b = 0; b < bootstrap_n; ++b) {
            for (auto& slot : sample)
                slot = &paths[static_cast<std::size_t>(rng.uniform() * paths.size())];
            slopes.push_back(ols_slope(sample, nullptr));
        }
        std::sort(slopes.begin(), slopes.end());
        double alpha = 0.5 * (1.0 - ci_level);
        auto pick = [&](double q) {
            double pos = q * (slopes.size() - 1);
            std::size_t i = static_cast<std::size_t>(pos);
            double frac = pos - i;
            return i + 1 < slopes.size() ? slopes[i] * (1.0 - frac) + slopes[i + 1] * frac
                                         : slopes.back();
        };
        fit.ci_lo = pick(alpha);
        fit.ci_hi = pick(1.0 - alpha);
    } else {
        fit.ci_lo = fit.ci_hi = fit.slope;
    }
    return fit;
}

double normal_quantile(double prob) {
    boost::math::normal_distribution<double> dist;
    return boost::math::quantile(dist, prob);
}

double chi_square_pvalue(double statistic, int dof) {
    boost::math::chi_squared_distribution<double> dist(dof);
    return boost::math::cdf(boost::math::complement(dist, statistic));
}

}  // namespace frag
