#include "frag/characteristic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "frag/rng.hpp"

namespace frag {

namespace {

constexpr std::uint64_t kEventNoiseSalt = 0x5eedf00dULL;

void require_complete(const PathRecord& path, double eta) {
    if (!(eta > 0.0 && eta <= 1.0))
        throw std::invalid_argument("count_with_characteristic: eta must lie in (0,1]");
    std::vector<std::uint64_t> unfinished;
    for (const auto& b : path.terminal_blocks)
        if (!b.frozen && b.size >= eta * path.initial_mass) unfinished.push_back(b.id);
    if (!unfinished.empty()) {
        std::ostringstream msg;
        msg << "count_with_characteristic: path incomplete above eta = " << eta
            << " (extend the horizon)";
        throw IncompleteStopLine(msg.str(), std::move(unfinished));
    }
}

}  // namespace

Characteristic zero_characteristic() {
    return {"zero", [](double, const RankedMassVector&, std::uint64_t) { return 0.0; }};
}

Characteristic counting_characteristic() {
    return {"count", [](double x, const RankedMassVector&, std::uint64_t) {
                return (x > 0.0 && x <= 1.0) ? 1.0 : 0.0;
            }};
}

Characteristic empirical_adapter(const TestFunction& f, double p_star) {
    Characteristic phi;
    phi.name = "adapter";
    phi.evaluate = [f, p_star](double x, const RankedMassVector& ratios, std::uint64_t) {
        if (x <= 0.0 || x > 1.0) return 0.0;
        double sum = 0.0;
        for (double s : ratios)
            if (s < x) sum += std::pow(s / x, 1.0 + p_star) * f(s / x);
        return sum;
    };
    phi.x_breakpoints = [f](const RankedMassVector& ratios) {
        std::vector<double> cuts;
        for (double s : ratios) {
            if (s < 1.0) cuts.push_back(s);
            for (double b : f.breakpoints()) {
                double x = s / b;  // where s/x crosses a breakpoint of f
                if (x > 0.0 && x < 1.0) cuts.push_back(x);
            }
        }
        return cuts;
    };
    return phi;
}

double count_with_characteristic(const PathRecord& path, const Characteristic& phi, double eta) {
    require_complete(path, eta);
    double sum = 0.0;
    for (std::size_t i = 0; i < path.events.size(); ++i) {
        const JumpEvent& ev = path.events[i];
        double rel_parent = ev.parent_size / path.initial_mass;
        if (rel_parent < eta) continue;  // phi vanishes for x > 1
        std::uint64_t noise = derive_key(path.params.seed ^ kEventNoiseSalt, i);
        sum += phi.evaluate(eta / rel_parent, ev.ratios, noise);
    }
    return sum;
}

double energy(const PathRecord& path, const EnergySpec& spec, double eta, double p_star) {
    if (!(spec.p < p_star)) throw std::invalid_argument("energy: requires p < p*");
    require_complete(path, eta);
    double sum = 0.0;
    for (const auto& ev : path.events) {
        double rel_parent = ev.parent_size / path.initial_mass;
        if (rel_parent < eta) continue;
        sum += std::pow(rel_parent, 1.0 + spec.p) * spec.psi(ev.ratios);
    }
    return sum;
}

namespace {

// int_lo^hi u^{p*} phi(u, ratios) du by midpoint-refined Simpson on pieces
// split at the ratio values (where the adapter jumps).
double atom_u_integral(const Characteristic& phi, const RankedMassVector& ratios, double p_star,
                       std::uint64_t noise) {
    auto g = [&](double u) { return std::pow(u, p_star) * phi.evaluate(u, ratios, noise); };
    std::vector<double> cuts{1.0};
    if (phi.x_breakpoints)
        for (double x : phi.x_breakpoints(ratios))
            if (x > 0.0 && x < 1.0) cuts.push_back(x);
    else
        for (double r : ratios)
            if (r > 0.0 && r < 1.0) cuts.push_back(r);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    // Dyadic refinement toward 0 below the smallest cut; the terms must decay
    // or the u-integral does not exist.
    double total = 0.0;
    auto simpson_piece = [&](double a, double b) {
        int n = 64;  // fixed composite Simpson per smooth piece
        double h = (b - a) / n;
        double s = g(a + 1e-15) + g(b - 1e-15);
        for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * g(a + i * h);
        return s * h / 3.0;
    };
    double lo = cuts.front();
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) total += simpson_piece(cuts[i], cuts[i + 1]);

    double prev_term = std::numeric_limits<double>::infinity();
    double hi = lo;
    for (int k = 0; hi > 1e-12; ++k) {
        double a = hi * 0.5;
        double term = simpson_piece(a, hi);
        if (k > 4 && std::abs(term) > std::abs(prev_term) && std::abs(term) > 1e-12 * std::abs(total))
            throw std::runtime_error(
                "limit_constant_estimate: u^{p*} phi(u,.) appears non-integrable near 0");
        total += term;
        prev_term = term;
        hi = a;
    }
    return total;
}

}  // namespace

LimitConstantEstimate limit_constant_estimate(const DislocationMeasure& nu,
                                              const Characteristic& phi, double p_star,
                                              const MCParams& mc) {
    if (mc.n_paths < 100)
        throw std::invalid_argument("limit_constant_estimate: needs at least 100 paths");

    double c_phi = 0.0;
    for (std::size_t a = 0; a < nu.atoms().size(); ++a) {
        const auto& atom = nu.atoms()[a];
        c_phi += atom.weight *
                 atom_u_integral(phi, atom.ratios, p_star, derive_key(0xA70, a));
    }
    double scale = c_phi / phi_prime(nu, p_star);

    // Path factor: int_0^1 sum_k size_k(t)^{1+p*} dt, exact because the sum
    // is piecewise constant between jump events.
    auto path_factor = [&](std::int64_t, std::uint64_t seed) {
        SimulationParams params;
        params.horizon = 1.0;
        params.size_floor = 1e-12;
        params.seed = seed;
        PathRecord path = simulate(nu, params);
        double integral = 0.0;
        double current = 1.0;
        double t_prev = 0.0;
        for (const auto& ev : path.events) {
            integral += current * (ev.time - t_prev);
            t_prev = ev.time;
            double q = 1.0 + p_star;
            current -= std::pow(ev.parent_size, q);
            for (double r : ev.ratios) current += std::pow(ev.parent_size * r, q);
        }
        integral += current * (1.0 - t_prev);
        return integral;
    };

    MCResult r = run_mc(path_factor, mc);
    return {r.mean * scale, r.se * std::abs(scale)};
}

}  // namespace frag
