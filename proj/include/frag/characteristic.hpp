#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "frag/fragcore.hpp"
#include "frag/stats.hpp"
#include "frag/stopline.hpp"
#include "frag/test_function.hpp"

namespace frag {

// Per-dislocation-event score. The "random" part is driven entirely by the
// explicit noise seed, so the characteristic stays independent of the
// fragmentation while the whole computation remains replayable.
struct Characteristic {
    std::string name;
    // x = eta / parent_size; must return 0 for x > 1 and for ratios == (1,0,...).
    std::function<double(double x, const RankedMassVector& ratios, std::uint64_t noise_seed)>
        evaluate;
    // Optional: x-locations in (0,1) where evaluate(., ratios, .) jumps, so
    // quadrature in x can split there.
    std::function<std::vector<double>(const RankedMassVector& ratios)> x_breakpoints;
};

// Identically zero.
Characteristic zero_characteristic();

// phi(x, s) = 1 for x in (0,1]: counts dislocation events with parent >= eta.
Characteristic counting_characteristic();

// phi(x, s) = sum_n 1{s_n < x <= 1} (s_n/x)^{1+p*} f(s_n/x). Satisfies the
// exact identity eta^{1+p*} Z^phi_eta = <rho_eta, f> on every path.
Characteristic empirical_adapter(const TestFunction& f, double p_star);

struct EnergySpec {
    double p;  // energy exponent, must satisfy p < p*
    std::function<double(const RankedMassVector&)> psi;  // bounded
    std::string psi_name = "one";
};

// Z^phi_eta = sum over events with parent_size >= eta (relative to the
// initial mass) of evaluate(eta/parent, ratios, per-event noise seed).
double count_with_characteristic(const PathRecord& path, const Characteristic& phi, double eta);

// Energy cost to crush past eta: sum over events with parent >= eta of
// parent^{1+p} psi(ratios). Rejects p >= p_star.
double energy(const PathRecord& path, const EnergySpec& spec, double eta, double p_star);

struct LimitConstantEstimate {
    double estimate;
    double stderr_;
};

// Monte-Carlo estimate of the deterministic limit constant
// (1/Phi'(p*)) int_0^1 E(sum_k size_k(t)^{1+p*}) dt * sum_a w_a int_0^1 u^{p*} phi(u, s_a) du.
// The u-integrals use adaptive quadrature per atom; the path factor is
// averaged over mc.n_paths simulations.
LimitConstantEstimate limit_constant_estimate(const DislocationMeasure& nu,
                                              const Characteristic& phi, double p_star,
                                              const MCParams& mc);

}  // namespace frag
