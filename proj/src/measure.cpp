#include "frag/measure.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace frag {

namespace {

void require_valid_p(double p) {
    if (!(p > -1.0))
        throw std::invalid_argument("phi: p must exceed -1 for finite discrete measures");
}

// Plain bisection; the bracket is supplied by the callers.
double bisect(const std::function<double(double)>& g, double lo, double hi, double tol,
              const char* what) {
    double glo = g(lo);
    double ghi = g(hi);
    if (glo == 0.0) return lo;
    if (ghi == 0.0) return hi;
    if ((glo > 0.0) == (ghi > 0.0)) {
        std::ostringstream msg;
        msg << what << ": no sign change on [" << lo << ", " << hi << "]";
        throw std::runtime_error(msg.str());
    }
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        double gm = g(mid);
        if (std::abs(gm) < tol && (hi - lo) < 1e-14 * std::max(1.0, std::abs(mid))) return mid;
        if ((gm > 0.0) == (glo > 0.0)) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    double res = 0.5 * (lo + hi);
    if (std::abs(g(res)) >= tol) {
        std::ostringstream msg;
        msg << what << ": bisection residual " << g(res) << " above tol " << tol;
        throw std::runtime_error(msg.str());
    }
    return res;
}

double simpson(const std::function<double(double)>& g, double a, double b, double fa, double fm,
               double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson(const std::function<double(double)>& g, double a, double b, double fa,
                        double fm, double fb, double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m);
    double rm = 0.5 * (m + b);
    double flm = g(lm);
    double frm = g(rm);
    double left = simpson(g, a, m, fa, flm, fm);
    double right = simpson(g, m, b, fm, frm, fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& g, double a, double b, double tol) {
    if (b <= a) return 0.0;
    double m = 0.5 * (a + b);
    double fa = g(a);
    double fm = g(m);
    double fb = g(b);
    return adaptive_simpson(g, a, b, fa, fm, fb, simpson(g, a, b, fa, fm, fb), tol, 48);
}

}  // namespace

DislocationMeasure::DislocationMeasure(std::vector<DislocationAtom> atoms)
    : atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw std::invalid_argument("DislocationMeasure: no atoms");
    for (const auto& a : atoms_) {
        if (!(a.weight > 0.0) || !std::isfinite(a.weight))
            throw std::invalid_argument("DislocationMeasure: weights must be positive");
        if (a.ratios.empty())
            throw std::invalid_argument("DislocationMeasure: atom with no ratios");
        if (!a.ratios.in_unit_simplex())
            throw std::invalid_argument("DislocationMeasure: atom ratios must sum to at most 1");
        if (a.ratios.size() == 1 && a.ratios[0] >= 1.0)
            throw std::invalid_argument("DislocationMeasure: the atom (1,0,...) is not allowed");
        total_rate_ += a.weight;
    }
}

bool DislocationMeasure::conservative(double tol) const {
    for (const auto& a : atoms_)
        if (a.ratios.sum() < 1.0 - tol) return false;
    return true;
}

double DislocationMeasure::min_ratio() const {
    double m = 1.0;
    for (const auto& a : atoms_)
        for (double r : a.ratios) m = std::min(m, r);
    return m;
}

double phi(const DislocationMeasure& nu, double p) {
    require_valid_p(p);
    double s = 0.0;
    for (const auto& a : nu.atoms()) s += a.weight * (1.0 - a.ratios.power_sum(1.0 + p));
    return s;
}

double phi_prime(const DislocationMeasure& nu, double p) {
    require_valid_p(p);
    double s = 0.0;
    for (const auto& a : nu.atoms())
        for (double r : a.ratios) s += a.weight * std::pow(r, 1.0 + p) * std::log(1.0 / r);
    return s;
}

double malthusian(const DislocationMeasure& nu, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("malthusian: tol must be positive");
    if (nu.conservative()) return 0.0;
    // Dissipative: Phi(0) > 0 and Phi(p) -> -inf as p -> -1+. Expand the
    // bracket toward -1 until the sign change appears.
    double hi = 0.0;
    double lo = -0.5;
    while (phi(nu, lo) > 0.0) {
        lo = -1.0 + 0.5 * (1.0 + lo);
        if (1.0 + lo < 1e-12)
            throw std::runtime_error(
                "malthusian: no root of Phi on (-1, 0); the measure violates the Malthusian "
                "hypothesis");
    }
    return bisect([&](double p) { return phi(nu, p); }, lo, hi, tol, "malthusian");
}

double pbar(const DislocationMeasure& nu, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("pbar: tol must be positive");
    auto g = [&](double p) { return (1.0 + p) * phi_prime(nu, p) - phi(nu, p); };
    // g > 0 below pbar and g < 0 above it. Start just above p* and expand.
    double lo = malthusian(nu, tol) + 1e-9;
    if (g(lo) <= 0.0) lo = -1.0 + 1e-9;
    double hi = 1.0;
    while (g(hi) > 0.0) {
        hi *= 2.0;
        if (hi > 64.0)
            throw std::runtime_error("pbar: no root of (1+p)Phi'(p) = Phi(p) found up to p = 64");
    }
    return bisect(g, lo, hi, tol, "pbar");
}

StructuralConstants structural_constants(const DislocationMeasure& nu, double tol) {
    StructuralConstants c{};
    c.p_lower = -1.0;
    c.conservative = nu.conservative();
    c.p_star = malthusian(nu, tol);
    c.p_bar = pbar(nu, tol);
    c.phi_prime_at_star = phi_prime(nu, c.p_star);
    c.phi_prime_at_bar = phi_prime(nu, c.p_bar);
    return c;
}

double rho_pairing(const DislocationMeasure& nu, const TestFunction& f, double p_star,
                   double quad_tol) {
    if (!(quad_tol > 0.0)) throw std::invalid_argument("rho_pairing: quad_tol must be positive");
    double dphi = phi_prime(nu, p_star);

    // Inner sum S(t) = sum_a w_a sum_n 1{r_n < t} r_n^{1+p*}; piecewise
    // constant with jumps exactly at the atom ratios.
    auto inner = [&](double t) {
        double s = 0.0;
        for (const auto& a : nu.atoms())
            for (double r : a.ratios)
                if (r < t) s += a.weight * std::pow(r, 1.0 + p_star);
        return s;
    };
    auto integrand = [&](double t) { return t > 0.0 ? f(t) * inner(t) / t : 0.0; };

    std::vector<double> cuts{0.0, 1.0};
    for (const auto& a : nu.atoms())
        for (double r : a.ratios)
            if (r < 1.0) cuts.push_back(r);
    for (double b : f.breakpoints()) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    double total = 0.0;
    double piece_tol = quad_tol / static_cast<double>(cuts.size());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        // Nudge inward so each piece sees a smooth integrand.
        double a = cuts[i] + 1e-14;
        double b = cuts[i + 1] - 1e-14;
        if (b > a) total += integrate(integrand, a, b, piece_tol);
    }
    return total / dphi;
}

}  // namespace frag
