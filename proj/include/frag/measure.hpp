#pragma once

#include <stdexcept>
#include <vector>

#include "frag/ranked.hpp"
#include "frag/test_function.hpp"

namespace frag {

struct DislocationAtom {
    double weight;            // jump rate of this atom
    RankedMassVector ratios;  // element of S1
};

// Finite discrete dislocation measure nu on S1. Finite total rate is what
// makes exact event-driven simulation possible; infinite-activity measures
// have to be approximated by truncated discrete ones upstream.
class DislocationMeasure {
public:
    explicit DislocationMeasure(std::vector<DislocationAtom> atoms);

    const std::vector<DislocationAtom>& atoms() const { return atoms_; }
    double total_rate() const { return total_rate_; }

    // nu(sum s_n < 1) == 0 within tolerance.
    bool conservative(double tol = 1e-12) const;

    // Smallest ratio appearing in any atom (positive; simulation floors key off it).
    double min_ratio() const;

private:
    std::vector<DislocationAtom> atoms_;
    double total_rate_ = 0.0;
};

struct StructuralConstants {
    double p_lower;            // -1 for finite discrete measures
    double p_star;             // Malthusian parameter, root of Phi
    double p_bar;              // root of (1+p) Phi'(p) = Phi(p)
    double phi_prime_at_star;  // Phi'(p*)
    double phi_prime_at_bar;   // Phi'(p_bar), the largest-block decay rate
    bool conservative;
};

// Laplace exponent Phi(p) = sum_a w_a (1 - sum_n r_n^{1+p}), p > -1.
double phi(const DislocationMeasure& nu, double p);

// Phi'(p) = sum_a w_a sum_n r_n^{1+p} ln(1/r_n), strictly positive.
double phi_prime(const DislocationMeasure& nu, double p);

// Malthusian parameter p*: 0 for conservative measures, otherwise the unique
// root of Phi on (-1, 0) located by bisection to |Phi| < tol.
double malthusian(const DislocationMeasure& nu, double tol = 1e-12);

// Unique root of (1+p) Phi'(p) = Phi(p) on (-1, inf); always exceeds p*.
double pbar(const DislocationMeasure& nu, double tol = 1e-12);

StructuralConstants structural_constants(const DislocationMeasure& nu, double tol = 1e-12);

// <rho, f> = (1/Phi'(p*)) int_0^1 f(t) (sum_a w_a sum_n 1{r_n < t} r_n^{1+p*}) dt/t,
// adaptive Simpson split at the atom ratios and at f's own breakpoints so each
// piece is smooth. Absolute error <= quad_tol.
double rho_pairing(const DislocationMeasure& nu, const TestFunction& f, double p_star,
                   double quad_tol = 1e-9);

}  // namespace frag
