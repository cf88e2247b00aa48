#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace frag {

// A finite non-increasing sequence of positive masses. Depending on context
// the entries are mass fractions (elements of S1, sum <= 1) or absolute
// block sizes (elements of S).
class RankedMassVector {
public:
    RankedMassVector() = default;

    // Accepts entries in any order; sorts decreasingly and drops nothing.
    explicit RankedMassVector(std::vector<double> masses) : masses_(std::move(masses)) {
        for (double m : masses_) {
            if (!(m > 0.0) || !std::isfinite(m))
                throw std::invalid_argument("RankedMassVector: masses must be positive and finite");
        }
        std::sort(masses_.begin(), masses_.end(), std::greater<double>());
    }

    std::size_t size() const { return masses_.size(); }
    bool empty() const { return masses_.empty(); }
    double operator[](std::size_t i) const { return masses_[i]; }
    const std::vector<double>& masses() const { return masses_; }

    auto begin() const { return masses_.begin(); }
    auto end() const { return masses_.end(); }

    double sum() const { return std::accumulate(masses_.begin(), masses_.end(), 0.0); }

    // Sum of m^q over all entries.
    double power_sum(double q) const {
        double s = 0.0;
        for (double m : masses_) s += std::pow(m, q);
        return s;
    }

    double largest() const { return masses_.empty() ? 0.0 : masses_.front(); }

    bool in_unit_simplex(double tol = 1e-12) const { return sum() <= 1.0 + tol; }

    // Decreasingly ordered concatenation (the + operator on S).
    friend RankedMassVector operator+(const RankedMassVector& a, const RankedMassVector& b) {
        std::vector<double> merged;
        merged.reserve(a.size() + b.size());
        std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(merged),
                   std::greater<double>());
        RankedMassVector out;
        out.masses_ = std::move(merged);
        return out;
    }

private:
    std::vector<double> masses_;
};

}  // namespace frag
