#pragma once

#include <cmath>
#include <cstdint>

// Counter-based random number generation. Every stream is a pure function
// of a 64-bit key and a running counter, so substreams can be derived from
// genealogical positions and replayed bit-identically in any order and on
// any number of threads.

namespace frag {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

// Derives an independent child key; index 0 is valid.
constexpr std::uint64_t derive_key(std::uint64_t key, std::uint64_t index) {
    return mix64(key + kGolden * (index + 1));
}

class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) : key_(key) {}

    std::uint64_t next_u64() { return mix64(key_ + kGolden * ++counter_); }

    // Uniform on (0,1), never exactly 0 or 1.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53 + 0x1.0p-54;
    }

    double exponential(double rate) { return -std::log(uniform()) / rate; }

    // Index into a cumulative-weight table; weights need not be normalised.
    template <typename Weights>
    std::size_t categorical(const Weights& weights, double total) {
        double u = uniform() * total;
        double acc = 0.0;
        std::size_t last = 0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            acc += weights[i];
            last = i;
            if (u < acc) return i;
        }
        return last;
    }

    // Knuth multiplication method; fine for the desk-scale means used here.
    std::int64_t poisson(double mean) {
        if (mean <= 0.0) return 0;
        double limit = std::exp(-mean);
        double prod = 1.0;
        std::int64_t n = -1;
        do {
            prod *= uniform();
            ++n;
        } while (prod > limit);
        return n;
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace frag
