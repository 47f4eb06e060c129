#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace mtcsim {

// Deterministic random source. The engine (std::mt19937_64) has a
// standard-pinned output sequence, and all samplers below are implemented
// here rather than with std::*_distribution, whose algorithms vary between
// standard libraries. Same seed, same draws, on any platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    // Uniform integer in [0, bound), bound > 0. Rejection keeps it unbiased.
    std::uint64_t below(std::uint64_t bound);

    // Exact Poisson sample: Knuth's product method, split additively for
    // large means (a sum of independent Poissons is Poisson).
    int poisson(double mean);

    // k distinct values from {0, ..., n-1}, uniform over subsets, sorted.
    std::vector<int> sample_without_replacement(int n, int k);

private:
    std::mt19937_64 engine_;
};

// Derives an independent stream seed from a list of parts (splitmix64 chain).
std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts);

}  // namespace mtcsim
