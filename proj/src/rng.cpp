#include "mtcsim/rng.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

namespace mtcsim {

std::uint64_t Rng::below(std::uint64_t bound) {
    assert(bound > 0);
    // 2^64 mod bound; reject the top partial block.
    std::uint64_t rem = (std::numeric_limits<std::uint64_t>::max() % bound) + 1;
    if (rem == bound) {
        rem = 0;
    }
    std::uint64_t x = next_u64();
    while (rem != 0 && x > std::numeric_limits<std::uint64_t>::max() - rem) {
        x = next_u64();
    }
    return x % bound;
}

namespace {

int poisson_knuth(Rng& rng, double mean) {
    const double limit = std::exp(-mean);
    int k = 0;
    double p = 1.0;
    do {
        ++k;
        p *= rng.uniform();
    } while (p > limit);
    return k - 1;
}

}  // namespace

int Rng::poisson(double mean) {
    if (mean <= 0.0) {
        return 0;
    }
    int total = 0;
    while (mean > 30.0) {
        total += poisson_knuth(*this, 25.0);
        mean -= 25.0;
    }
    return total + poisson_knuth(*this, mean);
}

std::vector<int> Rng::sample_without_replacement(int n, int k) {
    assert(k >= 0 && k <= n);
    std::vector<int> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < k; ++i) {
        const auto j = i + static_cast<int>(below(static_cast<std::uint64_t>(n - i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    pool.resize(static_cast<std::size_t>(k));
    std::sort(pool.begin(), pool.end());
    return pool;
}

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t state = 0x243f6a8885a308d3ULL;  // pi digits, arbitrary nonzero
    std::uint64_t out = 0;
    for (std::uint64_t part : parts) {
        state ^= part;
        out = splitmix64(state);
    }
    return out;
}

}  // namespace mtcsim
