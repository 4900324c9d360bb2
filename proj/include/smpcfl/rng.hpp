#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "smpcfl/ring.hpp"

namespace smpcfl {

// splitmix64 finalizer; used to derive independent sub-seeds from one
// experiment seed so reruns are bit-reproducible.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic seed derivation: fold a label and an index into a base seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view label, std::uint64_t index = 0) {
    std::uint64_t h = base;
    for (char c : label) h = splitmix64(h ^ static_cast<std::uint8_t>(c));
    return splitmix64(h ^ index);
}

// Seeded generator handed to every randomized operation (sharing, dealer,
// training shuffles). Same seed, same stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t u64() { return gen_(); }

    // Uniform in [0, N); exact because N is a power of two.
    RingElement ring(const FixedPointConfig& cfg) { return RingElement{gen_() & cfg.mask()}; }

    // Uniform in [0, n).
    std::uint64_t below(std::uint64_t n) {
        std::uniform_int_distribution<std::uint64_t> d(0, n - 1);
        return d(gen_);
    }

    double normal(double mean, double stddev) {
        std::normal_distribution<double> d(mean, stddev);
        return d(gen_);
    }

    double uniform(double lo, double hi) {
        std::uniform_real_distribution<double> d(lo, hi);
        return d(gen_);
    }

    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
};

} // namespace smpcfl
