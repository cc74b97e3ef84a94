#pragma once

#include <cstdint>
#include <random>

namespace chainprop {

// SplitMix64 finalizer. Used to derive independent stream seeds from a base seed.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Stream tags keep topology, mining and race draws decorrelated even when
// they share a base seed and repetition index.
enum class Stream : std::uint64_t {
    topology = 1,
    mining = 2,
    race = 3,
};

constexpr std::uint64_t derive_seed(std::uint64_t base, Stream stream, std::uint64_t index) {
    return splitmix64(splitmix64(base ^ (static_cast<std::uint64_t>(stream) << 56)) + index);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform in [0,1) from the top 53 bits; identical across standard libraries.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    long poisson(double mean) {
        if (mean <= 0.0) return 0;
        std::poisson_distribution<long> dist(mean);
        return dist(engine_);
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace chainprop
