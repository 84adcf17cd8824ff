#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace sonata {

/// SplitMix64 finalizer. Used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed for stream `stream` of master seed `seed`. Adding streams never
/// changes the seeds of existing ones.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Deterministic generator whose output depends only on the seed, never on
/// the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();
    /// Uniform on [0, 1).
    double uniform();
    double uniform(double lo, double hi);
    /// Standard normal (Box-Muller).
    double normal();
    /// Uniform on {0, ..., n-1}.
    std::size_t index(std::size_t n);
    bool bernoulli(double p) { return uniform() < p; }

private:
    std::mt19937_64 engine_;
    double cached_normal_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace sonata
