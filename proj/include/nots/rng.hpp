#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace nots {

/// Seeded random stream. Streams derived from the same seed with different
/// ids are independent, so work can be split by (seed, index).
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    /// Child stream; does not advance this generator.
    Rng derive(std::uint64_t stream) const;

    std::uint64_t seed() const { return seed_; }
    std::uint64_t next_u64() { return engine_(); }
    double uniform();
    double normal();
    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n);

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace nots
