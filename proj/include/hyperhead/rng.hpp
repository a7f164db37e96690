#pragma once

#include <cstdint>

#include "hyperhead/matrix.hpp"

namespace hyperhead {

// Deterministic xorshift-family generator: xoshiro256** seeded through
// SplitMix64. Chosen over the platform RNG so that seeded runs are
// bit-identical across compilers and machines.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();
    // Uniform in [0, 1).
    double next_uniform();
    // Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n);
    // Standard normal via Box-Muller (one cached value).
    double next_normal();

    Matrix normal_matrix(std::size_t rows, std::size_t cols, double std_dev);
    Matrix uniform_matrix(std::size_t rows, std::size_t cols, double lo, double hi);

private:
    std::uint64_t s_[4];
    bool has_cached_ = false;
    double cached_ = 0.0;
};

// Convenience: a fresh generator per call; same seed -> bit-identical output.
Matrix seeded_normal(std::uint64_t seed, std::size_t rows, std::size_t cols, double std_dev);

} // namespace hyperhead
