#pragma once

#include <cstdint>
#include <random>

#include <gmpxx.h>

namespace pathcov {

/// Seeded generator used by every stochastic operation.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. All distributions are implemented here on top of raw 64-bit
/// draws (std:: distributions are implementation-defined), so a seed and a
/// call sequence reproduce the same outputs on every platform.
class RngHandle {
public:
    explicit RngHandle(std::uint64_t seed = default_seed) : seed_(seed), engine_(seed) {}

    static constexpr std::uint64_t default_seed = 20180901;

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, bound), bound > 0. Rejection sampling, no modulo bias.
    std::uint64_t uniform_below(std::uint64_t bound);

    /// Uniform in [0, bound), bound > 0, arbitrary precision.
    mpz_class uniform_below(const mpz_class& bound);

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform_real();

    /// Independent stream keyed by (seed, stream); used for per-column and
    /// per-trial generators.
    RngHandle derive(std::uint64_t stream) const;

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

} // namespace pathcov
