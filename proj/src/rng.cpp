#include "pathcov/rng.hpp"

#include <cassert>

namespace pathcov {

std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t RngHandle::uniform_below(std::uint64_t bound)
{
    assert(bound > 0);
    // Values below `threshold` would bias the low residues.
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        const auto x = engine_();
        if (x >= threshold)
            return x % bound;
    }
}

mpz_class RngHandle::uniform_below(const mpz_class& bound)
{
    assert(bound > 0);
    if (bound.fits_ulong_p())
        return mpz_class(uniform_below(static_cast<std::uint64_t>(bound.get_ui())));

    const mpz_class top = bound - 1;
    const auto bits = mpz_sizeinbase(top.get_mpz_t(), 2);
    const auto words = (bits + 63) / 64;
    const auto top_bits = bits - (words - 1) * 64;
    const std::uint64_t top_mask = top_bits == 64 ? ~0ULL : ((1ULL << top_bits) - 1);

    mpz_class value;
    for (;;) {
        // Most significant word first, masked to the bit length of bound-1.
        value = engine_() & top_mask;
        for (std::size_t w = 1; w < words; ++w) {
            value <<= 64;
            mpz_class word;
            const auto x = engine_();
            mpz_import(word.get_mpz_t(), 1, 1, sizeof(x), 0, 0, &x);
            value += word;
        }
        if (value < bound)
            return value;
    }
}

double RngHandle::uniform_real()
{
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

RngHandle RngHandle::derive(std::uint64_t stream) const
{
    return RngHandle(splitmix64(seed_ ^ splitmix64(stream + 0x632be59bd9b4e019ULL)));
}

} // namespace pathcov
