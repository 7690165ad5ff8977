#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace pfl {

using Rng = std::mt19937_64;

/// splitmix64 finaliser; child seeds for (base, counter) pairs.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t counter)
{
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (counter + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Fisher-Yates with a fixed index draw so results do not depend on the
/// standard library's distribution implementations.
template <class T>
void shuffle_in_place(std::vector<T>& v, Rng& rng)
{
    for (std::size_t i = v.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(v[i - 1], v[j]);
    }
}

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(Rng& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace pfl
