#pragma once

// Seed derivation shared by simulators, training preambles and benches.

#include <cstdint>

namespace dov {

constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Independent child seed for (base, a, b), e.g. (run seed, grid point, trial).
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) noexcept {
    std::uint64_t s = base;
    std::uint64_t x = splitmix64(s);
    s = x ^ (a * 0xd1b54a32d192ed03ULL);
    x = splitmix64(s);
    s = x ^ (b * 0x8cb92ba72f3d8dd7ULL);
    return splitmix64(s);
}

} // namespace dov
