#pragma once

#include <array>
#include <cstdint>

namespace dov::gf64 {

// GF(2^6) with primitive polynomial x^6 + x + 1; alpha = 0b000010.
using Element = std::uint8_t;

inline constexpr int kOrder = 64;
inline constexpr int kPrimitivePoly = 0x43;

Element exp(int power) noexcept;        // alpha^power, any integer power
int log(Element a);                      // throws InvalidArgument for 0
Element mul(Element a, Element b) noexcept;
Element div(Element a, Element b);       // throws InvalidArgument for b == 0
Element inv(Element a);
Element pow(Element a, int power) noexcept;
inline Element add(Element a, Element b) noexcept { return a ^ b; }

} // namespace dov::gf64
