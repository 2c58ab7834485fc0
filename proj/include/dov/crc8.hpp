#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace dov {

// CRC-8, polynomial x^8 + x^2 + x + 1 (0x07), init 0x00, MSB first, no
// reflection, no final xor.
std::uint8_t crc8(std::span<const std::uint8_t> bytes) noexcept;

// Same CRC over a bit sequence (one bit per element, values 0/1), for lengths
// that are not a multiple of 8.
std::uint8_t crc8_bits(std::span<const std::uint8_t> bits) noexcept;

} // namespace dov
