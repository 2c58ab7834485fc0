#include "dov/crc8.hpp"

#include <array>

namespace dov {

namespace {

constexpr std::uint8_t kPoly = 0x07;

constexpr std::array<std::uint8_t, 256> make_table() {
    std::array<std::uint8_t, 256> t{};
    for (int i = 0; i < 256; ++i) {
        std::uint8_t c = static_cast<std::uint8_t>(i);
        for (int b = 0; b < 8; ++b) c = (c & 0x80) ? static_cast<std::uint8_t>((c << 1) ^ kPoly) : c << 1;
        t[i] = c;
    }
    return t;
}

constexpr auto kTable = make_table();

} // namespace

std::uint8_t crc8(std::span<const std::uint8_t> bytes) noexcept {
    std::uint8_t crc = 0;
    for (auto b : bytes) crc = kTable[crc ^ b];
    return crc;
}

std::uint8_t crc8_bits(std::span<const std::uint8_t> bits) noexcept {
    std::uint8_t crc = 0;
    for (auto bit : bits) {
        const bool top = ((crc >> 7) & 1) ^ (bit & 1);
        crc = static_cast<std::uint8_t>(crc << 1);
        if (top) crc ^= kPoly;
    }
    return crc;
}

} // namespace dov
