#pragma once

// AES-256 in counter mode with a per-frame counter block:
//
//   block = nonce (13 bytes) || frame counter (2 bytes, big endian) || block index (1 byte)
//
// so any frame can be decrypted from (key, nonce, its counter) alone.

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace dov {

using AesKey = std::array<std::uint8_t, 32>;
using SessionNonce = std::array<std::uint8_t, 13>;
using Block = std::array<std::uint8_t, 16>;

// Single-block AES-256 encryption.
Block aes256_encrypt_block(const AesKey& key, const Block& in);

class CipherSession {
public:
    CipherSession(const AesKey& key, const SessionNonce& nonce);
    // 64 and 26 hex digits. Throws InvalidArgument otherwise.
    static CipherSession from_hex(std::string_view key_hex, std::string_view nonce_hex);

    const AesKey& key() const noexcept { return key_; }
    const SessionNonce& nonce() const noexcept { return nonce_; }

    Block counter_block(std::uint16_t counter, std::uint8_t block_index) const;
    Block keystream_block(std::uint16_t counter, std::uint8_t block_index) const;

    // XORs bits (0/1 per element) with the frame keystream, MSB of each
    // keystream byte first. Encryption and decryption are the same operation.
    std::vector<std::uint8_t> apply(std::span<const std::uint8_t> bits,
                                    std::uint16_t counter) const;

    std::vector<std::uint8_t> encrypt_frame(std::span<const std::uint8_t> bits,
                                            std::uint16_t counter) const {
        return apply(bits, counter);
    }
    std::vector<std::uint8_t> decrypt_frame(std::span<const std::uint8_t> bits,
                                            std::uint16_t counter) const {
        return apply(bits, counter);
    }

private:
    AesKey key_;
    SessionNonce nonce_;
};

std::vector<std::uint8_t> parse_hex(std::string_view hex);

} // namespace dov
