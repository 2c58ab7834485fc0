#include "dov/cipher.hpp"

#include <openssl/evp.h>

#include <memory>
#include <string>

#include "dov/errors.hpp"

namespace dov {

Block aes256_encrypt_block(const AesKey& key, const Block& in) {
    std::unique_ptr<EVP_CIPHER_CTX, decltype(&EVP_CIPHER_CTX_free)> ctx(EVP_CIPHER_CTX_new(),
                                                                        &EVP_CIPHER_CTX_free);
    if (!ctx || EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_ecb(), nullptr, key.data(), nullptr) != 1) {
        throw Error(ErrorCategory::io, "AES-256 initialization failed");
    }
    EVP_CIPHER_CTX_set_padding(ctx.get(), 0);
    Block out{};
    int len = 0;
    if (EVP_EncryptUpdate(ctx.get(), out.data(), &len, in.data(), static_cast<int>(in.size())) != 1 ||
        len != static_cast<int>(out.size())) {
        throw Error(ErrorCategory::io, "AES-256 block encryption failed");
    }
    return out;
}

CipherSession::CipherSession(const AesKey& key, const SessionNonce& nonce)
    : key_(key), nonce_(nonce) {}

CipherSession CipherSession::from_hex(std::string_view key_hex, std::string_view nonce_hex) {
    const auto key = parse_hex(key_hex);
    const auto nonce = parse_hex(nonce_hex);
    if (key.size() != 32) throw InvalidArgument("key must be 64 hex digits (256 bits)");
    if (nonce.size() != 13) throw InvalidArgument("nonce must be 26 hex digits (104 bits)");
    AesKey k{};
    SessionNonce n{};
    std::copy(key.begin(), key.end(), k.begin());
    std::copy(nonce.begin(), nonce.end(), n.begin());
    return CipherSession(k, n);
}

Block CipherSession::counter_block(std::uint16_t counter, std::uint8_t block_index) const {
    Block b{};
    std::copy(nonce_.begin(), nonce_.end(), b.begin());
    b[13] = static_cast<std::uint8_t>(counter >> 8);
    b[14] = static_cast<std::uint8_t>(counter & 0xFF);
    b[15] = block_index;
    return b;
}

Block CipherSession::keystream_block(std::uint16_t counter, std::uint8_t block_index) const {
    return aes256_encrypt_block(key_, counter_block(counter, block_index));
}

std::vector<std::uint8_t> CipherSession::apply(std::span<const std::uint8_t> bits,
                                               std::uint16_t counter) const {
    if (bits.size() > 256 * 128) throw InvalidArgument("frame payload exceeds 256 keystream blocks");
    std::vector<std::uint8_t> out(bits.size());
    Block ks{};
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (i % 128 == 0) ks = keystream_block(counter, static_cast<std::uint8_t>(i / 128));
        const std::size_t bit_in_block = i % 128;
        const std::uint8_t kbit = (ks[bit_in_block / 8] >> (7 - bit_in_block % 8)) & 1;
        out[i] = static_cast<std::uint8_t>((bits[i] & 1) ^ kbit);
    }
    return out;
}

std::vector<std::uint8_t> parse_hex(std::string_view hex) {
    if (hex.size() % 2 != 0) throw InvalidArgument("hex string must have an even number of digits");
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw InvalidArgument(std::string("invalid hex digit '") + c + "'");
    };
    std::vector<std::uint8_t> out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
    }
    return out;
}

} // namespace dov
