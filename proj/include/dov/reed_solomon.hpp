#pragma once

// Shortened systematic Reed-Solomon codes over GF(64) with errors-and-erasures
// decoding. The generator has roots alpha^1 .. alpha^(n-k). Codeword symbol i
// is the coefficient of x^(n-1-i): message symbols come first, redundancy last.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dov/gf64.hpp"

namespace dov {

class ReedSolomon {
public:
    // n <= 63, 0 < k < n. Throws InvalidArgument otherwise.
    ReedSolomon(int n, int k);

    int n() const noexcept { return n_; }
    int k() const noexcept { return k_; }
    int redundancy() const noexcept { return n_ - k_; }
    const std::vector<gf64::Element>& generator() const noexcept { return generator_; }

    // Returns message followed by n-k redundancy symbols. Symbols must be < 64.
    std::vector<gf64::Element> encode(std::span<const gf64::Element> message) const;

    struct Decoded {
        std::vector<gf64::Element> message;
        int errors_corrected = 0;  // outside the declared erasures
    };

    // Corrects e errors and f erasures whenever 2e + f <= n - k. Returns
    // std::nullopt when decoding fails; beyond the bound a wrong codeword may
    // be returned. Throws InvalidArgument for a bad length or invalid,
    // duplicate or too many erasure positions.
    std::optional<Decoded> decode(std::span<const gf64::Element> received,
                                  std::span<const int> erasures = {}) const;

private:
    int n_;
    int k_;
    std::vector<gf64::Element> generator_;  // highest degree first, monic
};

} // namespace dov
