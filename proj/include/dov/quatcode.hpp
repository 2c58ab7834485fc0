#pragma once

// Quaternary (Z4) codebooks under the Lee metric.
//
// A codeword holds one phase index per harmonic; the modem turns digit d into
// the 4-PSK point A*exp(j*pi*d/2). Squared Euclidean distance between two such
// PSK sequences equals 2*A^2 times the Lee distance of their words, so a code
// with large minimum Lee distance gives a waveform codebook with large minimum
// Euclidean distance.

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dov {

// Longest word the packed search representation supports (2 bits per digit).
inline constexpr int kMaxWordLength = 16;

class QuaternaryWord {
public:
    QuaternaryWord() = default;
    explicit QuaternaryWord(std::vector<std::uint8_t> digits);

    // Parses "0123..." strictly; any other character is rejected.
    static QuaternaryWord from_string(std::string_view text);
    // Unpacks n digits stored 2 bits each, digit 0 in the highest lane.
    static QuaternaryWord from_packed(std::uint32_t packed, int n);

    std::size_t size() const noexcept { return digits_.size(); }
    std::uint8_t operator[](std::size_t k) const noexcept { return digits_[k]; }
    std::span<const std::uint8_t> digits() const noexcept { return digits_; }

    // Digit-wise Z4 negation, c -> (4 - c) mod 4.
    QuaternaryWord negated() const;
    std::uint32_t packed() const;
    std::string to_string() const;

    friend auto operator<=>(const QuaternaryWord&, const QuaternaryWord&) = default;
    friend bool operator==(const QuaternaryWord&, const QuaternaryWord&) = default;

private:
    std::vector<std::uint8_t> digits_;
};

// Sum over positions of min(|a-b|, 4-|a-b|). Throws InvalidArgument on length
// mismatch.
int lee_distance(const QuaternaryWord& a, const QuaternaryWord& b);

// Lee distance of two packed words of the same length (no validation).
int lee_distance_packed(std::uint32_t a, std::uint32_t b) noexcept;

class QuaternaryCodebook {
public:
    // Validates that all words are distinct and of equal length, then certifies
    // the minimum Lee distance by exhaustive pairwise comparison. A codebook with
    // fewer than two words records distance 0.
    explicit QuaternaryCodebook(std::vector<QuaternaryWord> words, std::uint64_t seed = 0);

    std::size_t size() const noexcept { return words_.size(); }
    int word_length() const noexcept { return n_; }
    int min_lee_distance() const noexcept { return min_distance_; }
    std::uint64_t seed() const noexcept { return seed_; }
    const std::vector<QuaternaryWord>& words() const noexcept { return words_; }
    const QuaternaryWord& operator[](std::size_t m) const noexcept { return words_[m]; }

    // True when words[2m+1] is the negation of words[2m] for every pair and the
    // size is even; enables the half-size correlation in the demodulator.
    bool has_reflection_symmetry() const noexcept { return reflection_; }

private:
    std::vector<QuaternaryWord> words_;
    int n_ = 0;
    int min_distance_ = 0;
    std::uint64_t seed_ = 0;
    bool reflection_ = false;
};

// Exhaustive pairwise minimum. Throws InvalidArgument for fewer than 2 words.
int min_lee_distance(std::span<const QuaternaryWord> words);
int min_lee_distance(const QuaternaryCodebook& cb);

struct SearchOptions {
    // Explicit candidate pool. Empty means all of Z4^n when n <= 10, otherwise a
    // seeded random pool of 2^20 distinct words.
    std::vector<QuaternaryWord> pool;
    // Optional peak-amplitude metric; when set, it breaks ties left after the
    // uniformity criterion (smaller is preferred).
    std::function<double(const QuaternaryWord&)> peak_metric;
    // Lookahead tie-break (frontier survivors counted on this many sampled
    // frontier words) is used for codebooks up to lookahead_max_size words.
    std::size_t lookahead_sample = 1024;
    int lookahead_max_size = 256;
};

// Greedy farthest-point construction of an M-word negation-closed code.
// Words are inserted as pairs {c, -c}. The first word is drawn (seeded) among
// pool words farthest from their own negation. Every later round takes the pool
// words maximizing the distance to the current code, counting the distance to
// their own negation, and narrows them by
//   1. lookahead: most frontier words left admissible after insertion,
//   2. phase histogram closest to uniform (chi-square),
//   3. smallest peak metric, when one is given,
//   4. lexicographically smallest word.
// Throws InvalidArgument for odd or out-of-range M and
// ConstructionFailure when the pool cannot supply M distinct words.
QuaternaryCodebook codebook_search(int n, int M, std::uint64_t seed,
                                   const SearchOptions& options = {});

// Runs codebook_search for seeds seed, seed+1, ... seed+retries-1 and keeps the
// first codebook with the largest certified distance.
QuaternaryCodebook codebook_search_best(int n, int M, std::uint64_t seed, int retries,
                                        const SearchOptions& options = {});

// counts[d][k] = number of words with digit d at position k.
struct PhaseHistogram {
    int n = 0;
    std::array<std::vector<int>, 4> counts;

    int at(int digit, int position) const { return counts[digit][position]; }
};

PhaseHistogram phase_histogram(const QuaternaryCodebook& cb);

// Text format:
//   DOVQ4 v1 n=<n> M=<M> d=<dmin> seed=<seed>
//   one line per word, n digits from {0,1,2,3}
void write_codebook(std::ostream& out, const QuaternaryCodebook& cb);
QuaternaryCodebook read_codebook(std::istream& in);
void save_codebook(const std::string& path, const QuaternaryCodebook& cb);
QuaternaryCodebook load_codebook(const std::string& path);

} // namespace dov
