#include "dov/quatcode.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_set>

#include "dov/errors.hpp"

namespace dov {

namespace {

constexpr std::uint64_t kLow = 0x5555555555555555ull;
constexpr std::uint64_t kHigh = 0xAAAAAAAAAAAAAAAAull;

// Lane-wise (a - b) mod 4 over 2-bit lanes.
constexpr std::uint64_t lane_sub(std::uint64_t a, std::uint64_t b) noexcept {
    return ((a | kHigh) - (b & ~kHigh)) ^ ((a ^ ~b) & kHigh);
}

std::uint32_t lane_mask(int n) noexcept {
    return n >= 16 ? 0xFFFFFFFFu : ((1u << (2 * n)) - 1u);
}

std::uint32_t negate_packed(std::uint32_t w, int n) noexcept {
    return static_cast<std::uint32_t>(lane_sub(0, w)) & lane_mask(n);
}

void check_length(int n) {
    if (n < 1 || n > kMaxWordLength) {
        throw InvalidArgument("word length must be in [1, " + std::to_string(kMaxWordLength) +
                              "], got " + std::to_string(n));
    }
}

} // namespace

QuaternaryWord::QuaternaryWord(std::vector<std::uint8_t> digits) : digits_(std::move(digits)) {
    for (auto d : digits_) {
        if (d > 3) throw InvalidArgument("quaternary digit out of range: " + std::to_string(d));
    }
}

QuaternaryWord QuaternaryWord::from_string(std::string_view text) {
    std::vector<std::uint8_t> digits;
    digits.reserve(text.size());
    for (char ch : text) {
        if (ch < '0' || ch > '3') {
            throw InvalidArgument(std::string("invalid quaternary digit '") + ch + "'");
        }
        digits.push_back(static_cast<std::uint8_t>(ch - '0'));
    }
    return QuaternaryWord(std::move(digits));
}

QuaternaryWord QuaternaryWord::from_packed(std::uint32_t packed, int n) {
    check_length(n);
    std::vector<std::uint8_t> digits(n);
    for (int k = 0; k < n; ++k) digits[k] = (packed >> (2 * (n - 1 - k))) & 3u;
    return QuaternaryWord(std::move(digits));
}

QuaternaryWord QuaternaryWord::negated() const {
    std::vector<std::uint8_t> out(digits_.size());
    std::transform(digits_.begin(), digits_.end(), out.begin(),
                   [](std::uint8_t d) { return static_cast<std::uint8_t>((4 - d) & 3); });
    return QuaternaryWord(std::move(out));
}

std::uint32_t QuaternaryWord::packed() const {
    check_length(static_cast<int>(digits_.size()));
    std::uint32_t p = 0;
    for (auto d : digits_) p = (p << 2) | d;
    return p;
}

std::string QuaternaryWord::to_string() const {
    std::string s(digits_.size(), '0');
    for (std::size_t k = 0; k < digits_.size(); ++k) s[k] = static_cast<char>('0' + digits_[k]);
    return s;
}

int lee_distance(const QuaternaryWord& a, const QuaternaryWord& b) {
    if (a.size() != b.size()) {
        throw InvalidArgument("lee_distance: length mismatch (" + std::to_string(a.size()) +
                              " vs " + std::to_string(b.size()) + ")");
    }
    int d = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        int diff = std::abs(int(a[k]) - int(b[k]));
        d += std::min(diff, 4 - diff);
    }
    return d;
}

int lee_distance_packed(std::uint32_t a, std::uint32_t b) noexcept {
    const std::uint64_t z = lane_sub(a, b) & 0xFFFFFFFFull;
    // lane weights: 00 -> 0, 01 -> 1, 10 -> 2, 11 -> 1
    const std::uint64_t ones = z & kLow;
    const std::uint64_t twos = (z >> 1) & ~z & kLow;
    return std::popcount(ones) + 2 * std::popcount(twos);
}

QuaternaryCodebook::QuaternaryCodebook(std::vector<QuaternaryWord> words, std::uint64_t seed)
    : words_(std::move(words)), seed_(seed) {
    if (words_.empty()) throw InvalidArgument("codebook must contain at least one word");
    n_ = static_cast<int>(words_.front().size());
    if (n_ == 0) throw InvalidArgument("codebook words must be non-empty");
    for (const auto& w : words_) {
        if (static_cast<int>(w.size()) != n_) {
            throw InvalidArgument("codebook words must all have length " + std::to_string(n_));
        }
    }
    if (words_.size() >= 2) {
        min_distance_ = dov::min_lee_distance(std::span<const QuaternaryWord>(words_));
        if (min_distance_ == 0) throw InvalidArgument("codebook words must be distinct");
    }
    reflection_ = words_.size() % 2 == 0;
    for (std::size_t m = 0; reflection_ && m < words_.size(); m += 2) {
        reflection_ = words_[m + 1] == words_[m].negated();
    }
}

int min_lee_distance(std::span<const QuaternaryWord> words) {
    if (words.size() < 2) throw InvalidArgument("min_lee_distance needs at least 2 words");
    const int n = static_cast<int>(words.front().size());
    int best = std::numeric_limits<int>::max();
    if (n <= kMaxWordLength) {
        std::vector<std::uint32_t> packed;
        packed.reserve(words.size());
        for (const auto& w : words) {
            if (static_cast<int>(w.size()) != n) throw InvalidArgument("length mismatch in codebook");
            packed.push_back(w.packed());
        }
        for (std::size_t i = 0; i < packed.size(); ++i) {
            for (std::size_t j = i + 1; j < packed.size(); ++j) {
                best = std::min(best, lee_distance_packed(packed[i], packed[j]));
            }
        }
        return best;
    }
    for (std::size_t i = 0; i < words.size(); ++i) {
        for (std::size_t j = i + 1; j < words.size(); ++j) {
            best = std::min(best, lee_distance(words[i], words[j]));
        }
    }
    return best;
}

int min_lee_distance(const QuaternaryCodebook& cb) {
    return min_lee_distance(std::span<const QuaternaryWord>(cb.words()));
}

namespace {

std::vector<std::uint32_t> default_pool(int n, std::uint64_t seed) {
    std::vector<std::uint32_t> pool;
    if (n <= 10) {
        pool.resize(std::size_t{1} << (2 * n));
        for (std::uint32_t i = 0; i < pool.size(); ++i) pool[i] = i;
        return pool;
    }
    constexpr std::size_t kPoolSize = std::size_t{1} << 20;
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    const std::uint32_t mask = lane_mask(n);
    std::unordered_set<std::uint32_t> seen;
    seen.reserve(kPoolSize * 2);
    while (seen.size() < kPoolSize) seen.insert(static_cast<std::uint32_t>(rng()) & mask);
    pool.assign(seen.begin(), seen.end());
    std::sort(pool.begin(), pool.end());
    return pool;
}

// Incremental phase histogram of the code under construction.
struct Histogram {
    int n;
    std::vector<int> counts;  // counts[k*4 + d]
    int size = 0;

    explicit Histogram(int n_) : n(n_), counts(4 * n_, 0) {}

    void add(std::uint32_t w) {
        for (int k = 0; k < n; ++k) ++counts[k * 4 + ((w >> (2 * (n - 1 - k))) & 3u)];
        ++size;
    }

    // 16 * size' * chi-square of the histogram after adding {w, -w}, against
    // the uniform expectation size'/4 per cell; integer so ties are exact.
    long long chi_after_pair(std::uint32_t w) const {
        const long long total = size + 2;
        long long acc = 0;
        for (int k = 0; k < n; ++k) {
            const int d = (w >> (2 * (n - 1 - k))) & 3u;
            const int nd = (4 - d) & 3;
            for (int c = 0; c < 4; ++c) {
                long long h = counts[k * 4 + c] + (c == d) + (c == nd);
                long long dev = 4 * h - total;
                acc += dev * dev;
            }
        }
        return acc;
    }
};

} // namespace

QuaternaryCodebook codebook_search(int n, int M, std::uint64_t seed, const SearchOptions& options) {
    check_length(n);
    const double space = std::pow(4.0, n);
    if (M < 2 || M % 2 != 0 || double(M) > space) {
        throw InvalidArgument("codebook size must be even and in [2, 4^n], got " + std::to_string(M));
    }

    std::vector<std::uint32_t> pool;
    if (!options.pool.empty()) {
        pool.reserve(options.pool.size());
        for (const auto& w : options.pool) {
            if (static_cast<int>(w.size()) != n) throw InvalidArgument("pool word length mismatch");
            pool.push_back(w.packed());
        }
        std::sort(pool.begin(), pool.end());
        pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
    } else {
        pool = default_pool(n, seed);
    }

    const std::size_t P = pool.size();
    std::vector<std::uint32_t> negs(P);
    std::vector<std::uint8_t> self_dist(P);
    std::vector<std::uint8_t> min_dist(P, std::numeric_limits<std::uint8_t>::max());
    for (std::size_t i = 0; i < P; ++i) {
        negs[i] = negate_packed(pool[i], n);
        self_dist[i] = static_cast<std::uint8_t>(lee_distance_packed(pool[i], negs[i]));
    }

    std::vector<std::uint32_t> code;
    code.reserve(M);
    Histogram hist(n);

    auto insert_pair = [&](std::size_t idx) {
        const std::uint32_t w = pool[idx];
        const std::uint32_t nw = negs[idx];
        code.push_back(w);
        code.push_back(nw);
        hist.add(w);
        hist.add(nw);
        for (std::size_t i = 0; i < P; ++i) {
            const int d = std::min(lee_distance_packed(pool[i], w), lee_distance_packed(pool[i], nw));
            if (d < min_dist[i]) min_dist[i] = static_cast<std::uint8_t>(d);
        }
    };

    // Initial word: uniform among pool words farthest from their own negation
    // (all-odd words when the pool is the full space).
    {
        const auto top = *std::max_element(self_dist.begin(), self_dist.end());
        if (top == 0) {
            throw ConstructionFailure("pool holds only self-negating words", 0);
        }
        std::vector<std::size_t> initial;
        for (std::size_t i = 0; i < P; ++i) {
            if (self_dist[i] == top) initial.push_back(i);
        }
        std::mt19937_64 rng(seed);
        insert_pair(initial[rng() % initial.size()]);
    }

    std::vector<std::size_t> candidates;
    std::vector<std::size_t> kept;
    for (int round = 1; round < M / 2; ++round) {
        int best = 0;
        for (std::size_t i = 0; i < P; ++i) {
            best = std::max<int>(best, std::min(min_dist[i], self_dist[i]));
        }
        if (best == 0) {
            throw ConstructionFailure("candidate pool exhausted after " +
                                          std::to_string(code.size()) + " of " +
                                          std::to_string(M) + " words",
                                      code.size());
        }
        candidates.clear();
        for (std::size_t i = 0; i < P; ++i) {
            if (std::min(min_dist[i], self_dist[i]) == best) candidates.push_back(i);
        }

        // Lookahead: prefer the pair that leaves the most frontier words (those
        // still at distance `best`) admissible, counted on a seeded sample.
        const std::size_t sample = options.lookahead_sample;
        if (M <= options.lookahead_max_size && sample > 0 && candidates.size() > 1) {
            std::vector<std::uint32_t> probe;
            if (candidates.size() <= sample) {
                for (auto i : candidates) probe.push_back(pool[i]);
            } else {
                std::mt19937_64 rng(seed * 1000003ull + code.size());
                for (std::size_t t = 0; t < sample; ++t) {
                    probe.push_back(pool[candidates[rng() % candidates.size()]]);
                }
            }
            long long best_count = -1;
            kept.clear();
            for (auto i : candidates) {
                const std::uint32_t w = pool[i];
                const std::uint32_t nw = negs[i];
                long long count = 0;
                for (auto p : probe) {
                    count += lee_distance_packed(p, w) >= best && lee_distance_packed(p, nw) >= best;
                }
                if (count > best_count) {
                    best_count = count;
                    kept.clear();
                }
                if (count == best_count) kept.push_back(i);
            }
            candidates.swap(kept);
        }

        // Uniformity of the phase histogram.
        long long best_chi = std::numeric_limits<long long>::max();
        kept.clear();
        for (auto i : candidates) {
            const long long chi = hist.chi_after_pair(pool[i]);
            if (chi < best_chi) {
                best_chi = chi;
                kept.clear();
            }
            if (chi == best_chi) kept.push_back(i);
        }
        candidates.swap(kept);

        if (options.peak_metric && candidates.size() > 1) {
            double best_peak = std::numeric_limits<double>::infinity();
            kept.clear();
            for (auto i : candidates) {
                const double peak = options.peak_metric(QuaternaryWord::from_packed(pool[i], n));
                if (peak < best_peak - 1e-12) {
                    best_peak = peak;
                    kept.clear();
                }
                if (std::abs(peak - best_peak) <= 1e-12) kept.push_back(i);
            }
            candidates.swap(kept);
        }

        // Pool is sorted, so the first survivor is the lexicographically smallest.
        insert_pair(candidates.front());
    }

    std::vector<QuaternaryWord> words;
    words.reserve(code.size());
    for (auto w : code) words.push_back(QuaternaryWord::from_packed(w, n));
    return QuaternaryCodebook(std::move(words), seed);
}

QuaternaryCodebook codebook_search_best(int n, int M, std::uint64_t seed, int retries,
                                        const SearchOptions& options) {
    if (retries < 1) throw InvalidArgument("retries must be positive");
    std::optional<QuaternaryCodebook> best;
    for (int r = 0; r < retries; ++r) {
        auto cb = codebook_search(n, M, seed + static_cast<std::uint64_t>(r), options);
        if (!best || cb.min_lee_distance() > best->min_lee_distance()) best = std::move(cb);
    }
    return std::move(*best);
}

PhaseHistogram phase_histogram(const QuaternaryCodebook& cb) {
    PhaseHistogram h;
    h.n = cb.word_length();
    for (auto& c : h.counts) c.assign(h.n, 0);
    for (const auto& w : cb.words()) {
        for (int k = 0; k < h.n; ++k) ++h.counts[w[k]][k];
    }
    return h;
}

void write_codebook(std::ostream& out, const QuaternaryCodebook& cb) {
    out << "DOVQ4 v1 n=" << cb.word_length() << " M=" << cb.size()
        << " d=" << cb.min_lee_distance() << " seed=" << cb.seed() << '\n';
    for (const auto& w : cb.words()) out << w.to_string() << '\n';
}

namespace {

std::uint64_t header_field(const std::string& token, const std::string& key) {
    const std::string prefix = key + "=";
    if (token.rfind(prefix, 0) != 0) {
        throw MalformedFile("codebook header: expected " + prefix + "..., got '" + token + "'");
    }
    const std::string value = token.substr(prefix.size());
    if (value.empty() || value.find_first_not_of("0123456789") != std::string::npos) {
        throw MalformedFile("codebook header: bad value for " + key);
    }
    return std::stoull(value);
}

} // namespace

QuaternaryCodebook read_codebook(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw MalformedFile("empty codebook file");
    std::istringstream header(line);
    std::string magic, version, tn, tm, td, ts, extra;
    header >> magic >> version >> tn >> tm >> td >> ts;
    if (magic != "DOVQ4" || version != "v1") throw MalformedFile("not a DOVQ4 v1 codebook");
    if (header >> extra) throw MalformedFile("trailing data in codebook header");
    const auto n = header_field(tn, "n");
    const auto M = header_field(tm, "M");
    const auto d = header_field(td, "d");
    const auto seed = header_field(ts, "seed");

    std::vector<QuaternaryWord> words;
    words.reserve(M);
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.size() != n) {
            throw MalformedFile("codebook word " + std::to_string(words.size()) + " has length " +
                                std::to_string(line.size()) + ", expected " + std::to_string(n));
        }
        try {
            words.push_back(QuaternaryWord::from_string(line));
        } catch (const InvalidArgument& e) {
            throw MalformedFile(std::string("codebook word: ") + e.what());
        }
    }
    if (words.size() != M) {
        throw MalformedFile("codebook declares M=" + std::to_string(M) + " but holds " +
                            std::to_string(words.size()) + " words");
    }
    std::optional<QuaternaryCodebook> parsed;
    try {
        parsed.emplace(std::move(words), seed);
    } catch (const InvalidArgument& e) {
        throw MalformedFile(std::string("codebook: ") + e.what());
    }
    const QuaternaryCodebook& cb = *parsed;
    if (static_cast<std::uint64_t>(cb.min_lee_distance()) != d) {
        throw MalformedFile("codebook declares d=" + std::to_string(d) + " but certifies d=" +
                            std::to_string(cb.min_lee_distance()));
    }
    return cb;
}

void save_codebook(const std::string& path, const QuaternaryCodebook& cb) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    write_codebook(out, cb);
    if (!out) throw IoError("write failed: " + path);
}

QuaternaryCodebook load_codebook(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return read_codebook(in);
}

} // namespace dov
