#include <doctest.h>

#include <random>
#include <sstream>

#include "dov/errors.hpp"
#include "dov/quatcode.hpp"
#include "oracles.hpp"

using namespace dov;

namespace {

QuaternaryWord W(const char* s) { return QuaternaryWord::from_string(s); }

std::vector<int> ints(const QuaternaryWord& w) { return {w.digits().begin(), w.digits().end()}; }

QuaternaryWord random_word(std::mt19937_64& rng, int n) {
    std::vector<std::uint8_t> d(n);
    for (auto& x : d) x = static_cast<std::uint8_t>(rng() & 3);
    return QuaternaryWord(d);
}

} // namespace

TEST_SUITE("quatcode") {

TEST_CASE("lee distance examples") {
    CHECK(lee_distance(W("0123"), W("0123")) == 0);
    CHECK(lee_distance(W("0"), W("3")) == 1);
    CHECK(lee_distance(W("021"), W("203")) == 6);
    CHECK_THROWS_AS(lee_distance(W("01"), W("012")), InvalidArgument);
}

TEST_CASE("words reject digits outside Z4") {
    CHECK_THROWS_AS(W("0124"), InvalidArgument);
    CHECK_THROWS_AS(W("01a"), InvalidArgument);
    CHECK_THROWS_AS(QuaternaryWord(std::vector<std::uint8_t>{0, 7}), InvalidArgument);
}

TEST_CASE("metric axioms on random triples") {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 2000; ++t) {
        const int n = 1 + static_cast<int>(rng() % 12);
        const auto a = random_word(rng, n), b = random_word(rng, n), c = random_word(rng, n);
        CHECK(lee_distance(a, b) == lee_distance(b, a));
        CHECK((lee_distance(a, b) == 0) == (a == b));
        CHECK(lee_distance(a, c) <= lee_distance(a, b) + lee_distance(b, c));
    }
}

TEST_CASE("packed lee distance agrees with the scalar definition") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 20000; ++t) {
        const int n = 1 + static_cast<int>(rng() % kMaxWordLength);
        const auto a = random_word(rng, n), b = random_word(rng, n);
        const int expect = oracle::lee(ints(a), ints(b));
        REQUIRE(lee_distance(a, b) == expect);
        REQUIRE(lee_distance_packed(a.packed(), b.packed()) == expect);
    }
}

TEST_CASE("negation and packing") {
    CHECK(W("0123").negated() == W("0321"));
    CHECK(QuaternaryWord::from_packed(W("3102").packed(), 4) == W("3102"));
    CHECK(W("3102").packed() == 0b11010010u);
}

TEST_CASE("min_lee_distance examples") {
    std::vector<QuaternaryWord> full{W("0"), W("1"), W("2"), W("3")};
    CHECK(min_lee_distance(full) == 1);
    std::vector<QuaternaryWord> two{W("00"), W("22")};
    CHECK(min_lee_distance(two) == 4);
    std::vector<QuaternaryWord> one{W("00")};
    CHECK_THROWS_AS(min_lee_distance(one), InvalidArgument);
}

TEST_CASE("codebook validation") {
    CHECK_THROWS_AS(QuaternaryCodebook({W("01"), W("01")}), InvalidArgument);
    CHECK_THROWS_AS(QuaternaryCodebook({W("01"), W("012")}), InvalidArgument);
    QuaternaryCodebook cb({W("13"), W("31"), W("01"), W("02")});
    CHECK_FALSE(cb.has_reflection_symmetry());
    QuaternaryCodebook sym({W("13"), W("31"), W("01"), W("03")});
    CHECK(sym.has_reflection_symmetry());
}

TEST_CASE("phase histogram examples") {
    QuaternaryCodebook cb({W("00"), W("22")});
    const auto h = phase_histogram(cb);
    CHECK(h.at(0, 0) == 1);
    CHECK(h.at(1, 0) == 0);
    CHECK(h.at(2, 0) == 1);
    CHECK(h.at(3, 0) == 0);
    QuaternaryCodebook full({W("0"), W("1"), W("2"), W("3")});
    const auto hf = phase_histogram(full);
    for (int d = 0; d < 4; ++d) CHECK(hf.at(d, 0) == 1);
}

TEST_CASE("search output is negation-closed, balanced and deterministic") {
    const auto cb = codebook_search(7, 16, 2);
    CHECK(cb.size() == 16);
    CHECK(cb.has_reflection_symmetry());
    CHECK(cb.min_lee_distance() == min_lee_distance(cb));
    const auto h = phase_histogram(cb);
    for (int k = 0; k < 7; ++k) {
        int total = 0;
        for (int d = 0; d < 4; ++d) total += h.at(d, k);
        CHECK(total == 16);
        CHECK(h.at(1, k) == h.at(3, k));
    }
    const auto again = codebook_search(7, 16, 2);
    CHECK(again.words() == cb.words());
}

TEST_CASE("search reaches the tabulated small cells") {
    CHECK(codebook_search(7, 16, 0).min_lee_distance() == 6);
    CHECK(codebook_search(8, 16, 0).min_lee_distance() == 8);
    CHECK(codebook_search(8, 64, 0).min_lee_distance() == 6);
}

TEST_CASE("search argument errors") {
    CHECK_THROWS_AS(codebook_search(4, 7, 0), InvalidArgument);
    CHECK_THROWS_AS(codebook_search(2, 18, 0), InvalidArgument);
    CHECK_THROWS_AS(codebook_search(2, 0, 0), InvalidArgument);
}

TEST_CASE("exhausted pool reports the partial size") {
    SearchOptions opt;
    opt.pool = {W("1111"), W("3333"), W("1313"), W("3131")};
    try {
        codebook_search(4, 6, 0, opt);
        FAIL("expected ConstructionFailure");
    } catch (const ConstructionFailure& e) {
        CHECK(e.partial_size == 4);
        CHECK(e.category() == ErrorCategory::construction_failure);
    }
}

TEST_CASE("peak metric option is honoured as a late tie-break") {
    SearchOptions opt;
    int calls = 0;
    opt.peak_metric = [&](const QuaternaryWord&) {
        ++calls;
        return 0.0;
    };
    const auto with = codebook_search(6, 16, 1, opt);
    const auto without = codebook_search(6, 16, 1);
    CHECK(calls > 0);
    CHECK(with.words() == without.words());  // constant metric never changes the pick
}

TEST_CASE("codebook file round trip and strict parsing") {
    const auto cb = codebook_search(6, 16, 4);
    std::stringstream ss;
    write_codebook(ss, cb);
    const auto back = read_codebook(ss);
    CHECK(back.words() == cb.words());
    CHECK(back.seed() == 4);
    CHECK(back.min_lee_distance() == cb.min_lee_distance());

    std::istringstream bad_alpha("DOVQ4 v1 n=2 M=2 d=4 seed=0\n00\n2x\n");
    CHECK_THROWS_AS(read_codebook(bad_alpha), MalformedFile);
    std::istringstream bad_d("DOVQ4 v1 n=2 M=2 d=3 seed=0\n00\n22\n");
    CHECK_THROWS_AS(read_codebook(bad_d), MalformedFile);
    std::istringstream bad_m("DOVQ4 v1 n=2 M=3 d=4 seed=0\n00\n22\n");
    CHECK_THROWS_AS(read_codebook(bad_m), MalformedFile);
    std::istringstream dup("DOVQ4 v1 n=2 M=2 d=0 seed=0\n00\n00\n");
    CHECK_THROWS_AS(read_codebook(dup), MalformedFile);
    std::istringstream bad_magic("DOVQ5 v1 n=2 M=2 d=4 seed=0\n00\n22\n");
    CHECK_THROWS_AS(read_codebook(bad_magic), MalformedFile);
}

}
