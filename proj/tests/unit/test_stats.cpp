#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "dov/errors.hpp"
#include "dov/stats.hpp"
#include "oracles.hpp"

using namespace dov;

namespace {

BivariateSample gaussian_sample(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    BivariateSample s(n);
    for (auto& p : s) p = {g(rng), g(rng)};
    return s;
}

std::vector<std::array<double, 2>> as_arrays(const BivariateSample& s) { return {s.begin(), s.end()}; }

WaveformCodebook small_code() {
    SymbolParams p;
    return WaveformCodebook(p, codebook_search(8, 16, 0));
}

} // namespace

TEST_SUITE("stats") {

TEST_CASE("mardia examples and frozen values") {
    const BivariateSample sym{{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    CHECK(mardia_skewness(sym) == doctest::Approx(0.0));
    const BivariateSample x{{0, 0}, {1, 0}, {0, 2}, {3, 1}, {-1, 4}, {2, -2}};
    CHECK(mardia_skewness(x) == doctest::Approx(1.9915733767555457).epsilon(1e-12));
    CHECK(mardia_kurtosis(x) == doctest::Approx(6.141730103806226).epsilon(1e-12));
}

TEST_CASE("mardia agrees with the quadratic-time definition") {
    std::mt19937_64 rng(3);
    std::exponential_distribution<double> e(1.0);
    for (int t = 0; t < 20; ++t) {
        const std::size_t n = 3 + rng() % 200;
        BivariateSample s(n);
        for (auto& p : s) p = {e(rng), e(rng) + 0.3 * p[0]};
        const auto ref = oracle::mardia_bruteforce(as_arrays(s));
        REQUIRE(mardia_skewness(s) == doctest::Approx(ref.skewness).epsilon(1e-9));
        REQUIRE(mardia_kurtosis(s) == doctest::Approx(ref.kurtosis).epsilon(1e-9));
    }
}

TEST_CASE("mardia is affine invariant") {
    std::mt19937_64 rng(8);
    std::gamma_distribution<double> gam(2.0);
    BivariateSample s(500);
    for (auto& p : s) p = {gam(rng), gam(rng)};
    BivariateSample t(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        t[i] = {3.0 * s[i][0] - 1.5 * s[i][1] + 7.0, 0.2 * s[i][0] + 4.0 * s[i][1] - 2.0};
    }
    CHECK(mardia_skewness(t) == doctest::Approx(mardia_skewness(s)).epsilon(1e-9));
    CHECK(mardia_kurtosis(t) == doctest::Approx(mardia_kurtosis(s)).epsilon(1e-9));
}

TEST_CASE("mardia on 10^5 standard normal points") {
    const auto s = gaussian_sample(100000, 17);
    CHECK(std::abs(mardia_skewness(s)) < 0.05);
    CHECK(std::abs(mardia_kurtosis(s) - 8.0) < 0.1);
}

TEST_CASE("mardia degenerate samples") {
    CHECK_THROWS_AS(mardia_skewness(BivariateSample{{0, 0}, {1, 1}}), DegenerateSample);
    CHECK_THROWS_AS(mardia_kurtosis(BivariateSample{{0, 0}, {1, 1}, {2, 2}, {3, 3}}), DegenerateSample);
    CHECK_THROWS_AS(mardia_skewness(BivariateSample{{0, 0}, {1, 2}, {std::nan(""), 1}}), DegenerateSample);
}

TEST_CASE("snr examples") {
    std::vector<double> x{1, -2, 3, 0.5};
    CHECK(snr_db(x, x) == kSnrCapDb);
    std::vector<double> y = x;
    double ps = 0;
    for (double v : x) ps += v * v;
    // One-sample error with power 0.1 * signal power.
    y[0] += std::sqrt(0.1 * ps);
    CHECK(snr_db(x, y) == doctest::Approx(10.0).epsilon(1e-3));
    CHECK_THROWS_AS(snr_db(std::vector<double>(4, 0.0), x), InvalidArgument);
    CHECK_THROWS_AS(snr_db(x, std::vector<double>(3, 0.0)), InvalidArgument);
}

TEST_CASE("correlation examples") {
    const std::size_t L = 400;
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g;
    std::vector<std::vector<cplx>> d(L, std::vector<cplx>(3));
    for (std::size_t l = 0; l < L; ++l) {
        d[l][0] = {g(rng), g(rng)};
        d[l][1] = d[l][0];  // duplicated column
        const double v = (l % 2 == 0) ? 1.0 : -1.0;
        d[l][2] = {v, -v};  // alternating pattern
    }
    const auto r = correlation_report(d);
    CHECK(r.inter[0][1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.inter[0][0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.lag1[2] == doctest::Approx(-1.0).epsilon(1e-9));
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(r.inter[i][j]) <= 1.0 + 1e-12);
    }

    std::vector<std::vector<cplx>> c(L, std::vector<cplx>(2));
    for (std::size_t l = 0; l < L; ++l) c[l][0] = {g(rng), g(rng)};
    const auto rc = correlation_report(c);
    CHECK(rc.inter_degenerate[0][1]);
    CHECK(std::isnan(rc.inter[0][1]));
    CHECK(rc.lag1_degenerate[1]);

    CHECK_THROWS_AS(correlation_report(std::vector<std::vector<cplx>>(99, std::vector<cplx>(2))),
                    InvalidArgument);
}

TEST_CASE("independent noise gives small correlations over 10^4 symbols") {
    const std::size_t L = 10000;
    std::mt19937_64 rng(6);
    std::normal_distribution<double> g;
    std::vector<std::vector<cplx>> d(L, std::vector<cplx>(8));
    for (auto& row : d) {
        for (auto& v : row) v = {g(rng), g(rng)};
    }
    const auto r = correlation_report(d);
    CHECK(r.max_offdiag_abs() < 0.05);
    CHECK(r.max_lag1_abs() < 0.05);
}

TEST_CASE("distortion stream removes the transmitted phase and the mean") {
    const auto w = std::vector<QuaternaryWord>{QuaternaryWord::from_string("01"),
                                               QuaternaryWord::from_string("23")};
    std::vector<PskSequence> rx;
    for (const auto& x : w) {
        auto s = psk_sequence(x, 2.0);
        for (auto& v : s) v *= std::polar(1.0, 0.4);
        rx.push_back(s);
    }
    rx[1][0] += cplx(0.2, 0.0) * psk_point(2, 1.0);
    const auto d = distortion_stream(rx, w, 2.0);
    CHECK(std::abs(d[0][1]) < 1e-12);
    CHECK(std::abs(d[1][0] - cplx(0.05, 0.0)) < 1e-12);
    CHECK(std::abs(d[0][0] + cplx(0.05, 0.0)) < 1e-12);
}

TEST_CASE("estimator standard error") {
    const auto cb = small_code();
    SeConfig cfg;
    cfg.durations_s = {0.5, 1, 2, 4, 8};
    cfg.runs = 200;
    cfg.reference_symbols = 10000;
    cfg.seed = 3;

    SUBCASE("zero-noise channel gives zero SE") {
        const auto rows = estimator_standard_error(ParametricChannelModel::identity(8), cb, cfg);
        for (const auto& r : rows) {
            CHECK(r.se_phase == 0.0);
            CHECK(r.se_variance_normalized == 0.0);
            CHECK(r.se_variance_raw == 0.0);
        }
    }
    SUBCASE("phase SE follows c/sqrt(t) and variance SE scales as stated") {
        ParametricChannelModel m{std::vector<double>(8, 1.0), std::vector<double>(8, 0.2),
                                 std::vector<double>(8, 0.05)};
        const auto rows = estimator_standard_error(m, cb, cfg);
        std::vector<double> t, y;
        for (const auto& r : rows) {
            t.push_back(r.duration_s);
            y.push_back(r.se_phase);
            CHECK(r.symbols == static_cast<std::size_t>(std::llround(r.duration_s * 400)));
        }
        const auto fit = fit_inverse_sqrt(t, y);
        CHECK(fit.r2 >= 0.95);
        CHECK(rows.front().se_phase > rows.back().se_phase);

        auto m2 = m;
        for (auto& v : m2.noise_vars) v *= 2;
        const auto rows2 = estimator_standard_error(m2, cb, cfg);
        const double raw = rows2.back().se_variance_raw / rows.back().se_variance_raw;
        const double norm = rows2.back().se_variance_normalized / rows.back().se_variance_normalized;
        CHECK(std::abs(raw - 2.0) < 0.15 * 2.0);
        CHECK(std::abs(norm - std::sqrt(2.0)) < 0.15 * std::sqrt(2.0));
    }
    SUBCASE("fewer than 100 runs is rejected") {
        cfg.runs = 99;
        CHECK_THROWS_AS(estimator_standard_error(ParametricChannelModel::identity(8), cb, cfg), InvalidArgument);
    }
}

TEST_CASE("inverse square root fit") {
    std::vector<double> t{1, 4, 9, 16}, y{6, 3, 2, 1.5};
    const auto f = fit_inverse_sqrt(t, y);
    CHECK(f.c == doctest::Approx(6.0));
    CHECK(f.r2 == doctest::Approx(1.0));
}

TEST_CASE("error counters") {
    std::vector<std::uint32_t> a(100), b(100);
    for (std::uint32_t i = 0; i < 100; ++i) a[i] = b[i] = i % 64;
    auto c = error_counters(a, b, 6);
    CHECK(c.ser() == 0.0);
    CHECK(c.ber() == 0.0);
    b[17] ^= 0b101;
    c = error_counters(a, b, 6);
    CHECK(c.ser() == doctest::Approx(0.01));
    CHECK(c.bit_errors == 2);
    CHECK(c.bits == 600);
    for (auto& v : b) v = (v + 1) % 64;
    CHECK(error_counters(a, b, 6).ser() == 1.0);
    CHECK_THROWS_AS(error_counters(a, std::vector<std::uint32_t>(99), 6), InvalidArgument);

    FrameCounts f{10, 2, 3};
    CHECK(f.fer() == doctest::Approx(0.2));
}

TEST_CASE("wilson interval and two-proportion z") {
    const auto w = wilson_interval(0, 100);
    CHECK(w[0] == 0.0);
    CHECK(w[1] == doctest::Approx(0.0370).epsilon(0.01));
    const auto h = wilson_interval(50, 100);
    CHECK(h[0] == doctest::Approx(0.4038).epsilon(0.01));
    CHECK(h[1] == doctest::Approx(0.5962).epsilon(0.01));
    CHECK(two_proportion_z(10, 1000, 40, 1000) > 3.0);
    CHECK(two_proportion_z(40, 1000, 10, 1000) < -3.0);
}

}
