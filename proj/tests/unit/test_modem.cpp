#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dov/channelsim.hpp"
#include "dov/errors.hpp"
#include "dov/modem.hpp"
#include "oracles.hpp"

using namespace dov;

namespace {

QuaternaryWord W(const char* s) { return QuaternaryWord::from_string(s); }

SymbolParams params(int N = 20, int K = 8, int k0 = 1, double A = 1.0) {
    SymbolParams p;
    p.samples_per_symbol = N;
    p.harmonics = K;
    p.first_harmonic = k0;
    p.amplitude = A;
    return p;
}

const QuaternaryCodebook& code64() {
    static const auto cb = codebook_search(8, 64, 0);
    return cb;
}

QuaternaryCodebook full_space(int n) {
    std::vector<QuaternaryWord> words;
    for (std::uint32_t i = 0; i < (1u << (2 * n)); ++i) words.push_back(QuaternaryWord::from_packed(i, n));
    return QuaternaryCodebook(words);
}

PskSequence noisy(const PskSequence& x, double var, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, std::sqrt(var / 2));
    PskSequence y = x;
    for (auto& v : y) v += cplx(g(rng), g(rng));
    return y;
}

} // namespace

TEST_SUITE("modem") {

TEST_CASE("symbol parameter validation") {
    CHECK_NOTHROW(params().validate());
    CHECK_THROWS_AS(params(20, 10, 1).validate(), InvalidArgument);  // bin 10 is Nyquist
    CHECK_THROWS_AS(params(20, 8, 0).validate(), InvalidArgument);
    CHECK_THROWS_AS(params(20, 8, 1, 0.0).validate(), InvalidArgument);
    CHECK(params().baud_rate() == doctest::Approx(400.0));
    CHECK(params(40).baud_rate() == doctest::Approx(200.0));
}

TEST_CASE("synthesis examples") {
    const auto s = synthesize_symbol(params(20, 1, 1), W("0"));
    CHECK(s[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(s[5]) < 1e-12);
    const auto z = synthesize_symbol(params(), W("00000000"));
    CHECK(z[0] == doctest::Approx(8.0).epsilon(1e-12));
    auto p = params(40, 10, 3);
    CHECK(p.harmonic_hz(0) == doctest::Approx(600.0));
    CHECK(p.harmonic_hz(9) == doctest::Approx(2400.0));
    CHECK_THROWS_AS(synthesize_symbol(params(), W("0123")), InvalidArgument);
}

TEST_CASE("synthesis matches direct evaluation of the defining sum") {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 200; ++t) {
        const auto p = params(40, 10, 3, 0.37);
        std::vector<int> d(10);
        std::vector<std::uint8_t> du(10);
        for (int k = 0; k < 10; ++k) du[k] = static_cast<std::uint8_t>(d[k] = static_cast<int>(rng() & 3));
        const auto s = synthesize_symbol(p, QuaternaryWord(du));
        const auto ref = oracle::symbol(d, 40, 3, 0.37);
        double peak = 0;
        for (int n = 0; n < 40; ++n) {
            REQUIRE(std::abs(s[n] - ref[n]) < 1e-9);
            peak = std::max(peak, std::abs(s[n]));
        }
        CHECK(peak <= 10 * 0.37 + 1e-12);
    }
}

TEST_CASE("demultiplex examples") {
    const auto p = params(20, 2, 1);
    const auto c = demultiplex(synthesize_symbol(p, W("02")), p);
    CHECK(std::abs(c[0] - cplx(1, 0)) < 1e-9);
    CHECK(std::abs(c[1] - cplx(-1, 0)) < 1e-9);
    const auto z = demultiplex(std::vector<double>(20, 0.0), p);
    CHECK(std::abs(z[0]) == 0.0);
    std::vector<double> tone(20);
    for (int n = 0; n < 20; ++n) tone[n] = std::cos(2 * std::numbers::pi * 5 * n / 20 + 0.4);
    for (auto v : demultiplex(tone, p)) CHECK(std::abs(v) < 1e-9);
    CHECK_THROWS_AS(demultiplex(std::vector<double>(19), p), InvalidArgument);
}

TEST_CASE("round trip returns A exp(j pi d / 2) per harmonic") {
    const auto p = params(20, 8, 1, 0.11);
    for (const auto& w : code64().words()) {
        const auto c = demultiplex(synthesize_symbol(p, w), p);
        for (int k = 0; k < 8; ++k) REQUIRE(std::abs(c[k] - psk_point(w[k], 0.11)) < 1e-9);
    }
}

TEST_CASE("carriers are orthogonal and waveforms have equal energy") {
    const int N = 20;
    for (int a = 1; a <= 8; ++a) {
        for (int b = a + 1; b <= 8; ++b) {
            double dot = 0;
            for (int n = 0; n < N; ++n) {
                dot += std::cos(2 * std::numbers::pi * a * n / N) * std::cos(2 * std::numbers::pi * b * n / N);
            }
            CHECK(std::abs(dot) < 1e-9);
        }
    }
    const WaveformCodebook cb(params(20, 8, 1, 0.1), code64());
    for (std::size_t m = 0; m < cb.size(); ++m) {
        double e = 0;
        for (double v : cb.waveform(m)) e += v * v;
        REQUIRE(e == doctest::Approx(cb.symbol_energy()).epsilon(1e-9));
        if (m % 2 == 0) {
            // Z4 negation conjugates every phase, which reverses time.
            for (int n = 0; n < N; ++n) {
                REQUIRE(cb.waveform(m + 1)[n] == doctest::Approx(cb.waveform(m)[(N - n) % N]).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("isometry between Lee and squared Euclidean distance") {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 2000; ++t) {
        std::vector<std::uint8_t> a(8), b(8);
        for (int k = 0; k < 8; ++k) {
            a[k] = rng() & 3;
            b[k] = rng() & 3;
        }
        const QuaternaryWord wa(a), wb(b);
        const auto pa = psk_sequence(wa, 1.0), pb = psk_sequence(wb, 1.0);
        double d2 = 0;
        for (int k = 0; k < 8; ++k) d2 += std::norm(pa[k] - pb[k]);
        const double lee2 = 2.0 * lee_distance(wa, wb);
        REQUIRE(std::abs(d2 - lee2) <= 1e-9 * std::max(1.0, lee2));
    }
}

TEST_CASE("normalized codebook peaks at 0.9") {
    const auto cb = WaveformCodebook::normalized(params(), code64());
    CHECK(cb.peak() == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("channel estimation examples") {
    const auto p = params(20, 8, 1, 0.2);
    const WaveformCodebook cb(p, code64());
    std::mt19937_64 rng(1);
    std::vector<PskSequence> tx;
    std::vector<QuaternaryWord> sent;
    for (int l = 0; l < 400; ++l) {
        sent.push_back(code64()[rng() % 64]);
        tx.push_back(psk_sequence(sent.back(), p.amplitude));
    }
    const auto id = estimate_channel(tx, sent, p);
    for (int k = 0; k < 8; ++k) {
        CHECK(id.phase(k) == 0.0);
        CHECK(id.gain(k) == doctest::Approx(0.2).epsilon(1e-12));
        CHECK(id.variance[k] == doctest::Approx(kVarianceFloor * 0.04));
    }
    CHECK(id.variance_floored);

    auto model = ParametricChannelModel::identity(8);
    model.phases_rad.assign(8, 0.3);
    const auto rot = estimate_channel(apply_parametric(tx, model, p.amplitude, 1), sent, p);
    for (int k = 0; k < 8; ++k) CHECK(std::abs(rot.phase(k) - 0.3) < 1e-9);

    CHECK_THROWS_AS(estimate_channel(std::span(tx).first(1), std::span(sent).first(1), p), InvalidArgument);
    CHECK_THROWS_AS(estimate_channel(std::span(tx).first(3), std::span(sent).first(2), p), InvalidArgument);
}

TEST_CASE("variance estimate converges at L = 10^4") {
    const auto p = params(20, 8, 1, 0.5);
    std::mt19937_64 rng(2);
    std::vector<PskSequence> tx;
    std::vector<QuaternaryWord> sent;
    for (int l = 0; l < 10000; ++l) {
        sent.push_back(code64()[rng() % 64]);
        tx.push_back(psk_sequence(sent.back(), p.amplitude));
    }
    auto model = ParametricChannelModel::identity(8);
    model.noise_vars.assign(8, 0.01);
    const auto est = estimate_channel(apply_parametric(tx, model, p.amplitude, 9), sent, p);
    for (int k = 0; k < 8; ++k) CHECK(std::abs(est.variance[k] / (0.01 * 0.25) - 1.0) < 0.05);
    CHECK_FALSE(est.variance_floored);
}

TEST_CASE("ML decisions: exact, scaled, noisy, and the time-domain oracle") {
    const auto p = params();
    const WaveformCodebook cb(p, code64());
    for (std::uint32_t m = 0; m < 64; ++m) {
        auto c = psk_sequence(code64()[m], 1.0);
        REQUIRE(demodulate_ml(c, cb) == m);
        for (auto& v : c) v *= 0.5;
        REQUIRE(demodulate_ml(c, cb) == m);
    }
    // d_min^2 = 2 * 6 = 12, so (d_min/2)^2 = 3; variance 0.05 per harmonic is far below.
    std::mt19937_64 rng(4);
    std::vector<std::vector<double>> wf;
    for (std::size_t m = 0; m < 64; ++m) wf.push_back(cb.waveform(m));
    int errors = 0, oracle_mismatch = 0;
    const int trials = 100000;
    for (int t = 0; t < trials; ++t) {
        const auto m = static_cast<std::uint32_t>(rng() % 64);
        const auto y = noisy(psk_sequence(code64()[m], 1.0), 0.05, rng);
        const auto d = demodulate_ml(y, cb);
        errors += d != m;
        if (t < 2000) oracle_mismatch += d != oracle::matched_filter(synthesize_psk(p, y), wf);
    }
    CHECK(double(errors) / trials < 1e-4);
    CHECK(oracle_mismatch == 0);
}

TEST_CASE("corrected rule with identity estimate equals ML; reflection shortcut equals full search") {
    const auto p = params();
    const WaveformCodebook cb(p, code64());
    const auto id = ChannelEstimate::identity(8, 1.0);
    std::mt19937_64 rng(6);
    std::normal_distribution<double> g(0.0, 1.0);
    auto est = ChannelEstimate::identity(8, 1.0);
    for (int k = 0; k < 8; ++k) {
        est.mean[k] = std::polar(1.0, 0.3 * k);
        est.variance[k] = 0.1 + 0.05 * k;
    }
    for (int t = 0; t < 10000; ++t) {
        PskSequence y(8);
        for (auto& v : y) v = cplx(g(rng), g(rng));
        const auto ml = demodulate_ml(y, cb);
        const auto a = demodulate_corrected(y, cb, id);
        const auto b = demodulate_corrected(y, cb, id, CorrelationSearch::exhaustive);
        REQUIRE(a.index == ml);
        REQUIRE(b.index == ml);
        CHECK(a.reliability == doctest::Approx(b.reliability).epsilon(1e-12));
        CHECK(a.reliability >= 0.0);
        CHECK(a.reliability <= 1.0);
        const auto c = demodulate_corrected(y, cb, est);
        const auto d = demodulate_corrected(y, cb, est, CorrelationSearch::exhaustive);
        REQUIRE(c.index == d.index);
        // Positive scaling never changes a decision.
        PskSequence s = y;
        for (auto& v : s) v *= 3.7;
        REQUIRE(demodulate_ml(s, cb) == ml);
        REQUIRE(demodulate_corrected(s, cb, est).index == c.index);
    }
}

TEST_CASE("quarter-pi rotation: corrected decodes cleanly") {
    const auto p = params();
    const WaveformCodebook cb(p, code64());
    auto est = ChannelEstimate::identity(8, 1.0);
    for (auto& m : est.mean) m = std::polar(1.0, std::numbers::pi / 4);
    std::mt19937_64 rng(7);
    int errs = 0;
    for (int t = 0; t < 10000; ++t) {
        const auto m = static_cast<std::uint32_t>(rng() % 64);
        auto y = psk_sequence(code64()[m], 1.0);
        for (auto& v : y) v *= std::polar(1.0, std::numbers::pi / 4);
        errs += demodulate_corrected(y, cb, est).index != m;
    }
    CHECK(errs == 0);
}

TEST_CASE("quarter-pi rotation defeats uncorrected 4-PSK decision regions") {
    // Per-harmonic decisions (the full alphabet Z4^2): every received point
    // lies on a decision boundary.
    const auto p = params(20, 2, 1);
    const WaveformCodebook cb(p, full_space(2));
    auto est = ChannelEstimate::identity(2, 1.0);
    for (auto& m : est.mean) m = std::polar(1.0, std::numbers::pi / 4);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g(0.0, 1e-6);
    int ml_err = 0, corr_err = 0;
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) {
        const auto m = static_cast<std::uint32_t>(rng() % cb.size());
        auto y = psk_sequence(cb.quat()[m], 1.0);
        for (auto& v : y) v = v * std::polar(1.0, std::numbers::pi / 4) + cplx(g(rng), g(rng));
        ml_err += demodulate_ml(y, cb) != m;
        corr_err += demodulate_corrected(y, cb, est).index != m;
    }
    CHECK(double(ml_err) / trials >= 0.5);
    CHECK(corr_err == 0);
}

TEST_CASE("spectral weighting ignores an error on a high-variance harmonic") {
    const auto p = params();
    const WaveformCodebook cb(p, code64());
    auto est = ChannelEstimate::identity(8, 1.0);
    est.variance.assign(8, 1e-3);
    est.variance[7] = 1e6;
    int checked = 0;
    for (std::uint32_t m = 0; m < 64; ++m) {
        // Nearest competitor on harmonics 0..6 must be at Lee distance >= 2.
        int dmin = 99;
        for (std::uint32_t j = 0; j < 64; ++j) {
            if (j == m) continue;
            int d = 0;
            for (int k = 0; k < 7; ++k) {
                const int x = std::abs(code64()[m][k] - code64()[j][k]);
                d += std::min(x, 4 - x);
            }
            dmin = std::min(dmin, d);
        }
        if (dmin < 2) continue;
        ++checked;
        auto y = psk_sequence(code64()[m], 1.0);
        y[7] = -y[7] * 5.0;  // gross error on the last harmonic
        REQUIRE(demodulate_corrected(y, cb, est).index == m);
    }
    CHECK(checked > 0);
}

TEST_CASE("stream modulation round trip") {
    const auto cb = WaveformCodebook::normalized(params(), code64());
    const std::vector<std::uint32_t> idx{0, 1, 0};
    const auto s = modulate_stream(idx, cb);
    CHECK(s.size() == 60);
    const auto d = demodulate_stream(s, cb);
    REQUIRE(d.symbols.size() == 3);
    CHECK(d.symbols[0].index == 0);
    CHECK(d.symbols[1].index == 1);
    CHECK(d.symbols[2].index == 0);
    CHECK(d.trailing_samples == 0);
    auto t = s;
    t.resize(67);
    CHECK(demodulate_stream(t, cb).trailing_samples == 7);
    const std::vector<std::uint32_t> bad{64};
    CHECK_THROWS_AS(modulate_stream(bad, cb), InvalidArgument);
}

TEST_CASE("SER rises with noise through the parametric channel") {
    const auto cb = WaveformCodebook::normalized(params(), code64());
    const double A = cb.params().amplitude;
    std::mt19937_64 rng(12);
    std::vector<std::uint32_t> idx(100000);
    for (auto& v : idx) v = static_cast<std::uint32_t>(rng() % 64);
    std::vector<PskSequence> tx;
    for (auto v : idx) tx.push_back(psk_sequence(code64()[v], A));
    double prev = -1;
    for (double var : {0.15, 0.3, 0.45}) {
        auto model = ParametricChannelModel::identity(8);
        model.noise_vars.assign(8, var);
        const auto rx = apply_parametric(tx, model, A, 77);
        int errs = 0;
        for (std::size_t i = 0; i < rx.size(); ++i) errs += demodulate_ml(rx[i], cb) != idx[i];
        const double ser = double(errs) / idx.size();
        if (var == 0.15) CHECK(ser < 1e-3);
        CHECK(ser > prev);
        prev = ser;
    }
}

}
