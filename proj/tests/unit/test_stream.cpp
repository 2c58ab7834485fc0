#include <doctest.h>

#include <random>

#include "dov/channelsim.hpp"
#include "dov/errors.hpp"
#include "dov/stats.hpp"
#include "dov/stream.hpp"

using namespace dov;

namespace {

const WaveformCodebook& wave64() {
    static const auto cb = WaveformCodebook::normalized(SymbolParams{}, codebook_search(8, 64, 0));
    return cb;
}

const FrameCodec& low_codec() {
    static const FrameCodec fc = [] {
        const auto cfg = FrameConfig::make(FrameMode::low);
        return FrameCodec(cfg, CipherSession::from_hex(std::string(64, 'a'), std::string(26, '5')),
                          WaveformCodebook::normalized(cfg.symbol, frame_codebook(FrameMode::low)));
    }();
    return fc;
}

std::vector<std::vector<std::uint8_t>> random_frames(std::size_t count, int bits, std::mt19937_64& rng) {
    std::vector<std::vector<std::uint8_t>> f(count, std::vector<std::uint8_t>(bits));
    for (auto& fr : f) {
        for (auto& b : fr) b = static_cast<std::uint8_t>(rng() & 1);
    }
    return f;
}

} // namespace

TEST_SUITE("stream") {

TEST_CASE("training sequence") {
    SymbolParams p;
    CHECK(training_symbol_count(2.0, p) == 800);
    CHECK(training_symbol_count(0.0, p) == 0);
    CHECK_THROWS_AS(training_symbol_count(-1.0, p), InvalidArgument);
    const auto a = training_indices(100, 64, 7);
    CHECK(a == training_indices(100, 64, 7));
    CHECK(a != training_indices(100, 64, 8));
    for (auto v : a) CHECK(v < 64);
}

TEST_CASE("payload packing") {
    CHECK(bits_per_index(64) == 6);
    CHECK(bits_per_index(100) == 6);
    CHECK(bits_per_index(4096) == 12);
    CHECK_THROWS_AS(bits_per_index(1), InvalidArgument);
    const std::vector<std::uint8_t> data{0xDE, 0xAD, 0xBE, 0xEF, 0x01};
    const auto idx = pack_payload(data, 6);
    CHECK(idx.size() == 12);  // (4 + 5) * 8 = 72 bits
    CHECK(idx[0] == 0);
    CHECK(unpack_payload(idx, 6) == data);
    CHECK(unpack_payload(pack_payload({}, 6), 6).empty());
    auto cut = idx;
    cut.resize(8);
    CHECK_THROWS_AS(unpack_payload(cut, 6), MalformedFile);
    CHECK(bits_to_bytes(bytes_to_bits(data)) == data);
    CHECK_THROWS_AS(bits_to_bytes(std::vector<std::uint8_t>(7, 1)), InvalidArgument);
}

TEST_CASE("payload stream round trip with and without training") {
    std::mt19937_64 rng(1);
    std::vector<std::uint8_t> data(300);
    for (auto& b : data) b = static_cast<std::uint8_t>(rng());
    PayloadStreamOptions opt;
    opt.training_symbols = training_symbol_count(0.5, wave64().params());
    const auto audio = modulate_payload(data, wave64(), opt);
    for (bool train : {true, false}) {
        const auto dec = demodulate_payload(audio, wave64(), opt, train);
        CHECK(dec.length_valid);
        CHECK(dec.bytes == data);
        CHECK(dec.estimate.has_value() == train);
    }
    CHECK_THROWS_AS(demodulate_payload(std::span(audio).first(100), wave64(), opt, true), MalformedFile);
}

TEST_CASE("training corrects a rotated channel") {
    std::mt19937_64 rng(2);
    std::vector<std::uint8_t> data(2000);
    for (auto& b : data) b = static_cast<std::uint8_t>(rng());
    PayloadStreamOptions opt;
    opt.training_symbols = 800;
    const auto audio = modulate_payload(data, wave64(), opt);
    ParametricChannelModel m{std::vector<double>(8, 1.0), std::vector<double>(8, 0.0),
                             std::vector<double>(8, 0.02)};
    for (int k = 0; k < 8; ++k) m.phases_rad[k] = 0.5 + 0.1 * k;
    const auto rx = apply_parametric_audio(audio, wave64().params(), m, 9);
    const auto trained = demodulate_payload(rx, wave64(), opt, true);
    const auto blind = demodulate_payload(rx, wave64(), opt, false);
    const auto sent = pack_payload(data, 6);
    const auto et = error_counters(sent, std::span(trained.indices).first(sent.size()), 6);
    const auto eb = error_counters(sent, std::span(blind.indices).first(sent.size()), 6);
    CHECK(et.ser() < eb.ser());
    CHECK(trained.bytes == data);
}

TEST_CASE("frame pipeline with silence every 16th frame") {
    std::mt19937_64 rng(3);
    const auto& fc = low_codec();
    const auto frames = random_frames(64, 96, rng);
    FrameStreamOptions opt;
    opt.training_symbols = 400;
    opt.silence_period = 16;
    const auto audio = transmit_frames(frames, 500, fc, opt);
    TimeImpairments delay;
    delay.delay_samples = 37;
    const auto rx = apply_time_impairments(audio, delay, 0);
    const auto dec = receive_frames(rx, fc, opt, true);
    REQUIRE(dec.sync);
    CHECK(dec.sync->offset == 37);
    REQUIRE(dec.frames.size() == 64);
    FrameCounts counts;
    for (const auto& f : dec.frames) {
        ++counts.frames;
        if (is_silence_slot(f.slot, 16)) {
            CHECK(f.cls == FrameClass::silent);
            ++counts.concealed;
            continue;
        }
        REQUIRE(f.result);
        const auto* d = std::get_if<DecodedFrame>(&*f.result);
        REQUIRE(d);
        CHECK(d->speech_bits == frames[f.slot]);
        CHECK(d->counter == 500 + f.slot);
    }
    CHECK(counts.concealed == 4);
    CHECK(counts.fer() == 0.0);
}

TEST_CASE("receiver recovers from the two-symbol header alias") {
    std::mt19937_64 rng(4);
    const auto& fc = low_codec();
    const auto [a, b] = fc.header();
    const auto frames = random_frames(4, 96, rng);
    FrameStreamOptions opt;
    opt.training_symbols = 200;
    const auto start = static_cast<std::uint16_t>(a << 10 | b << 4);
    auto audio = transmit_frames(frames, start, fc, opt);
    // Low-level noise so the tie breaks either way.
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        TimeImpairments imp;
        imp.snr_db = 30.0;
        imp.delay_samples = 11;
        const auto rx = apply_time_impairments(audio, imp, seed);
        const auto dec = receive_frames(rx, fc, opt, true);
        REQUIRE(dec.sync);
        CHECK(dec.sync->offset == 11);
        REQUIRE(dec.frames.size() == 4);
        for (const auto& f : dec.frames) {
            REQUIRE(f.result);
            REQUIRE(std::holds_alternative<DecodedFrame>(*f.result));
            CHECK(std::get<DecodedFrame>(*f.result).speech_bits == frames[f.slot]);
        }
    }
}

}
