#include "dov/stream.hpp"

#include <bit>
#include <cmath>
#include <string>
#include <variant>

#include "dov/errors.hpp"
#include "dov/rng.hpp"

namespace dov {

std::size_t training_symbol_count(double seconds, const SymbolParams& params) {
    if (!(seconds >= 0.0) || !std::isfinite(seconds)) {
        throw InvalidArgument("training duration must be a non-negative number of seconds");
    }
    return static_cast<std::size_t>(std::llround(seconds * params.baud_rate()));
}

std::vector<std::uint32_t> training_indices(std::size_t count, std::size_t codebook_size,
                                            std::uint64_t seed) {
    if (codebook_size == 0) throw InvalidArgument("empty codebook");
    std::vector<std::uint32_t> out(count);
    std::uint64_t state = seed;
    for (auto& v : out) v = static_cast<std::uint32_t>(splitmix64(state) % codebook_size);
    return out;
}

ChannelEstimate train_from_samples(std::span<const double> preamble, const WaveformCodebook& cb,
                                   std::span<const std::uint32_t> training) {
    const std::size_t N = cb.params().samples_per_symbol;
    if (preamble.size() < training.size() * N) {
        throw InvalidArgument("training preamble is shorter than the training sequence");
    }
    const auto psk = demultiplex_stream(preamble.first(training.size() * N), cb.params());
    std::vector<QuaternaryWord> sent;
    sent.reserve(training.size());
    for (auto idx : training) {
        if (idx >= cb.size()) throw InvalidArgument("training index outside codebook");
        sent.push_back(cb.quat()[idx]);
    }
    return estimate_channel(psk, sent, cb.params());
}

int bits_per_index(std::size_t codebook_size) {
    if (codebook_size < 2) throw InvalidArgument("codebook must have at least 2 words");
    return std::bit_width(codebook_size) - 1;
}

std::vector<std::uint8_t> bytes_to_bits(std::span<const std::uint8_t> bytes) {
    std::vector<std::uint8_t> bits;
    bits.reserve(bytes.size() * 8);
    for (auto b : bytes) {
        for (int i = 7; i >= 0; --i) bits.push_back((b >> i) & 1);
    }
    return bits;
}

std::vector<std::uint8_t> bits_to_bytes(std::span<const std::uint8_t> bits) {
    if (bits.size() % 8 != 0) throw InvalidArgument("bit count is not a multiple of 8");
    std::vector<std::uint8_t> out(bits.size() / 8);
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] > 1) throw InvalidArgument("bits must be 0 or 1");
        out[i / 8] = static_cast<std::uint8_t>(out[i / 8] << 1 | bits[i]);
    }
    return out;
}

std::vector<std::uint32_t> pack_payload(std::span<const std::uint8_t> bytes, int bits_per_symbol) {
    if (bits_per_symbol < 1 || bits_per_symbol > 24) throw InvalidArgument("bits per symbol out of range");
    if (bytes.size() > 0xFFFFFFFFull) throw InvalidArgument("payload too large");
    std::vector<std::uint8_t> framed;
    const auto n = static_cast<std::uint32_t>(bytes.size());
    for (int s = 24; s >= 0; s -= 8) framed.push_back(static_cast<std::uint8_t>(n >> s));
    framed.insert(framed.end(), bytes.begin(), bytes.end());
    auto bits = bytes_to_bits(framed);
    while (bits.size() % bits_per_symbol) bits.push_back(0);
    std::vector<std::uint32_t> out(bits.size() / bits_per_symbol);
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::uint32_t v = 0;
        for (int j = 0; j < bits_per_symbol; ++j) v = (v << 1) | bits[i * bits_per_symbol + j];
        out[i] = v;
    }
    return out;
}

namespace {

std::vector<std::uint8_t> indices_to_bits(std::span<const std::uint32_t> indices, int bps) {
    std::vector<std::uint8_t> bits;
    bits.reserve(indices.size() * bps);
    for (auto v : indices) {
        for (int j = bps - 1; j >= 0; --j) bits.push_back((v >> j) & 1);
    }
    return bits;
}

// Returns the payload and whether the length prefix fit the data.
std::pair<std::vector<std::uint8_t>, bool> unpack_lenient(std::span<const std::uint32_t> indices,
                                                          int bps) {
    if (bps < 1 || bps > 24) throw InvalidArgument("bits per symbol out of range");
    const auto bits = indices_to_bits(indices, bps);
    const std::size_t whole = bits.size() / 8;
    if (whole < 4) return {{}, false};
    const auto bytes = bits_to_bytes(std::span(bits).first(whole * 8));
    const std::size_t n = (std::size_t{bytes[0]} << 24) | (std::size_t{bytes[1]} << 16) |
                          (std::size_t{bytes[2]} << 8) | bytes[3];
    const std::size_t avail = bytes.size() - 4;
    const std::size_t take = std::min(n, avail);
    return {std::vector<std::uint8_t>(bytes.begin() + 4, bytes.begin() + 4 + static_cast<std::ptrdiff_t>(take)),
            n <= avail};
}

} // namespace

std::vector<std::uint8_t> unpack_payload(std::span<const std::uint32_t> indices, int bits_per_symbol) {
    auto [bytes, ok] = unpack_lenient(indices, bits_per_symbol);
    if (!ok) throw MalformedFile("payload length prefix exceeds the demodulated data");
    return bytes;
}

std::vector<double> modulate_payload(std::span<const std::uint8_t> bytes, const WaveformCodebook& cb,
                                     const PayloadStreamOptions& options) {
    auto idx = training_indices(options.training_symbols, cb.size(), options.training_seed);
    const auto payload = pack_payload(bytes, bits_per_index(cb.size()));
    idx.insert(idx.end(), payload.begin(), payload.end());
    return modulate_stream(idx, cb);
}

PayloadDecode demodulate_payload(std::span<const double> samples, const WaveformCodebook& cb,
                                 const PayloadStreamOptions& options, bool use_training) {
    const std::size_t N = cb.params().samples_per_symbol;
    const std::size_t T = options.training_symbols;
    if (samples.size() < T * N) throw MalformedFile("stream is shorter than its training preamble");
    PayloadDecode out;
    if (use_training) {
        if (T < 2) throw InvalidArgument("training requires at least 2 preamble symbols");
        const auto tr = training_indices(T, cb.size(), options.training_seed);
        out.estimate = train_from_samples(samples.first(T * N), cb, tr);
    }
    const auto dec = demodulate_stream(samples.subspan(T * N), cb,
                                       out.estimate ? &*out.estimate : nullptr);
    const int bps = bits_per_index(cb.size());
    const std::uint32_t mask = (1u << bps) - 1;
    out.indices.reserve(dec.symbols.size());
    for (const auto& d : dec.symbols) out.indices.push_back(d.index);
    std::vector<std::uint32_t> masked(out.indices);
    for (auto& v : masked) v &= mask;
    auto [bytes, ok] = unpack_lenient(masked, bps);
    out.bytes = std::move(bytes);
    out.length_valid = ok;
    return out;
}

std::vector<double> transmit_frames(std::span<const std::vector<std::uint8_t>> speech_frames,
                                    std::uint16_t start_counter, const FrameCodec& codec,
                                    const FrameStreamOptions& options) {
    const auto& cb = codec.codebook();
    const auto tr = training_indices(options.training_symbols, cb.size(), options.training_seed);
    auto out = modulate_stream(tr, cb);
    const std::size_t F = codec.config().frame_samples();
    out.reserve(out.size() + speech_frames.size() * F);
    for (std::size_t i = 0; i < speech_frames.size(); ++i) {
        if (is_silence_slot(i, options.silence_period)) {
            out.insert(out.end(), F, 0.0);
            continue;
        }
        const auto counter = static_cast<std::uint16_t>(start_counter + i);
        const auto idx = codec.encode(speech_frames[i], counter);
        const auto w = modulate_stream(idx, cb);
        out.insert(out.end(), w.begin(), w.end());
    }
    return out;
}

namespace {

double expected_symbol_energy(const std::optional<ChannelEstimate>& est, const SymbolParams& p) {
    double expected = 0.0;
    if (est) {
        for (std::size_t k = 0; k < est->harmonics(); ++k) {
            expected += std::norm(est->mean[k]) + est->variance[k];
        }
    } else {
        expected = p.harmonics * p.amplitude * p.amplitude;
    }
    return expected;
}

} // namespace

FrameStreamDecode receive_frames(std::span<const double> samples, const FrameCodec& codec,
                                 const FrameStreamOptions& options, bool use_training) {
    const auto& cb = codec.codebook();
    const auto& p = cb.params();
    const std::size_t N = p.samples_per_symbol;
    const std::size_t T = options.training_symbols * N;
    const std::size_t F = codec.config().frame_samples();
    const std::size_t H = static_cast<std::size_t>(codec.config().header_symbols) * N;
    if (use_training && options.training_symbols < 2) {
        throw InvalidArgument("training requires at least 2 preamble symbols");
    }
    FrameStreamDecode out;
    if (samples.size() < T + F) return out;

    // The first header lies within one frame of the end of the preamble as long
    // as the channel delay is shorter than a frame.
    const std::size_t window = std::min(F + H - 1, samples.size() - T);
    const auto sync = header_sync(samples.subspan(T, window), codec);
    if (!sync) return out;

    const auto tr = use_training ? training_indices(options.training_symbols, cb.size(), options.training_seed)
                                 : std::vector<std::uint32_t>{};
    auto decode_at = [&](std::size_t delay) {
        FrameStreamDecode d;
        d.sync = SyncResult{delay, sync->confidence};
        if (use_training) d.estimate = train_from_samples(samples.subspan(delay, T), cb, tr);
        const double expected = expected_symbol_energy(d.estimate, p);
        const std::size_t start = T + delay;
        SilenceDetector detector;
        for (std::size_t slot = 0; start + (slot + 1) * F <= samples.size(); ++slot) {
            const auto frame = samples.subspan(start + slot * F, F);
            ReceivedFrame rf;
            rf.slot = slot;
            rf.cls = detector.classify(frame);
            if (rf.cls == FrameClass::speech) {
                const auto dec = demodulate_stream(frame, cb, d.estimate ? &*d.estimate : nullptr);
                rf.result = codec.decode(dec.symbols, expected);
            }
            d.frames.push_back(std::move(rf));
        }
        return d;
    };
    auto first_ok = [](const FrameStreamDecode& d) {
        return !d.frames.empty() && d.frames.front().result &&
               std::holds_alternative<DecodedFrame>(*d.frames.front().result);
    };

    // The (a,b,a,b) header repeats after two symbols, so a payload that starts
    // with (a,b), or a previous frame that ends with it, moves the correlation
    // peak by two symbols. Those neighbours are tried when the first frame
    // fails to decode.
    out = decode_at(sync->offset);
    if (first_ok(out)) return out;
    const std::size_t step = 2 * N;
    for (const long shift : {-static_cast<long>(step), static_cast<long>(step)}) {
        const long cand = static_cast<long>(sync->offset) + shift;
        if (cand < 0 || static_cast<std::size_t>(cand) >= F || T + cand + F > samples.size()) continue;
        auto alt = decode_at(static_cast<std::size_t>(cand));
        if (first_ok(alt)) return alt;
    }
    return out;
}

} // namespace dov
