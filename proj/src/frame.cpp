#include "dov/frame.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <string>

#include "dov/crc8.hpp"
#include "dov/errors.hpp"

namespace dov {

FrameMode parse_frame_mode(std::string_view text) {
    if (text == "low") return FrameMode::low;
    if (text == "high") return FrameMode::high;
    throw InvalidArgument("frame mode must be 'low' or 'high', got '" + std::string(text) + "'");
}

const char* frame_mode_name(FrameMode mode) noexcept {
    return mode == FrameMode::low ? "low" : "high";
}

FrameConfig FrameConfig::make(FrameMode mode) {
    FrameConfig c;
    c.mode = mode;
    if (mode == FrameMode::high) {
        c.codebook_size = 4096;
        c.bits_per_dov_symbol = 12;
        c.rs_symbols_per_dov_symbol = 2;
        c.payload_symbols = 20;
        c.rs_n = 40;
        c.rs_k = 28;
        c.speech_bits = 144;
    }
    c.validate();
    return c;
}

void FrameConfig::validate() const {
    symbol.validate();
    auto require = [](bool ok, const char* what) {
        if (!ok) throw InvalidArgument(std::string("frame config: ") + what);
    };
    require(codebook_size == (1 << bits_per_dov_symbol), "codebook size must be 2^bits");
    require(bits_per_dov_symbol == 6 * rs_symbols_per_dov_symbol,
            "each DoV symbol must carry whole 6-bit RS symbols");
    require(payload_symbols * bits_per_dov_symbol == rs_n * 6, "payload bits must equal RS length x 6");
    require(rs_k * 6 == message_bits(), "RS message must hold counter + speech + CRC exactly");
    require(counter_bits == 16 && crc_bits == 8, "counter is 16 bits and CRC is 8 bits");
    require(header_symbols == 4, "header is 4 DoV symbols");
    require(speech_bits % 8 == 0 && speech_bits <= 128 * 256, "speech bits out of range");
    require(margin_weight >= 0.0 && energy_weight >= 0.0 &&
                std::abs(margin_weight + energy_weight - 1.0) < 1e-12,
            "reliability weights must be non-negative and sum to 1");
}

QuaternaryCodebook frame_codebook(FrameMode mode, std::uint64_t seed) {
    // The 4096-word search takes seconds; keep one copy per (mode, seed).
    static std::mutex mu;
    static std::map<std::pair<int, std::uint64_t>, QuaternaryCodebook> cache;
    const auto key = std::make_pair(static_cast<int>(mode), seed);
    {
        std::lock_guard lock(mu);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    const int M = mode == FrameMode::low ? 64 : 4096;
    auto cb = codebook_search(8, M, seed);
    std::lock_guard lock(mu);
    return cache.emplace(key, std::move(cb)).first->second;
}

std::pair<std::uint32_t, std::uint32_t> header_pair(const QuaternaryCodebook& cb) {
    if (cb.size() < 2) throw InvalidArgument("header needs a codebook of at least 2 words");
    std::vector<std::uint32_t> packed(cb.size());
    for (std::size_t m = 0; m < cb.size(); ++m) packed[m] = cb[m].packed();
    int best = -1;
    std::pair<std::uint32_t, std::uint32_t> out{0, 1};
    for (std::size_t i = 0; i < packed.size(); ++i) {
        for (std::size_t j = i + 1; j < packed.size(); ++j) {
            const int d = lee_distance_packed(packed[i], packed[j]);
            if (d > best) {
                best = d;
                out = {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)};
            }
        }
    }
    return out;
}

namespace {

void push_bits(std::vector<std::uint8_t>& bits, std::uint32_t value, int count) {
    for (int b = count - 1; b >= 0; --b) bits.push_back(static_cast<std::uint8_t>((value >> b) & 1));
}

std::uint32_t read_bits(std::span<const std::uint8_t> bits, std::size_t pos, int count) {
    std::uint32_t v = 0;
    for (int i = 0; i < count; ++i) v = (v << 1) | (bits[pos + i] & 1);
    return v;
}

} // namespace

FrameCodec::FrameCodec(FrameConfig config, CipherSession session, WaveformCodebook codebook)
    : config_(std::move(config)),
      session_(std::move(session)),
      codebook_(std::move(codebook)),
      rs_(config_.rs_n, config_.rs_k) {
    config_.validate();
    if (static_cast<int>(codebook_.size()) != config_.codebook_size) {
        throw InvalidArgument("frame codebook must have " + std::to_string(config_.codebook_size) +
                              " words, got " + std::to_string(codebook_.size()));
    }
    const auto& p = codebook_.params();
    const auto& s = config_.symbol;
    if (p.samples_per_symbol != s.samples_per_symbol || p.harmonics != s.harmonics ||
        p.first_harmonic != s.first_harmonic || p.sample_rate != s.sample_rate) {
        throw InvalidArgument("codebook symbol parameters differ from the frame configuration");
    }
    header_ = header_pair(codebook_.quat());
}

std::vector<std::uint32_t> FrameCodec::header_indices() const {
    std::vector<std::uint32_t> h(config_.header_symbols);
    for (int i = 0; i < config_.header_symbols; ++i) h[i] = (i % 2 == 0) ? header_.first : header_.second;
    return h;
}

std::vector<double> FrameCodec::header_waveform() const {
    const auto h = header_indices();
    return modulate_stream(h, codebook_);
}

std::vector<gf64::Element> FrameCodec::message_symbols(std::span<const std::uint8_t> speech_bits,
                                                       std::uint16_t counter) const {
    if (static_cast<int>(speech_bits.size()) != config_.speech_bits) {
        throw InvalidArgument("frame payload must be " + std::to_string(config_.speech_bits) +
                              " bits, got " + std::to_string(speech_bits.size()));
    }
    for (auto b : speech_bits) {
        if (b > 1) throw InvalidArgument("speech bits must be 0 or 1");
    }
    std::vector<std::uint8_t> plain(speech_bits.begin(), speech_bits.end());
    push_bits(plain, counter, config_.counter_bits);
    const std::uint8_t crc = crc8_bits(plain);

    std::vector<std::uint8_t> msg;
    msg.reserve(config_.message_bits());
    push_bits(msg, counter, config_.counter_bits);
    const auto cipher = session_.encrypt_frame(speech_bits, counter);
    msg.insert(msg.end(), cipher.begin(), cipher.end());
    push_bits(msg, crc, config_.crc_bits);

    std::vector<gf64::Element> sym(config_.rs_k);
    for (int i = 0; i < config_.rs_k; ++i) sym[i] = static_cast<gf64::Element>(read_bits(msg, 6 * i, 6));
    return sym;
}

std::vector<std::uint32_t> FrameCodec::encode(std::span<const std::uint8_t> speech_bits,
                                              std::uint16_t counter) const {
    const auto code = rs_.encode(message_symbols(speech_bits, counter));
    auto out = header_indices();
    const int r = config_.rs_symbols_per_dov_symbol;
    for (int i = 0; i < config_.payload_symbols; ++i) {
        std::uint32_t idx = 0;
        for (int j = 0; j < r; ++j) idx = (idx << 6) | code[r * i + j];
        out.push_back(idx);
    }
    return out;
}

double FrameCodec::reliability(const Decision& d, double expected_energy) const {
    double energy_term = 0.0;
    if (expected_energy > 0.0) {
        energy_term = std::clamp(1.0 - std::abs(d.energy - expected_energy) / expected_energy, 0.0, 1.0);
    }
    return config_.margin_weight * std::clamp(d.reliability, 0.0, 1.0) +
           config_.energy_weight * energy_term;
}

FrameResult FrameCodec::decode(std::span<const Decision> symbols, double expected_energy) const {
    std::vector<std::uint32_t> idx(symbols.size());
    std::vector<double> rel(symbols.size());
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        idx[i] = symbols[i].index;
        rel[i] = reliability(symbols[i], expected_energy);
    }
    return decode_indices(idx, rel);
}

FrameResult FrameCodec::decode_indices(std::span<const std::uint32_t> indices,
                                       std::span<const double> reliabilities) const {
    const auto total = static_cast<std::size_t>(config_.total_symbols());
    if (indices.size() != total || reliabilities.size() != total) {
        throw InvalidArgument("frame decode expects " + std::to_string(total) + " symbols, got " +
                              std::to_string(indices.size()));
    }
    const auto h = header_indices();
    int mismatches = 0;
    for (std::size_t i = 0; i < h.size(); ++i) mismatches += indices[i] != h[i];
    if (2 * mismatches > config_.header_symbols) return Desync{mismatches};

    const int r = config_.rs_symbols_per_dov_symbol;
    const std::uint32_t mask = (1u << config_.bits_per_dov_symbol) - 1;
    std::vector<gf64::Element> word(config_.rs_n);
    std::vector<double> rs_rel(config_.rs_n);
    for (int i = 0; i < config_.payload_symbols; ++i) {
        const std::uint32_t v = indices[h.size() + i] & mask;
        for (int j = 0; j < r; ++j) {
            word[r * i + j] = static_cast<gf64::Element>((v >> (6 * (r - 1 - j))) & 63);
            rs_rel[r * i + j] = reliabilities[h.size() + i];
        }
    }
    std::vector<int> order(config_.rs_n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return rs_rel[a] < rs_rel[b]; });

    FrameLoss loss;
    for (int f = 0; f <= rs_.redundancy(); f += 2) {
        ++loss.attempts;
        const std::span<const int> erasures(order.data(), static_cast<std::size_t>(f));
        const auto dec = rs_.decode(word, erasures);
        if (!dec) continue;
        ++loss.rs_successes;
        std::vector<std::uint8_t> msg;
        msg.reserve(config_.message_bits());
        for (auto s : dec->message) push_bits(msg, s, 6);
        const auto counter = static_cast<std::uint16_t>(read_bits(msg, 0, config_.counter_bits));
        const std::span<const std::uint8_t> cipher(msg.data() + config_.counter_bits,
                                                   static_cast<std::size_t>(config_.speech_bits));
        const auto rx_crc = static_cast<std::uint8_t>(
            read_bits(msg, config_.counter_bits + config_.speech_bits, config_.crc_bits));
        auto plain = session_.decrypt_frame(cipher, counter);
        std::vector<std::uint8_t> checked = plain;
        push_bits(checked, counter, config_.counter_bits);
        const std::uint8_t crc = crc8_bits(checked);
        const int dist = std::popcount(static_cast<unsigned>(crc ^ rx_crc));
        loss.best_crc_distance = std::min(loss.best_crc_distance, dist);
        if (dist == 0) return DecodedFrame{std::move(plain), counter, f, loss.attempts};
    }
    return loss;
}

std::optional<SyncResult> header_sync(std::span<const double> samples, const FrameCodec& codec,
                                      double min_correlation) {
    const auto frame = static_cast<std::size_t>(codec.config().frame_samples());
    if (samples.size() < frame) {
        throw InvalidArgument("sync window of " + std::to_string(samples.size()) +
                              " samples is shorter than one frame (" + std::to_string(frame) + ")");
    }
    const auto h = codec.header_waveform();
    double hn = 0.0;
    for (double v : h) hn += v * v;
    hn = std::sqrt(hn);
    const std::size_t H = h.size();
    std::optional<SyncResult> best;
    double best_c = -2.0;
    // Running window energy for the normalization.
    double wn = 0.0;
    for (std::size_t i = 0; i < H; ++i) wn += samples[i] * samples[i];
    for (std::size_t lag = 0; lag + H <= samples.size(); ++lag) {
        if (lag > 0) {
            wn += samples[lag + H - 1] * samples[lag + H - 1] - samples[lag - 1] * samples[lag - 1];
            if (wn < 0.0) wn = 0.0;
        }
        if (wn <= 1e-18 * hn * hn) continue;
        double dot = 0.0;
        for (std::size_t i = 0; i < H; ++i) dot += h[i] * samples[lag + i];
        const double c = dot / (hn * std::sqrt(wn));
        if (c > best_c) {
            best_c = c;
            best = SyncResult{lag, std::min(c, 1.0)};
        }
    }
    if (!best || best->confidence < min_correlation) return std::nullopt;
    return best;
}

bool is_silence_slot(std::size_t frame_index, int period) noexcept {
    return period >= 2 && (frame_index + 1) % static_cast<std::size_t>(period) == 0;
}

std::vector<std::vector<double>> silence_schedule(std::vector<std::vector<double>> frames, int period) {
    if (period < 2) throw InvalidArgument("silence period must be >= 2");
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (is_silence_slot(i, period)) std::fill(frames[i].begin(), frames[i].end(), 0.0);
    }
    return frames;
}

FrameClass SilenceDetector::classify(std::span<const double> frame) {
    double e = 0.0;
    for (double v : frame) e += v * v;
    if (e == 0.0) return FrameClass::silent;
    if (!energies_.empty()) {
        std::vector<double> tmp = energies_;
        auto mid = tmp.begin() + static_cast<std::ptrdiff_t>(tmp.size() / 2);
        std::nth_element(tmp.begin(), mid, tmp.end());
        double median = *mid;
        if (tmp.size() % 2 == 0) {
            median = (median + *std::max_element(tmp.begin(), mid)) / 2.0;
        }
        if (e < ratio_ * median) return FrameClass::silent;
    }
    energies_.push_back(e);
    if (energies_.size() > history_) energies_.erase(energies_.begin());
    return FrameClass::speech;
}

} // namespace dov
