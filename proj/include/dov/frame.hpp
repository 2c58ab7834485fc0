#pragma once

// Secure-voice frame layer.
//
// Frame on the wire (DoV symbols):
//   header (4 fixed symbols a,b,a,b) | RS codeword
// RS message, packed MSB first into 6-bit symbols:
//   counter (16) | encrypted speech (96 or 144) | CRC-8 over plaintext speech||counter
// Low mode: 64-word codebook, one RS symbol per DoV symbol, RS(28,20).
// High mode: 4096-word codebook, two RS symbols per DoV symbol (first in the
// high-order 6 bits), RS(40,28).

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "dov/cipher.hpp"
#include "dov/modem.hpp"
#include "dov/reed_solomon.hpp"

namespace dov {

enum class FrameMode { low, high };

FrameMode parse_frame_mode(std::string_view text);
const char* frame_mode_name(FrameMode mode) noexcept;

struct FrameConfig {
    FrameMode mode = FrameMode::low;
    int codebook_size = 64;
    int bits_per_dov_symbol = 6;
    int rs_symbols_per_dov_symbol = 1;
    int header_symbols = 4;
    int payload_symbols = 28;
    int rs_n = 28;
    int rs_k = 20;
    int speech_bits = 96;
    int counter_bits = 16;
    int crc_bits = 8;
    SymbolParams symbol;  // N = 20, K = 8, k0 = 1 at 8 kHz

    // Reliability weights for erasure selection.
    double margin_weight = 0.7;
    double energy_weight = 0.3;

    // Builds the constants for a mode and checks the bit-budget identities.
    static FrameConfig make(FrameMode mode);

    int total_symbols() const noexcept { return header_symbols + payload_symbols; }
    int frame_samples() const noexcept { return total_symbols() * symbol.samples_per_symbol; }
    double frame_seconds() const { return frame_samples() / symbol.sample_rate; }
    double header_seconds() const {
        return header_symbols * symbol.samples_per_symbol / symbol.sample_rate;
    }
    int message_bits() const noexcept { return counter_bits + speech_bits + crc_bits; }
    // Time covered by one full cycle of the frame counter.
    double counter_span_seconds() const {
        return double(1u << counter_bits) * frame_seconds();
    }
    // Throws InvalidArgument when any identity fails.
    void validate() const;
};

// Default codebook seed for the frame layer; both ends must agree.
inline constexpr std::uint64_t kFrameCodebookSeed = 3;

// Quaternary codebook used by the frame layer for a mode (n = 8).
QuaternaryCodebook frame_codebook(FrameMode mode, std::uint64_t seed = kFrameCodebookSeed);

// Index pair at maximum Lee (hence Euclidean) distance, smallest indices first.
std::pair<std::uint32_t, std::uint32_t> header_pair(const QuaternaryCodebook& cb);

struct DecodedFrame {
    std::vector<std::uint8_t> speech_bits;
    std::uint16_t counter = 0;
    int erasures_used = 0;
    int attempts = 0;
};

struct FrameLoss {
    int attempts = 0;
    int rs_successes = 0;
    int best_crc_distance = 8;  // Hamming distance of the closest CRC seen
};

struct Desync {
    int header_mismatches = 0;
};

using FrameResult = std::variant<DecodedFrame, FrameLoss, Desync>;

class FrameCodec {
public:
    FrameCodec(FrameConfig config, CipherSession session, WaveformCodebook codebook);

    const FrameConfig& config() const noexcept { return config_; }
    const WaveformCodebook& codebook() const noexcept { return codebook_; }
    const CipherSession& session() const noexcept { return session_; }
    const ReedSolomon& rs() const noexcept { return rs_; }
    std::pair<std::uint32_t, std::uint32_t> header() const noexcept { return header_; }
    std::vector<std::uint32_t> header_indices() const;
    std::vector<double> header_waveform() const;

    // Full frame as DoV indices, header included. speech_bits holds one bit per
    // element. Throws InvalidArgument for a wrong payload size.
    std::vector<std::uint32_t> encode(std::span<const std::uint8_t> speech_bits,
                                      std::uint16_t counter) const;

    // Message (pre-RS) symbols for a frame, exposed for tests.
    std::vector<gf64::Element> message_symbols(std::span<const std::uint8_t> speech_bits,
                                               std::uint16_t counter) const;

    // Erasure-retry decoding of one frame of symbol decisions (header
    // included). Reliabilities combine the demodulator margin with the symbol
    // energy deviation from expected_energy.
    FrameResult decode(std::span<const Decision> symbols, double expected_energy) const;

    // Same, from explicit indices and per-DoV-symbol reliabilities.
    FrameResult decode_indices(std::span<const std::uint32_t> indices,
                               std::span<const double> reliabilities) const;

    double reliability(const Decision& d, double expected_energy) const;

private:
    FrameConfig config_;
    CipherSession session_;
    WaveformCodebook codebook_;
    ReedSolomon rs_;
    std::pair<std::uint32_t, std::uint32_t> header_;
};

struct SyncResult {
    std::size_t offset = 0;
    double confidence = 0.0;
};

// Normalized cross-correlation of the header waveform over every integer lag
// of the window; best lag when its correlation reaches min_correlation.
// Throws InvalidArgument when the window is shorter than one frame.
std::optional<SyncResult> header_sync(std::span<const double> samples, const FrameCodec& codec,
                                      double min_correlation = 0.5);

// Replaces every period-th frame (indices period-1, 2*period-1, ...) with zeros.
std::vector<std::vector<double>> silence_schedule(std::vector<std::vector<double>> frames,
                                                  int period);
bool is_silence_slot(std::size_t frame_index, int period) noexcept;

enum class FrameClass { speech, silent };

// Classifies frames as silent when their energy is below 0.01 times the
// running median of previous speech-frame energies. Exact zeros are always
// silent.
class SilenceDetector {
public:
    explicit SilenceDetector(double ratio = 0.01, std::size_t history = 64)
        : ratio_(ratio), history_(history) {}

    FrameClass classify(std::span<const double> frame);

private:
    double ratio_;
    std::size_t history_;
    std::vector<double> energies_;
};

} // namespace dov
