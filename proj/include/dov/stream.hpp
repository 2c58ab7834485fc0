#pragma once

// Stream assembly shared by the CLI, the Python module and the end-to-end
// tests: a seeded training preamble followed by either a raw byte payload or a
// sequence of secure-voice frames.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dov/frame.hpp"
#include "dov/modem.hpp"

namespace dov {

// Default training length; 4 s is the extended-reliability setting.
inline constexpr double kDefaultTrainingSeconds = 2.0;
inline constexpr std::uint64_t kDefaultTrainingSeed = 0x5eed;

std::size_t training_symbol_count(double seconds, const SymbolParams& params);

// Training index l is splitmix64 output l (seeded with seed) modulo M.
std::vector<std::uint32_t> training_indices(std::size_t count, std::size_t codebook_size,
                                            std::uint64_t seed);

// Estimates the channel from a demultiplexed, aligned preamble.
ChannelEstimate train_from_samples(std::span<const double> preamble, const WaveformCodebook& cb,
                                   std::span<const std::uint32_t> training);

int bits_per_index(std::size_t codebook_size);

// Byte payload to indices: 32-bit big-endian byte count, then the bytes, MSB
// first, zero-padded to a whole number of indices.
std::vector<std::uint32_t> pack_payload(std::span<const std::uint8_t> bytes, int bits_per_symbol);
// Inverse of pack_payload. Throws MalformedFile when the length prefix
// exceeds the available data.
std::vector<std::uint8_t> unpack_payload(std::span<const std::uint32_t> indices,
                                         int bits_per_symbol);

// One bit per element, MSB first.
std::vector<std::uint8_t> bytes_to_bits(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> bits_to_bytes(std::span<const std::uint8_t> bits);

struct PayloadStreamOptions {
    std::size_t training_symbols = 0;
    std::uint64_t training_seed = kDefaultTrainingSeed;
};

std::vector<double> modulate_payload(std::span<const std::uint8_t> bytes,
                                     const WaveformCodebook& cb,
                                     const PayloadStreamOptions& options);

struct PayloadDecode {
    std::vector<std::uint8_t> bytes;  // truncated to the data present if the prefix overruns
    bool length_valid = true;         // false when the length prefix overruns the data
    std::vector<std::uint32_t> indices;
    std::optional<ChannelEstimate> estimate;
};

// use_training = false skips the preamble without estimating.
PayloadDecode demodulate_payload(std::span<const double> samples, const WaveformCodebook& cb,
                                 const PayloadStreamOptions& options, bool use_training);

struct FrameStreamOptions {
    std::size_t training_symbols = 0;
    std::uint64_t training_seed = kDefaultTrainingSeed;
    int silence_period = 0;  // 0 disables silence insertion
};

// speech_frames[i] is sent with counter start_counter + i (mod 2^16). Frames in
// silence slots are replaced by zeros and their payload is dropped.
std::vector<double> transmit_frames(std::span<const std::vector<std::uint8_t>> speech_frames,
                                    std::uint16_t start_counter, const FrameCodec& codec,
                                    const FrameStreamOptions& options);

struct ReceivedFrame {
    std::size_t slot = 0;
    FrameClass cls = FrameClass::speech;
    std::optional<FrameResult> result;  // empty for silent frames
};

struct FrameStreamDecode {
    std::optional<SyncResult> sync;
    std::optional<ChannelEstimate> estimate;
    std::vector<ReceivedFrame> frames;
};

// Locates the first header, trains on the preceding preamble when requested
// and decodes contiguous frames.
FrameStreamDecode receive_frames(std::span<const double> samples, const FrameCodec& codec,
                                 const FrameStreamOptions& options, bool use_training);

} // namespace dov
