#pragma once

// 8 kHz mono 16-bit PCM, as WAV (RIFF) or headerless little-endian samples.
//
// Quantization: round(x * 32768) half away from zero. +1.0 saturates to 32767
// (one LSB below); anything outside [-1, 1] is a ClippingError.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace dov {

inline constexpr int kAudioRate = 8000;

struct AudioBuffer {
    std::vector<double> samples;
    int rate = kAudioRate;
};

std::int16_t quantize_sample(double x);
double dequantize_sample(std::int16_t s) noexcept;

// Little-endian s16 bytes <-> samples. Decoding rejects an odd byte count.
std::vector<std::uint8_t> encode_pcm16(std::span<const double> samples);
std::vector<double> decode_pcm16(std::span<const std::uint8_t> bytes);

AudioBuffer read_wav(const std::string& path);
AudioBuffer read_wav(std::istream& in);
void write_wav(const std::string& path, const AudioBuffer& buffer);
void write_wav(std::ostream& out, const AudioBuffer& buffer);

AudioBuffer read_raw_pcm(std::istream& in);
AudioBuffer read_raw_pcm(const std::string& path);
void write_raw_pcm(std::ostream& out, const AudioBuffer& buffer);
void write_raw_pcm(const std::string& path, const AudioBuffer& buffer);

} // namespace dov
