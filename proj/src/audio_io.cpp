#include "dov/audio_io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>

#include "dov/errors.hpp"

namespace dov {

namespace {

std::uint32_t le32(const std::uint8_t* p) {
    return p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t le16(const std::uint8_t* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

void put32(std::vector<std::uint8_t>& v, std::uint32_t x) {
    for (int i = 0; i < 4; ++i) v.push_back(static_cast<std::uint8_t>(x >> (8 * i)));
}

void put16(std::vector<std::uint8_t>& v, std::uint16_t x) {
    v.push_back(static_cast<std::uint8_t>(x & 0xFF));
    v.push_back(static_cast<std::uint8_t>(x >> 8));
}

std::vector<std::uint8_t> slurp(std::istream& in) {
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void check_rate(const AudioBuffer& b) {
    if (b.rate != kAudioRate) {
        throw UnsupportedFormat("sample rate " + std::to_string(b.rate) + " Hz; only 8000 Hz is supported");
    }
}

} // namespace

std::int16_t quantize_sample(double x) {
    if (!std::isfinite(x) || x > 1.0 || x < -1.0) {
        throw ClippingError("sample value " + std::to_string(x) + " outside [-1, 1]");
    }
    const double r = std::round(x * 32768.0);  // std::round is half away from zero
    if (r > 32767.0) return 32767;
    return static_cast<std::int16_t>(r);
}

double dequantize_sample(std::int16_t s) noexcept { return s / 32768.0; }

std::vector<std::uint8_t> encode_pcm16(std::span<const double> samples) {
    std::vector<std::uint8_t> out;
    out.reserve(samples.size() * 2);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        std::int16_t q;
        try {
            q = quantize_sample(samples[i]);
        } catch (const ClippingError& e) {
            throw ClippingError(std::string(e.what()) + " at sample " + std::to_string(i));
        }
        put16(out, static_cast<std::uint16_t>(q));
    }
    return out;
}

std::vector<double> decode_pcm16(std::span<const std::uint8_t> bytes) {
    if (bytes.size() % 2 != 0) throw MalformedFile("PCM byte count is odd");
    std::vector<double> out(bytes.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = dequantize_sample(static_cast<std::int16_t>(le16(&bytes[2 * i])));
    }
    return out;
}

AudioBuffer read_wav(std::istream& in) {
    const auto bytes = slurp(in);
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
        throw MalformedFile("not a RIFF/WAVE file");
    }
    bool have_fmt = false;
    AudioBuffer buf;
    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const std::uint8_t* h = bytes.data() + pos;
        const std::uint32_t size = le32(h + 4);
        const std::size_t body = pos + 8;
        if (size > bytes.size() - body) throw MalformedFile("WAV chunk runs past end of file");
        if (std::memcmp(h, "fmt ", 4) == 0) {
            if (size < 16) throw MalformedFile("WAV fmt chunk too short");
            const std::uint8_t* f = bytes.data() + body;
            const int format = le16(f);
            const int channels = le16(f + 2);
            const std::uint32_t rate = le32(f + 4);
            const int bits = le16(f + 14);
            if (format != 1) throw UnsupportedFormat("WAV format tag " + std::to_string(format) + "; only PCM (1) is supported");
            if (channels != 1) throw UnsupportedFormat(std::to_string(channels) + " channels; only mono is supported");
            if (bits != 16) throw UnsupportedFormat(std::to_string(bits) + "-bit samples; only 16-bit is supported");
            if (rate != static_cast<std::uint32_t>(kAudioRate)) {
                throw UnsupportedFormat("sample rate " + std::to_string(rate) + " Hz; only 8000 Hz is supported");
            }
            have_fmt = true;
        } else if (std::memcmp(h, "data", 4) == 0) {
            if (!have_fmt) throw MalformedFile("WAV data chunk before fmt chunk");
            buf.samples = decode_pcm16(std::span(bytes.data() + body, size));
            return buf;
        }
        pos = body + size + (size & 1);
    }
    throw MalformedFile(have_fmt ? "WAV file has no data chunk" : "WAV file has no fmt chunk");
}

AudioBuffer read_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return read_wav(in);
}

void write_wav(std::ostream& out, const AudioBuffer& buffer) {
    check_rate(buffer);
    const auto pcm = encode_pcm16(buffer.samples);
    std::vector<std::uint8_t> h;
    h.insert(h.end(), {'R', 'I', 'F', 'F'});
    put32(h, static_cast<std::uint32_t>(36 + pcm.size()));
    h.insert(h.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
    put32(h, 16);
    put16(h, 1);
    put16(h, 1);
    put32(h, kAudioRate);
    put32(h, kAudioRate * 2);
    put16(h, 2);
    put16(h, 16);
    h.insert(h.end(), {'d', 'a', 't', 'a'});
    put32(h, static_cast<std::uint32_t>(pcm.size()));
    out.write(reinterpret_cast<const char*>(h.data()), static_cast<std::streamsize>(h.size()));
    out.write(reinterpret_cast<const char*>(pcm.data()), static_cast<std::streamsize>(pcm.size()));
    if (!out) throw IoError("WAV write failed");
}

void write_wav(const std::string& path, const AudioBuffer& buffer) {
    check_rate(buffer);
    // Quantize first so a clipping error leaves no partial file behind.
    (void)encode_pcm16(buffer.samples);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot create " + path);
    write_wav(out, buffer);
}

AudioBuffer read_raw_pcm(std::istream& in) {
    const auto bytes = slurp(in);
    AudioBuffer buf;
    buf.samples = decode_pcm16(bytes);
    return buf;
}

AudioBuffer read_raw_pcm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return read_raw_pcm(in);
}

void write_raw_pcm(std::ostream& out, const AudioBuffer& buffer) {
    check_rate(buffer);
    const auto pcm = encode_pcm16(buffer.samples);
    out.write(reinterpret_cast<const char*>(pcm.data()), static_cast<std::streamsize>(pcm.size()));
    if (!out) throw IoError("PCM write failed");
}

void write_raw_pcm(const std::string& path, const AudioBuffer& buffer) {
    check_rate(buffer);
    (void)encode_pcm16(buffer.samples);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot create " + path);
    write_raw_pcm(out, buffer);
}

} // namespace dov
