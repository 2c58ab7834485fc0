#pragma once

// Desk-scale voice-channel simulator.
//
// The parametric model acts per harmonic in the PSK domain: a constant complex
// gain g_k*exp(j*phi_k) followed by independent, memoryless circular Gaussian
// noise of variance sigma^2_k (in units of A^2). Time-domain impairments and an
// external codec hook operate on audio samples.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dov/modem.hpp"

namespace dov {

struct ParametricChannelModel {
    std::vector<double> gains;
    std::vector<double> phases_rad;
    std::vector<double> noise_vars;  // units of A^2

    std::size_t harmonics() const noexcept { return gains.size(); }
    // Throws InvalidArgument on length mismatch or negative gains/variances.
    void validate() const;

    static ParametricChannelModel identity(int harmonics);
    // Synthetic presets with noise variance rising with harmonic index (low
    // harmonics least distorted) and a linear-phase group delay. Not calibrated
    // against any real codec.
    static ParametricChannelModel amr_like(int harmonics);
    static ParametricChannelModel silk_like(int harmonics);
};

struct Dropout {
    std::size_t start_symbol = 0;
    std::size_t length = 0;  // symbols
};

struct TimeImpairments {
    std::optional<double> snr_db;
    std::optional<double> gain;
    std::vector<Dropout> dropouts;
    std::size_t delay_samples = 0;
    int samples_per_symbol = 20;  // converts dropout spans to samples

    bool empty() const noexcept {
        return !snr_db && !gain && dropouts.empty() && delay_samples == 0;
    }
    void validate() const;
};

// out_k = g_k*exp(j*phi_k)*in_k + eta, eta ~ CN(0, sigma^2_k * A^2).
std::vector<PskSequence> apply_parametric(const std::vector<PskSequence>& stream,
                                          const ParametricChannelModel& model,
                                          double amplitude, std::uint64_t seed);

// Applied in order: delay (zero prefix, output grows by delay), gain, dropouts
// (zeroed symbol spans on the delayed timeline), then white Gaussian noise at
// the requested SNR relative to the post-gain signal power.
std::vector<double> apply_time_impairments(const std::vector<double>& samples,
                                           const TimeImpairments& imp, std::uint64_t seed);

// Inverts the training estimate: g_k = |mu_k|/A, phi_k = arg mu_k,
// sigma^2_k = sigma_hat^2_k / A^2.
ParametricChannelModel fit_model(std::span<const PskSequence> received,
                                 std::span<const QuaternaryWord> sent,
                                 const SymbolParams& params);

// Demultiplexes aligned audio symbol by symbol, applies the parametric model and
// re-synthesizes. A trailing partial symbol is passed through unchanged.
std::vector<double> apply_parametric_audio(const std::vector<double>& samples,
                                           const SymbolParams& params,
                                           const ParametricChannelModel& model,
                                           std::uint64_t seed);

// Pipes audio through an external program: mono 16-bit little-endian PCM at
// 8 kHz on stdin, same on stdout. The command runs under /bin/sh. Output is
// trimmed or zero-padded to the input length; a length error larger than
// tolerance_samples, a missing program or a nonzero exit status raise
// ExternalChannelError.
std::vector<double> external_codec_channel(const std::vector<double>& samples,
                                           const std::string& command,
                                           std::size_t tolerance_samples = 20);

// JSON channel file: {"gains":[...], "phases_rad":[...], "noise_vars":[...],
// "impairments":{"snr_db":x, "gain":x, "dropouts":[[start,len],...],
// "delay_samples":n}} with impairments optional.
struct ChannelFile {
    ParametricChannelModel model;
    TimeImpairments impairments;
};

ChannelFile load_channel_file(const std::string& path, int samples_per_symbol);
ChannelFile parse_channel_json(const std::string& text, int samples_per_symbol);
std::string to_channel_json(const ChannelFile& file);

} // namespace dov
