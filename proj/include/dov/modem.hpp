#pragma once

// Harmonic 4-PSK symbol synthesis and frequency-domain demodulation.
//
// A DoV symbol is N samples of K equal-amplitude harmonics of f0 = fs/N
// (carriers k0 .. k0+K-1), each phase-modulated by one quaternary digit:
//
//   s_m[n] = Re( sum_k A*exp(j*pi*phi_{m,k}/2) * exp(j*2*pi*(k+k0)*n/N) )
//
// Harmonics are integer DFT bins, so demultiplexing a received symbol is a
// K-bin DFT and the carriers are exactly orthogonal over one symbol.

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dov/quatcode.hpp"

namespace dov {

using cplx = std::complex<double>;
using PskSequence = std::vector<cplx>;

struct SymbolParams {
    double sample_rate = 8000.0;
    int samples_per_symbol = 20;  // N
    int harmonics = 8;            // K
    int first_harmonic = 1;       // k0
    double amplitude = 1.0;       // A, full-scale relative

    double fundamental_hz() const { return sample_rate / samples_per_symbol; }
    double baud_rate() const { return sample_rate / samples_per_symbol; }
    double harmonic_hz(int k) const { return (k + first_harmonic) * fundamental_hz(); }
    double symbol_seconds() const { return samples_per_symbol / sample_rate; }

    // Throws InvalidArgument unless k0 >= 1, K >= 1, A > 0 and every carrier lies
    // strictly below Nyquist.
    void validate() const;
};

// The 4-PSK point for digit d, A*exp(j*pi*d/2), with exact components.
cplx psk_point(std::uint8_t digit, double amplitude) noexcept;

PskSequence psk_sequence(const QuaternaryWord& word, double amplitude);

std::vector<double> synthesize_symbol(const SymbolParams& params, const QuaternaryWord& word);

// Synthesizes an arbitrary per-harmonic complex spectrum (used to rebuild audio
// after a PSK-domain channel).
std::vector<double> synthesize_psk(const SymbolParams& params, std::span<const cplx> psk);

// C_k = (2/N) * sum_n x[n] * exp(-j*2*pi*(k+k0)*n/N).
PskSequence demultiplex(std::span<const double> samples, const SymbolParams& params);

struct ChannelEstimate {
    std::vector<cplx> mean;        // mu_k; arg is the phase shift, |.| the gain
    std::vector<double> variance;  // sigma^2_k, floored
    std::size_t training_length = 0;
    bool variance_floored = false;

    std::size_t harmonics() const noexcept { return mean.size(); }
    double phase(std::size_t k) const { return std::arg(mean[k]); }
    double gain(std::size_t k) const { return std::abs(mean[k]); }

    // No rotation, unit gain, equal variances: the corrected rule then makes the
    // same decisions as plain minimum-distance detection.
    static ChannelEstimate identity(int harmonics, double amplitude);
};

// Variance floor relative to A^2.
inline constexpr double kVarianceFloor = 1e-6;

// Sample mean and unbiased sample variance of the de-rotated training symbols.
// Throws InvalidArgument when fewer than 2 symbols are supplied or shapes differ.
ChannelEstimate estimate_channel(std::span<const PskSequence> received,
                                 std::span<const QuaternaryWord> sent,
                                 const SymbolParams& params);

class WaveformCodebook {
public:
    // Uses params.amplitude as given.
    WaveformCodebook(const SymbolParams& params, QuaternaryCodebook quat);

    // Picks A so that the largest sample magnitude over all waveforms equals
    // peak (0.9 of full scale by default).
    static WaveformCodebook normalized(SymbolParams params, QuaternaryCodebook quat,
                                       double peak = 0.9);

    const SymbolParams& params() const noexcept { return params_; }
    const QuaternaryCodebook& quat() const noexcept { return quat_; }
    std::size_t size() const noexcept { return quat_.size(); }
    const std::vector<double>& waveform(std::size_t m) const { return waveforms_[m]; }
    double peak() const noexcept { return peak_; }
    // N*K*A^2/2, shared by every waveform.
    double symbol_energy() const noexcept;

private:
    SymbolParams params_;
    QuaternaryCodebook quat_;
    std::vector<std::vector<double>> waveforms_;
    double peak_ = 0.0;
};

struct Decision {
    std::uint32_t index = 0;
    double reliability = 0.0;  // (best - second) / best, clamped to [0, 1]
    double energy = 0.0;       // sum_k |C_k|^2 of the demultiplexed symbol
};

// argmin_m sum_k |C_k - A*exp(j*pi*phi_{m,k}/2)|^2, smallest index on ties.
std::uint32_t demodulate_ml(std::span<const cplx> psk, const WaveformCodebook& cb);

enum class CorrelationSearch {
    automatic,   // one correlation per negation pair when the codebook is reflection-symmetric
    exhaustive,  // all M candidates
};

// argmax_m Re( sum_k C_k * (A/sigma^2_k) * exp(-j*pi*phi_{m,k}/2 - j*phase_k) ).
Decision demodulate_corrected(std::span<const cplx> psk, const WaveformCodebook& cb,
                              const ChannelEstimate& est,
                              CorrelationSearch search = CorrelationSearch::automatic);

std::vector<double> modulate_stream(std::span<const std::uint32_t> indices,
                                    const WaveformCodebook& cb);

struct StreamDecode {
    std::vector<Decision> symbols;
    std::size_t trailing_samples = 0;  // partial symbol left at the end
};

// Symbol-by-symbol demodulation of aligned audio. Without an estimate the
// identity estimate is used.
StreamDecode demodulate_stream(std::span<const double> samples, const WaveformCodebook& cb,
                               const ChannelEstimate* est = nullptr);

// Demultiplexes consecutive aligned symbols.
std::vector<PskSequence> demultiplex_stream(std::span<const double> samples,
                                            const SymbolParams& params);

} // namespace dov
