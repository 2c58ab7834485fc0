#pragma once

// Distortion and link-performance statistics.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dov/channelsim.hpp"
#include "dov/modem.hpp"

namespace dov {

using BivariatePoint = std::array<double, 2>;
using BivariateSample = std::vector<BivariatePoint>;

// Mardia's multivariate skewness and kurtosis for p = 2, with the 1/n sample
// covariance. For a bivariate normal sample they tend to 0 and p(p+2) = 8.
// Throw DegenerateSample for n < 3 or a singular covariance.
double mardia_skewness(std::span<const BivariatePoint> sample);
double mardia_kurtosis(std::span<const BivariatePoint> sample);

// Returned by snr_db when received == reference.
inline constexpr double kSnrCapDb = 200.0;

// 10*log10(sum ref^2 / sum (rx - ref)^2). Throws InvalidArgument on length
// mismatch or an all-zero reference.
double snr_db(std::span<const double> reference, std::span<const double> received);

// Per-symbol, per-harmonic distortion: received PSK value de-rotated by the
// transmitted phase, divided by A, minus its per-harmonic mean. Row l holds
// symbol l.
std::vector<std::vector<cplx>> distortion_stream(std::span<const PskSequence> received,
                                                 std::span<const QuaternaryWord> sent,
                                                 double amplitude);

// Distortion of one harmonic as (real, imag) points.
BivariateSample harmonic_sample(const std::vector<std::vector<cplx>>& distortion,
                                std::size_t harmonic);

// Pearson correlations over concatenated real and imaginary parts.
// inter[i][j]: harmonic i vs harmonic j; lag1[k]: harmonic k vs itself one
// symbol later. Entries with zero variance are NaN and flagged.
struct CorrelationReport {
    std::vector<std::vector<double>> inter;
    std::vector<double> lag1;
    std::vector<std::vector<bool>> inter_degenerate;
    std::vector<bool> lag1_degenerate;

    double max_offdiag_abs() const;
    double max_lag1_abs() const;
};

// Throws InvalidArgument for fewer than 100 symbols.
CorrelationReport correlation_report(const std::vector<std::vector<cplx>>& distortion);

double pearson(std::span<const double> x, std::span<const double> y);

struct SeConfig {
    std::vector<double> durations_s;      // training durations
    int runs = 200;                       // Monte Carlo runs per duration, >= 100
    std::size_t reference_symbols = 10000;
    std::uint64_t seed = 1;
};

// One row per duration: maximum over harmonics of the standard error of the
// phase estimate, of the normalized variance estimate and, for reference, the
// raw standard deviation of the variance estimate.
struct SeRow {
    double duration_s = 0.0;
    std::size_t symbols = 0;
    double se_phase = 0.0;
    double se_variance_normalized = 0.0;
    double se_variance_raw = 0.0;
};

// Simulates training on the parametric channel in the PSK domain. Reference
// phase and variance come from one run of reference_symbols symbols.
// SE^2_phi    = (1/L) sum_l wrap(phi_l - phi_ref)^2
// SE^2_sigma2 = (1/L) sum_l (s2_l - s2_ref)^2 / s2_ref
std::vector<SeRow> estimator_standard_error(const ParametricChannelModel& model,
                                            const WaveformCodebook& cb,
                                            const SeConfig& config);

// Least-squares fit y = c / sqrt(t) through the origin; r2 is the coefficient
// of determination about the mean of y.
struct InverseSqrtFit {
    double c = 0.0;
    double r2 = 0.0;
};
InverseSqrtFit fit_inverse_sqrt(std::span<const double> t, std::span<const double> y);

struct ErrorCounts {
    std::size_t symbols = 0;
    std::size_t symbol_errors = 0;
    std::size_t bits = 0;
    std::size_t bit_errors = 0;

    double ser() const { return symbols ? double(symbol_errors) / double(symbols) : 0.0; }
    double ber() const { return bits ? double(bit_errors) / double(bits) : 0.0; }
};

// Compares aligned index sequences; each index carries bits_per_symbol bits.
// Throws InvalidArgument on length mismatch.
ErrorCounts error_counters(std::span<const std::uint32_t> sent,
                           std::span<const std::uint32_t> received, int bits_per_symbol);

struct FrameCounts {
    std::size_t frames = 0;
    std::size_t lost = 0;
    std::size_t concealed = 0;  // silent by design

    // Lost frames over all frames; concealed frames are not errors.
    double fer() const { return frames ? double(lost) / double(frames) : 0.0; }
};

// Wilson score interval at ~95% for k successes out of n.
std::array<double, 2> wilson_interval(std::size_t k, std::size_t n, double z = 1.96);

// One-sided two-proportion z statistic for p1 < p2.
double two_proportion_z(std::size_t k1, std::size_t n1, std::size_t k2, std::size_t n2);

} // namespace dov
