#include "dov/stats.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "dov/errors.hpp"
#include "dov/rng.hpp"

namespace dov {

namespace {

// Centers the sample and whitens it with the inverse Cholesky factor of the 1/n
// covariance, so (x_k - m)' S^-1 (x_l - m) = z_k . z_l.
std::vector<BivariatePoint> whiten(std::span<const BivariatePoint> x) {
    const std::size_t n = x.size();
    if (n < 3) throw DegenerateSample("Mardia statistics need at least 3 points");
    double m0 = 0.0, m1 = 0.0;
    for (const auto& p : x) {
        if (!std::isfinite(p[0]) || !std::isfinite(p[1])) {
            throw DegenerateSample("sample contains non-finite values");
        }
        m0 += p[0];
        m1 += p[1];
    }
    m0 /= n;
    m1 /= n;
    double s00 = 0.0, s01 = 0.0, s11 = 0.0;
    for (const auto& p : x) {
        const double a = p[0] - m0, b = p[1] - m1;
        s00 += a * a;
        s01 += a * b;
        s11 += b * b;
    }
    s00 /= n;
    s01 /= n;
    s11 /= n;
    const double det = s00 * s11 - s01 * s01;
    if (!(s00 > 0.0) || !(s11 > 0.0) || !(det > 1e-12 * s00 * s11)) {
        throw DegenerateSample("sample covariance is singular");
    }
    // S = L L', L = [[l00, 0], [l10, l11]].
    const double l00 = std::sqrt(s00);
    const double l10 = s01 / l00;
    const double l11 = std::sqrt(s11 - l10 * l10);
    std::vector<BivariatePoint> z(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = x[i][0] - m0, b = x[i][1] - m1;
        const double z0 = a / l00;
        z[i] = {z0, (b - l10 * z0) / l11};
    }
    return z;
}

double wrap_angle(double a) {
    return std::remainder(a, 2.0 * std::numbers::pi);
}

} // namespace

double mardia_skewness(std::span<const BivariatePoint> sample) {
    const auto z = whiten(sample);
    // sum_{k,l} (z_k . z_l)^3 = sum_{a,b,c} T_abc^2 with T_abc = sum_k z_ka z_kb z_kc.
    double t000 = 0.0, t001 = 0.0, t011 = 0.0, t111 = 0.0;
    for (const auto& p : z) {
        t000 += p[0] * p[0] * p[0];
        t001 += p[0] * p[0] * p[1];
        t011 += p[0] * p[1] * p[1];
        t111 += p[1] * p[1] * p[1];
    }
    const double total = t000 * t000 + 3.0 * t001 * t001 + 3.0 * t011 * t011 + t111 * t111;
    const double n = static_cast<double>(z.size());
    return total / (n * n);
}

double mardia_kurtosis(std::span<const BivariatePoint> sample) {
    const auto z = whiten(sample);
    double acc = 0.0;
    for (const auto& p : z) {
        const double r2 = p[0] * p[0] + p[1] * p[1];
        acc += r2 * r2;
    }
    return acc / static_cast<double>(z.size());
}

double snr_db(std::span<const double> reference, std::span<const double> received) {
    if (reference.size() != received.size()) {
        throw InvalidArgument("SNR: reference and received lengths differ");
    }
    double ps = 0.0, pn = 0.0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        ps += reference[i] * reference[i];
        const double e = received[i] - reference[i];
        pn += e * e;
    }
    if (ps == 0.0) throw InvalidArgument("SNR: reference signal is all zero");
    if (pn == 0.0) return kSnrCapDb;
    return std::min(kSnrCapDb, 10.0 * std::log10(ps / pn));
}

std::vector<std::vector<cplx>> distortion_stream(std::span<const PskSequence> received,
                                                 std::span<const QuaternaryWord> sent,
                                                 double amplitude) {
    if (received.size() != sent.size()) throw InvalidArgument("distortion: lengths differ");
    if (!(amplitude > 0.0)) throw InvalidArgument("distortion: amplitude must be positive");
    if (received.empty()) return {};
    const std::size_t K = received[0].size();
    std::vector<std::vector<cplx>> d(received.size(), std::vector<cplx>(K));
    std::vector<cplx> mean(K, 0.0);
    for (std::size_t l = 0; l < received.size(); ++l) {
        if (received[l].size() != K || sent[l].size() != K) {
            throw InvalidArgument("distortion: symbol " + std::to_string(l) + " has wrong length");
        }
        for (std::size_t k = 0; k < K; ++k) {
            d[l][k] = received[l][k] * std::conj(psk_point(sent[l][k], 1.0)) / amplitude;
            mean[k] += d[l][k];
        }
    }
    for (auto& m : mean) m /= static_cast<double>(received.size());
    for (auto& row : d) {
        for (std::size_t k = 0; k < K; ++k) row[k] -= mean[k];
    }
    return d;
}

BivariateSample harmonic_sample(const std::vector<std::vector<cplx>>& distortion,
                                std::size_t harmonic) {
    BivariateSample s;
    s.reserve(distortion.size());
    for (const auto& row : distortion) {
        if (harmonic >= row.size()) throw InvalidArgument("harmonic index out of range");
        s.push_back({row[harmonic].real(), row[harmonic].imag()});
    }
    return s;
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InvalidArgument("pearson: lengths differ");
    const std::size_t n = x.size();
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = x[i] - mx, b = y[i] - my;
        sxy += a * b;
        sxx += a * a;
        syy += b * b;
    }
    if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double CorrelationReport::max_offdiag_abs() const {
    double m = 0.0;
    for (std::size_t i = 0; i < inter.size(); ++i) {
        for (std::size_t j = 0; j < inter[i].size(); ++j) {
            if (i != j && !inter_degenerate[i][j]) m = std::max(m, std::abs(inter[i][j]));
        }
    }
    return m;
}

double CorrelationReport::max_lag1_abs() const {
    double m = 0.0;
    for (std::size_t k = 0; k < lag1.size(); ++k) {
        if (!lag1_degenerate[k]) m = std::max(m, std::abs(lag1[k]));
    }
    return m;
}

CorrelationReport correlation_report(const std::vector<std::vector<cplx>>& distortion) {
    const std::size_t n = distortion.size();
    if (n < 100) throw InvalidArgument("correlation report needs at least 100 symbols");
    const std::size_t K = distortion[0].size();
    // Column k: real parts of all symbols followed by imaginary parts.
    std::vector<std::vector<double>> col(K, std::vector<double>(2 * n));
    for (std::size_t l = 0; l < n; ++l) {
        if (distortion[l].size() != K) throw InvalidArgument("ragged distortion stream");
        for (std::size_t k = 0; k < K; ++k) {
            col[k][l] = distortion[l][k].real();
            col[k][n + l] = distortion[l][k].imag();
        }
    }
    CorrelationReport r;
    r.inter.assign(K, std::vector<double>(K));
    r.inter_degenerate.assign(K, std::vector<bool>(K));
    for (std::size_t i = 0; i < K; ++i) {
        for (std::size_t j = 0; j < K; ++j) {
            r.inter[i][j] = pearson(col[i], col[j]);
            r.inter_degenerate[i][j] = std::isnan(r.inter[i][j]);
        }
    }
    r.lag1.resize(K);
    r.lag1_degenerate.resize(K);
    std::vector<double> a(2 * (n - 1)), b(2 * (n - 1));
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t l = 0; l + 1 < n; ++l) {
            a[l] = col[k][l];
            b[l] = col[k][l + 1];
            a[n - 1 + l] = col[k][n + l];
            b[n - 1 + l] = col[k][n + l + 1];
        }
        r.lag1[k] = pearson(a, b);
        r.lag1_degenerate[k] = std::isnan(r.lag1[k]);
    }
    return r;
}

namespace {

ChannelEstimate simulate_training(const ParametricChannelModel& model, const WaveformCodebook& cb,
                                  std::size_t symbols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, cb.size() - 1);
    const double A = cb.params().amplitude;
    std::vector<QuaternaryWord> sent(symbols);
    std::vector<PskSequence> tx(symbols);
    for (std::size_t l = 0; l < symbols; ++l) {
        sent[l] = cb.quat()[pick(rng)];
        tx[l] = psk_sequence(sent[l], A);
    }
    const auto rx = apply_parametric(tx, model, A, derive_seed(seed, 1));
    return estimate_channel(rx, sent, cb.params());
}

} // namespace

std::vector<SeRow> estimator_standard_error(const ParametricChannelModel& model,
                                            const WaveformCodebook& cb, const SeConfig& config) {
    model.validate();
    if (static_cast<int>(model.harmonics()) != cb.params().harmonics) {
        throw InvalidArgument("channel model harmonic count does not match codebook");
    }
    if (config.runs < 100) throw InvalidArgument("SE needs at least 100 Monte Carlo runs");
    if (config.reference_symbols < 2) throw InvalidArgument("reference run too short");
    const auto ref = simulate_training(model, cb, config.reference_symbols, derive_seed(config.seed, 0));
    const std::size_t K = model.harmonics();
    const double baud = cb.params().baud_rate();

    std::vector<SeRow> rows;
    for (std::size_t d = 0; d < config.durations_s.size(); ++d) {
        const double t = config.durations_s[d];
        if (!(t > 0.0)) throw InvalidArgument("training durations must be positive");
        const auto L = static_cast<std::size_t>(std::llround(t * baud));
        if (L < 2) throw InvalidArgument("training duration shorter than 2 symbols");
        std::vector<double> sp(K, 0.0), sv(K, 0.0);
        for (int r = 0; r < config.runs; ++r) {
            const auto est = simulate_training(model, cb, L, derive_seed(config.seed, d + 1, r));
            for (std::size_t k = 0; k < K; ++k) {
                const double dp = wrap_angle(est.phase(k) - ref.phase(k));
                const double dv = est.variance[k] - ref.variance[k];
                sp[k] += dp * dp;
                sv[k] += dv * dv;
            }
        }
        SeRow row;
        row.duration_s = t;
        row.symbols = L;
        for (std::size_t k = 0; k < K; ++k) {
            const double msp = sp[k] / config.runs;
            const double msv = sv[k] / config.runs;
            row.se_phase = std::max(row.se_phase, std::sqrt(msp));
            row.se_variance_normalized =
                std::max(row.se_variance_normalized, std::sqrt(msv / ref.variance[k]));
            row.se_variance_raw = std::max(row.se_variance_raw, std::sqrt(msv));
        }
        rows.push_back(row);
    }
    return rows;
}

InverseSqrtFit fit_inverse_sqrt(std::span<const double> t, std::span<const double> y) {
    if (t.size() != y.size() || t.size() < 2) throw InvalidArgument("fit needs >= 2 matched points");
    double suy = 0.0, suu = 0.0, my = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!(t[i] > 0.0)) throw InvalidArgument("fit abscissae must be positive");
        const double u = 1.0 / std::sqrt(t[i]);
        suy += u * y[i];
        suu += u * u;
        my += y[i];
    }
    my /= static_cast<double>(y.size());
    InverseSqrtFit f;
    f.c = suy / suu;
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double e = y[i] - f.c / std::sqrt(t[i]);
        ss_res += e * e;
        ss_tot += (y[i] - my) * (y[i] - my);
    }
    f.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
    return f;
}

ErrorCounts error_counters(std::span<const std::uint32_t> sent,
                           std::span<const std::uint32_t> received, int bits_per_symbol) {
    if (sent.size() != received.size()) throw InvalidArgument("error counters: lengths differ");
    if (bits_per_symbol < 0 || bits_per_symbol > 32) {
        throw InvalidArgument("bits per symbol must be in [0, 32]");
    }
    const std::uint32_t mask =
        bits_per_symbol == 32 ? 0xFFFFFFFFu : ((std::uint32_t{1} << bits_per_symbol) - 1);
    ErrorCounts c;
    c.symbols = sent.size();
    c.bits = sent.size() * static_cast<std::size_t>(bits_per_symbol);
    for (std::size_t i = 0; i < sent.size(); ++i) {
        if (sent[i] != received[i]) ++c.symbol_errors;
        c.bit_errors += std::popcount((sent[i] ^ received[i]) & mask);
    }
    return c;
}

std::array<double, 2> wilson_interval(std::size_t k, std::size_t n, double z) {
    if (n == 0) return {0.0, 1.0};
    const double p = static_cast<double>(k) / n;
    const double z2 = z * z;
    const double den = 1.0 + z2 / n;
    const double centre = (p + z2 / (2.0 * n)) / den;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / den;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

double two_proportion_z(std::size_t k1, std::size_t n1, std::size_t k2, std::size_t n2) {
    if (n1 == 0 || n2 == 0) throw InvalidArgument("two-proportion test needs non-empty samples");
    const double p1 = static_cast<double>(k1) / n1;
    const double p2 = static_cast<double>(k2) / n2;
    const double p = static_cast<double>(k1 + k2) / (n1 + n2);
    const double se = std::sqrt(p * (1.0 - p) * (1.0 / n1 + 1.0 / n2));
    if (se == 0.0) return 0.0;
    return (p2 - p1) / se;
}

} // namespace dov
