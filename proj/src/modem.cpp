#include "dov/modem.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <numbers>
#include <string>

#include "dov/errors.hpp"

namespace dov {

namespace {

// cos/sin of 2*pi*i/N for i in [0, N); carrier phases are looked up by
// ((k+k0)*n) mod N so every symbol uses bit-identical trig values.
struct TrigTable {
    std::vector<double> c, s;
    explicit TrigTable(int N) : c(N), s(N) {
        for (int i = 0; i < N; ++i) {
            const double a = 2.0 * std::numbers::pi * i / N;
            c[i] = std::cos(a);
            s[i] = std::sin(a);
        }
    }
};

void check_word(const SymbolParams& p, std::size_t len) {
    if (static_cast<int>(len) != p.harmonics) {
        throw InvalidArgument("word length " + std::to_string(len) + " does not match K=" +
                              std::to_string(p.harmonics));
    }
}

// Per-harmonic correlation contributions Re(y * conj(e^{j*pi*d/2})) for d = 0..3.
struct DigitScores {
    std::vector<std::array<double, 4>> t;
};

DigitScores digit_scores(std::span<const cplx> y) {
    DigitScores d;
    d.t.resize(y.size());
    for (std::size_t k = 0; k < y.size(); ++k) {
        d.t[k] = {y[k].real(), y[k].imag(), -y[k].real(), -y[k].imag()};
    }
    return d;
}

double word_score(const DigitScores& d, const QuaternaryWord& w) {
    double acc = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) acc += d.t[k][w[k]];
    return acc;
}

double margin(double best, double second) {
    if (!(best > 0.0)) return 0.0;
    return std::clamp((best - second) / best, 0.0, 1.0);
}

} // namespace

void SymbolParams::validate() const {
    if (!(sample_rate > 0.0)) throw InvalidArgument("sample rate must be positive");
    if (samples_per_symbol < 2) throw InvalidArgument("samples per symbol must be >= 2");
    if (harmonics < 1) throw InvalidArgument("harmonic count must be >= 1");
    if (first_harmonic < 1) throw InvalidArgument("first harmonic index must be >= 1");
    if (2 * (first_harmonic + harmonics - 1) >= samples_per_symbol) {
        throw InvalidArgument("highest harmonic at or above Nyquist: k0+K-1=" +
                              std::to_string(first_harmonic + harmonics - 1) +
                              ", N=" + std::to_string(samples_per_symbol));
    }
    if (!(amplitude > 0.0) || !std::isfinite(amplitude)) {
        throw InvalidArgument("amplitude must be positive and finite");
    }
}

cplx psk_point(std::uint8_t digit, double amplitude) noexcept {
    switch (digit & 3) {
        case 0: return {amplitude, 0.0};
        case 1: return {0.0, amplitude};
        case 2: return {-amplitude, 0.0};
        default: return {0.0, -amplitude};
    }
}

PskSequence psk_sequence(const QuaternaryWord& word, double amplitude) {
    PskSequence out(word.size());
    for (std::size_t k = 0; k < word.size(); ++k) out[k] = psk_point(word[k], amplitude);
    return out;
}

std::vector<double> synthesize_psk(const SymbolParams& params, std::span<const cplx> psk) {
    params.validate();
    check_word(params, psk.size());
    const int N = params.samples_per_symbol;
    const TrigTable trig(N);
    std::vector<double> out(N, 0.0);
    for (int n = 0; n < N; ++n) {
        double acc = 0.0;
        for (int k = 0; k < params.harmonics; ++k) {
            const int i = ((k + params.first_harmonic) * n) % N;
            acc += psk[k].real() * trig.c[i] - psk[k].imag() * trig.s[i];
        }
        out[n] = acc;
    }
    return out;
}

std::vector<double> synthesize_symbol(const SymbolParams& params, const QuaternaryWord& word) {
    params.validate();
    check_word(params, word.size());
    const auto psk = psk_sequence(word, params.amplitude);
    return synthesize_psk(params, psk);
}

PskSequence demultiplex(std::span<const double> samples, const SymbolParams& params) {
    params.validate();
    const int N = params.samples_per_symbol;
    if (static_cast<int>(samples.size()) != N) {
        throw InvalidArgument("demultiplex expects " + std::to_string(N) + " samples, got " +
                              std::to_string(samples.size()));
    }
    const TrigTable trig(N);
    PskSequence out(params.harmonics);
    for (int k = 0; k < params.harmonics; ++k) {
        double re = 0.0, im = 0.0;
        for (int n = 0; n < N; ++n) {
            const int i = ((k + params.first_harmonic) * n) % N;
            re += samples[n] * trig.c[i];
            im -= samples[n] * trig.s[i];
        }
        out[k] = cplx(2.0 * re / N, 2.0 * im / N);
    }
    return out;
}

std::vector<PskSequence> demultiplex_stream(std::span<const double> samples,
                                            const SymbolParams& params) {
    params.validate();
    const std::size_t N = params.samples_per_symbol;
    std::vector<PskSequence> out;
    out.reserve(samples.size() / N);
    for (std::size_t off = 0; off + N <= samples.size(); off += N) {
        out.push_back(demultiplex(samples.subspan(off, N), params));
    }
    return out;
}

ChannelEstimate ChannelEstimate::identity(int harmonics, double amplitude) {
    ChannelEstimate e;
    e.mean.assign(harmonics, cplx(amplitude, 0.0));
    e.variance.assign(harmonics, 1.0);
    return e;
}

ChannelEstimate estimate_channel(std::span<const PskSequence> received,
                                 std::span<const QuaternaryWord> sent,
                                 const SymbolParams& params) {
    params.validate();
    const std::size_t L = received.size();
    if (L < 2) throw InvalidArgument("channel estimation needs at least 2 training symbols");
    if (sent.size() != L) throw InvalidArgument("training received/sent lengths differ");
    const std::size_t K = params.harmonics;
    for (std::size_t l = 0; l < L; ++l) {
        if (received[l].size() != K || sent[l].size() != K) {
            throw InvalidArgument("training symbol " + std::to_string(l) + " has wrong length");
        }
    }

    ChannelEstimate est;
    est.training_length = L;
    est.mean.resize(K);
    est.variance.resize(K);
    const double floor = kVarianceFloor * params.amplitude * params.amplitude;
    std::vector<cplx> z(L);
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t l = 0; l < L; ++l) {
            z[l] = received[l][k] * std::conj(psk_point(sent[l][k], 1.0));
        }
        // Accumulate deviations from the first sample: a constant sequence then
        // gives its own value and zero variance with no rounding residue.
        const cplx ref = z[0];
        cplx dsum = 0.0;
        for (std::size_t l = 0; l < L; ++l) dsum += z[l] - ref;
        const cplx dmean = dsum / static_cast<double>(L);
        const cplx mu = ref + dmean;
        double ss = 0.0;
        for (std::size_t l = 0; l < L; ++l) ss += std::norm((z[l] - ref) - dmean);
        double var = ss / static_cast<double>(L - 1);
        if (var < floor) {
            var = floor;
            est.variance_floored = true;
        }
        est.mean[k] = mu;
        est.variance[k] = var;
    }
    return est;
}

WaveformCodebook::WaveformCodebook(const SymbolParams& params, QuaternaryCodebook quat)
    : params_(params), quat_(std::move(quat)) {
    params_.validate();
    if (quat_.size() == 0) throw InvalidArgument("waveform codebook needs at least one word");
    if (quat_.word_length() != params_.harmonics) {
        throw InvalidArgument("codebook word length " + std::to_string(quat_.word_length()) +
                              " does not match K=" + std::to_string(params_.harmonics));
    }
    waveforms_.reserve(quat_.size());
    for (const auto& w : quat_.words()) {
        waveforms_.push_back(synthesize_symbol(params_, w));
        for (double s : waveforms_.back()) peak_ = std::max(peak_, std::abs(s));
    }
}

WaveformCodebook WaveformCodebook::normalized(SymbolParams params, QuaternaryCodebook quat,
                                              double peak) {
    if (!(peak > 0.0) || peak > 1.0) throw InvalidArgument("target peak must be in (0, 1]");
    params.amplitude = 1.0;
    const WaveformCodebook unit(params, quat);
    params.amplitude = peak / unit.peak();
    return WaveformCodebook(params, std::move(quat));
}

double WaveformCodebook::symbol_energy() const noexcept {
    const double A = params_.amplitude;
    return params_.samples_per_symbol * params_.harmonics * A * A / 2.0;
}

std::uint32_t demodulate_ml(std::span<const cplx> psk, const WaveformCodebook& cb) {
    check_word(cb.params(), psk.size());
    const double A = cb.params().amplitude;
    std::uint32_t best = 0;
    double best_d = 0.0;
    for (std::size_t m = 0; m < cb.size(); ++m) {
        const auto& w = cb.quat()[m];
        double d = 0.0;
        for (std::size_t k = 0; k < psk.size(); ++k) d += std::norm(psk[k] - psk_point(w[k], A));
        if (m == 0 || d < best_d) {
            best_d = d;
            best = static_cast<std::uint32_t>(m);
        }
    }
    return best;
}

Decision demodulate_corrected(std::span<const cplx> psk, const WaveformCodebook& cb,
                              const ChannelEstimate& est, CorrelationSearch search) {
    check_word(cb.params(), psk.size());
    if (est.harmonics() != psk.size() || est.variance.size() != psk.size()) {
        throw InvalidArgument("channel estimate has " + std::to_string(est.harmonics()) +
                              " harmonics, symbol has " + std::to_string(psk.size()));
    }
    const double A = cb.params().amplitude;
    std::vector<cplx> y(psk.size());
    double energy = 0.0;
    for (std::size_t k = 0; k < psk.size(); ++k) {
        energy += std::norm(psk[k]);
        y[k] = psk[k] * (A / est.variance[k]) * std::polar(1.0, -est.phase(k));
    }
    const DigitScores ds = digit_scores(y);
    const auto& quat = cb.quat();

    Decision dec;
    dec.energy = energy;
    if (search == CorrelationSearch::automatic && quat.has_reflection_symmetry()) {
        // Z4 negation keeps even digits and swaps 1 <-> 3, so with a the sum of
        // the even-digit terms and b the odd-digit terms, score(2m) = a + b and
        // score(2m+1) = a - b. The sign of b picks the member of the pair.
        const double inf = std::numeric_limits<double>::infinity();
        double top = -inf, runner = -inf;
        for (std::size_t m = 0; m < quat.size(); m += 2) {
            double a = 0.0, b = 0.0;
            const auto& w = quat[m];
            for (std::size_t k = 0; k < w.size(); ++k) {
                const double t = ds.t[k][w[k]];
                (w[k] & 1 ? b : a) += t;
            }
            const double hi = a + std::abs(b), lo = a - std::abs(b);
            if (hi > top) {
                runner = std::max(top, lo);
                top = hi;
                dec.index = static_cast<std::uint32_t>(b >= 0.0 ? m : m + 1);
            } else {
                runner = std::max(runner, hi);
            }
        }
        dec.reliability = margin(top, runner);
        return dec;
    }

    const double inf = std::numeric_limits<double>::infinity();
    double best = -inf, second = -inf;
    for (std::size_t m = 0; m < quat.size(); ++m) {
        const double s = word_score(ds, quat[m]);
        if (s > best) {
            second = best;
            best = s;
            dec.index = static_cast<std::uint32_t>(m);
        } else if (s > second) {
            second = s;
        }
    }
    if (quat.size() == 1) second = best;
    dec.reliability = margin(best, second);
    return dec;
}

std::vector<double> modulate_stream(std::span<const std::uint32_t> indices,
                                    const WaveformCodebook& cb) {
    const std::size_t N = cb.params().samples_per_symbol;
    std::vector<double> out;
    out.reserve(indices.size() * N);
    for (auto idx : indices) {
        if (idx >= cb.size()) {
            throw InvalidArgument("symbol index " + std::to_string(idx) + " outside codebook of " +
                                  std::to_string(cb.size()));
        }
        const auto& w = cb.waveform(idx);
        out.insert(out.end(), w.begin(), w.end());
    }
    return out;
}

StreamDecode demodulate_stream(std::span<const double> samples, const WaveformCodebook& cb,
                               const ChannelEstimate* est) {
    const auto& p = cb.params();
    const ChannelEstimate ident = ChannelEstimate::identity(p.harmonics, p.amplitude);
    const ChannelEstimate& e = est ? *est : ident;
    const std::size_t N = p.samples_per_symbol;
    StreamDecode out;
    out.trailing_samples = samples.size() % N;
    const auto psk = demultiplex_stream(samples, p);
    out.symbols.reserve(psk.size());
    for (const auto& c : psk) out.symbols.push_back(demodulate_corrected(c, cb, e));
    return out;
}

} // namespace dov
