#include "dov/bench.hpp"

#include <random>

#include "dov/errors.hpp"
#include "dov/rng.hpp"
#include "dov/stats.hpp"
#include "dov/stream.hpp"

namespace dov {

std::size_t count_symbol_errors(const WaveformCodebook& cb, const ParametricChannelModel& model,
                                std::size_t symbols, std::size_t training_symbols,
                                std::uint64_t seed) {
    const auto& p = cb.params();
    const double A = p.amplitude;
    if (static_cast<int>(model.harmonics()) != p.harmonics) {
        throw InvalidArgument("channel model harmonic count does not match K");
    }
    ChannelEstimate est = ChannelEstimate::identity(p.harmonics, A);
    if (training_symbols > 0) {
        if (training_symbols < 2) throw InvalidArgument("training requires at least 2 symbols");
        const auto tr = training_indices(training_symbols, cb.size(), derive_seed(seed, 1));
        std::vector<PskSequence> tx;
        std::vector<QuaternaryWord> sent;
        for (auto i : tr) {
            sent.push_back(cb.quat()[i]);
            tx.push_back(psk_sequence(sent.back(), A));
        }
        est = estimate_channel(apply_parametric(tx, model, A, derive_seed(seed, 2)), sent, p);
    }
    std::mt19937_64 rng(derive_seed(seed, 3));
    std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(cb.size() - 1));
    std::size_t errors = 0;
    const std::size_t block = 4096;
    for (std::size_t done = 0, b = 0; done < symbols; done += block, ++b) {
        const std::size_t n = std::min(block, symbols - done);
        std::vector<std::uint32_t> idx(n);
        std::vector<PskSequence> tx(n);
        for (std::size_t i = 0; i < n; ++i) {
            idx[i] = pick(rng);
            tx[i] = psk_sequence(cb.quat()[idx[i]], A);
        }
        const auto rx = apply_parametric(tx, model, A, derive_seed(seed, 4, b));
        for (std::size_t i = 0; i < n; ++i) errors += demodulate_corrected(rx[i], cb, est).index != idx[i];
    }
    return errors;
}

std::vector<SerBenchRow> bench_ser(const SerBenchConfig& config) {
    std::vector<SerBenchRow> rows;
    SymbolParams p;
    p.harmonics = config.word_length;
    for (int M : config.sizes) {
        const WaveformCodebook cb(p, codebook_search(config.word_length, M, config.codebook_seed));
        SerBenchRow r;
        r.size = M;
        r.min_lee = cb.quat().min_lee_distance();
        r.symbols = config.symbols;
        r.errors = count_symbol_errors(cb, config.model, config.symbols, config.training_symbols,
                                       derive_seed(config.seed, static_cast<std::uint64_t>(M)));
        r.ser = config.symbols ? double(r.errors) / double(config.symbols) : 0.0;
        const auto ci = wilson_interval(r.errors, config.symbols);
        r.ci_low = ci[0];
        r.ci_high = ci[1];
        rows.push_back(r);
    }
    return rows;
}

} // namespace dov
