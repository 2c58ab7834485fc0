#pragma once

// Symbol-error-rate sweeps over codebook sizes on a parametric channel, shared
// by the CLI and the acceptance harness. Runs in the PSK domain: the
// demultiplexer is exact on aligned symbols, so this equals the audio path up
// to rounding.

#include <cstdint>
#include <vector>

#include "dov/channelsim.hpp"

namespace dov {

struct SerBenchConfig {
    std::vector<int> sizes{16, 64, 256, 1024};
    int word_length = 8;
    ParametricChannelModel model = ParametricChannelModel::identity(8);
    std::size_t symbols = 100000;
    std::size_t training_symbols = 800;  // 0: identity estimate
    std::uint64_t seed = 1;
    std::uint64_t codebook_seed = 0;
};

struct SerBenchRow {
    int size = 0;
    int min_lee = 0;
    std::size_t symbols = 0;
    std::size_t errors = 0;
    double ser = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

std::vector<SerBenchRow> bench_ser(const SerBenchConfig& config);

// One trial block: random indices through the channel, demodulated with the
// corrected rule (trained estimate, or identity when training_symbols == 0).
// Returns the number of symbol errors.
std::size_t count_symbol_errors(const WaveformCodebook& cb, const ParametricChannelModel& model,
                                std::size_t symbols, std::size_t training_symbols,
                                std::uint64_t seed);

} // namespace dov
