#include "dov/channelsim.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "dov/errors.hpp"

namespace dov {

void ParametricChannelModel::validate() const {
    const std::size_t K = gains.size();
    if (K == 0) throw InvalidArgument("channel model has no harmonics");
    if (phases_rad.size() != K || noise_vars.size() != K) {
        throw InvalidArgument("channel model arrays differ in length");
    }
    for (std::size_t k = 0; k < K; ++k) {
        if (!(gains[k] >= 0.0) || !std::isfinite(gains[k])) {
            throw InvalidArgument("channel gain must be finite and >= 0");
        }
        if (!std::isfinite(phases_rad[k])) throw InvalidArgument("channel phase must be finite");
        if (!(noise_vars[k] >= 0.0) || !std::isfinite(noise_vars[k])) {
            throw InvalidArgument("channel noise variance must be finite and >= 0");
        }
    }
}

ParametricChannelModel ParametricChannelModel::identity(int harmonics) {
    if (harmonics < 1) throw InvalidArgument("harmonic count must be >= 1");
    return {std::vector<double>(harmonics, 1.0), std::vector<double>(harmonics, 0.0),
            std::vector<double>(harmonics, 0.0)};
}

namespace {

ParametricChannelModel ramp_model(int K, double phase0, double phase_step, double var_lo,
                                  double var_hi, double gain_hi_drop) {
    if (K < 1) throw InvalidArgument("harmonic count must be >= 1");
    ParametricChannelModel m;
    for (int k = 0; k < K; ++k) {
        const double t = K == 1 ? 0.0 : static_cast<double>(k) / (K - 1);
        m.gains.push_back(1.0 - gain_hi_drop * t);
        m.phases_rad.push_back(phase0 + phase_step * k);
        m.noise_vars.push_back(var_lo + (var_hi - var_lo) * t * t);
    }
    return m;
}

} // namespace

ParametricChannelModel ParametricChannelModel::amr_like(int harmonics) {
    return ramp_model(harmonics, 0.2, 0.15, 0.004, 0.04, 0.2);
}

ParametricChannelModel ParametricChannelModel::silk_like(int harmonics) {
    return ramp_model(harmonics, -0.1, 0.25, 0.01, 0.12, 0.35);
}

void TimeImpairments::validate() const {
    if (snr_db && !std::isfinite(*snr_db)) throw InvalidArgument("SNR must be finite");
    if (gain && (!(*gain >= 0.0) || !std::isfinite(*gain))) {
        throw InvalidArgument("gain must be finite and >= 0");
    }
    if (samples_per_symbol < 1) throw InvalidArgument("samples per symbol must be >= 1");
    std::vector<Dropout> d = dropouts;
    std::sort(d.begin(), d.end(),
              [](const Dropout& a, const Dropout& b) { return a.start_symbol < b.start_symbol; });
    for (std::size_t i = 1; i < d.size(); ++i) {
        if (d[i - 1].start_symbol + d[i - 1].length > d[i].start_symbol) {
            throw InvalidArgument("dropout spans overlap");
        }
    }
}

std::vector<PskSequence> apply_parametric(const std::vector<PskSequence>& stream,
                                          const ParametricChannelModel& model, double amplitude,
                                          std::uint64_t seed) {
    model.validate();
    if (!(amplitude > 0.0)) throw InvalidArgument("amplitude must be positive");
    const std::size_t K = model.harmonics();
    std::vector<cplx> rot(K);
    std::vector<double> sd(K);
    for (std::size_t k = 0; k < K; ++k) {
        rot[k] = std::polar(model.gains[k], model.phases_rad[k]);
        sd[k] = amplitude * std::sqrt(model.noise_vars[k] / 2.0);
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<PskSequence> out;
    out.reserve(stream.size());
    for (const auto& in : stream) {
        if (in.size() != K) {
            throw InvalidArgument("PSK sequence has " + std::to_string(in.size()) +
                                  " harmonics, model has " + std::to_string(K));
        }
        PskSequence o(K);
        for (std::size_t k = 0; k < K; ++k) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            o[k] = rot[k] * in[k];
            if (sd[k] > 0.0) o[k] += cplx(sd[k] * re, sd[k] * im);
        }
        out.push_back(std::move(o));
    }
    return out;
}

std::vector<double> apply_time_impairments(const std::vector<double>& samples,
                                           const TimeImpairments& imp, std::uint64_t seed) {
    imp.validate();
    std::vector<double> out(imp.delay_samples, 0.0);
    out.insert(out.end(), samples.begin(), samples.end());
    const double g = imp.gain.value_or(1.0);
    if (imp.gain) {
        for (auto& s : out) s *= g;
    }
    const std::size_t N = imp.samples_per_symbol;
    for (const auto& d : imp.dropouts) {
        const std::size_t lo = std::min(out.size(), d.start_symbol * N);
        const std::size_t hi = std::min(out.size(), (d.start_symbol + d.length) * N);
        std::fill(out.begin() + lo, out.begin() + hi, 0.0);
    }
    if (imp.snr_db) {
        double power = 0.0;
        for (double s : samples) power += s * s * g * g;
        if (samples.empty() || power == 0.0) {
            throw InvalidArgument("SNR target is undefined for a silent signal");
        }
        power /= static_cast<double>(samples.size());
        const double noise_sd = std::sqrt(power * std::pow(10.0, -*imp.snr_db / 10.0));
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> gauss(0.0, noise_sd);
        for (auto& s : out) s += gauss(rng);
    }
    return out;
}

ParametricChannelModel fit_model(std::span<const PskSequence> received,
                                 std::span<const QuaternaryWord> sent,
                                 const SymbolParams& params) {
    const auto est = estimate_channel(received, sent, params);
    const double A = params.amplitude;
    ParametricChannelModel m;
    for (std::size_t k = 0; k < est.harmonics(); ++k) {
        m.gains.push_back(est.gain(k) / A);
        m.phases_rad.push_back(est.phase(k));
        m.noise_vars.push_back(est.variance[k] / (A * A));
    }
    return m;
}

std::vector<double> apply_parametric_audio(const std::vector<double>& samples,
                                           const SymbolParams& params,
                                           const ParametricChannelModel& model,
                                           std::uint64_t seed) {
    params.validate();
    if (static_cast<int>(model.harmonics()) != params.harmonics) {
        throw InvalidArgument("channel model harmonic count does not match K");
    }
    const auto psk = demultiplex_stream(samples, params);
    const auto distorted = apply_parametric(psk, model, params.amplitude, seed);
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& c : distorted) {
        const auto sym = synthesize_psk(params, c);
        out.insert(out.end(), sym.begin(), sym.end());
    }
    out.insert(out.end(), samples.begin() + static_cast<std::ptrdiff_t>(out.size()), samples.end());
    return out;
}

ChannelFile parse_channel_json(const std::string& text, int samples_per_symbol) {
    ChannelFile f;
    f.impairments.samples_per_symbol = samples_per_symbol;
    try {
        const auto j = nlohmann::json::parse(text);
        f.model.gains = j.at("gains").get<std::vector<double>>();
        f.model.phases_rad = j.at("phases_rad").get<std::vector<double>>();
        f.model.noise_vars = j.at("noise_vars").get<std::vector<double>>();
        if (j.contains("impairments")) {
            const auto& imp = j.at("impairments");
            if (imp.contains("snr_db") && !imp["snr_db"].is_null()) {
                f.impairments.snr_db = imp["snr_db"].get<double>();
            }
            if (imp.contains("gain") && !imp["gain"].is_null()) {
                f.impairments.gain = imp["gain"].get<double>();
            }
            if (imp.contains("dropouts")) {
                for (const auto& d : imp["dropouts"]) {
                    const auto pair = d.get<std::vector<std::size_t>>();
                    if (pair.size() != 2) throw MalformedFile("dropout entries must be [start, length]");
                    f.impairments.dropouts.push_back({pair[0], pair[1]});
                }
            }
            if (imp.contains("delay_samples")) {
                f.impairments.delay_samples = imp["delay_samples"].get<std::size_t>();
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw MalformedFile(std::string("channel file: ") + e.what());
    }
    try {
        f.model.validate();
        f.impairments.validate();
    } catch (const InvalidArgument& e) {
        throw MalformedFile(std::string("channel file: ") + e.what());
    }
    return f;
}

ChannelFile load_channel_file(const std::string& path, int samples_per_symbol) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open channel file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_channel_json(ss.str(), samples_per_symbol);
}

std::string to_channel_json(const ChannelFile& file) {
    nlohmann::json j;
    j["gains"] = file.model.gains;
    j["phases_rad"] = file.model.phases_rad;
    j["noise_vars"] = file.model.noise_vars;
    if (!file.impairments.empty()) {
        nlohmann::json imp = nlohmann::json::object();
        if (file.impairments.snr_db) imp["snr_db"] = *file.impairments.snr_db;
        if (file.impairments.gain) imp["gain"] = *file.impairments.gain;
        imp["dropouts"] = nlohmann::json::array();
        for (const auto& d : file.impairments.dropouts) {
            imp["dropouts"].push_back({d.start_symbol, d.length});
        }
        imp["delay_samples"] = file.impairments.delay_samples;
        j["impairments"] = imp;
    }
    return j.dump(2);
}

} // namespace dov
