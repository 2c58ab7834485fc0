// dovtool: command-line front end for the DoV modem library.
//
// Every command prints one JSON metadata line on stdout (seeds included).
// Failures print "error: <category>: <message>" on stderr and exit with the
// category's code.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>
#include <variant>

#include "dov/audio_io.hpp"
#include "dov/bench.hpp"
#include "dov/channelsim.hpp"
#include "dov/csv.hpp"
#include "dov/errors.hpp"
#include "dov/frame.hpp"
#include "dov/modem.hpp"
#include "dov/quatcode.hpp"
#include "dov/rng.hpp"
#include "dov/stats.hpp"
#include "dov/stream.hpp"

using json = nlohmann::json;
using namespace dov;

namespace {

int exit_code(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::invalid_argument: return 2;
        case ErrorCategory::construction_failure: return 3;
        case ErrorCategory::degenerate_sample: return 4;
        case ErrorCategory::external_channel: return 5;
        case ErrorCategory::unsupported_format: return 6;
        case ErrorCategory::malformed_file: return 7;
        case ErrorCategory::clipping: return 8;
        case ErrorCategory::io: return 9;
    }
    return 70;
}

bool has_suffix(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// .wav means RIFF/WAV, anything else headerless s16le.
std::vector<double> read_audio(const std::string& path) {
    return has_suffix(path, ".wav") ? read_wav(path).samples : read_raw_pcm(path).samples;
}

void write_audio(const std::string& path, std::vector<double> samples) {
    AudioBuffer b{std::move(samples), kAudioRate};
    if (has_suffix(path, ".wav")) {
        write_wav(path, b);
    } else {
        write_raw_pcm(path, b);
    }
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::string& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path);
}

// CSV destination: a path, or stdout for "-" (metadata then goes to stderr).
class CsvSink {
public:
    explicit CsvSink(const std::string& path) : to_stdout_(path == "-") {
        if (!to_stdout_) {
            file_.open(path);
            if (!file_) throw IoError("cannot open " + path + " for writing");
        }
    }
    std::ostream& stream() { return to_stdout_ ? std::cout : file_; }
    bool to_stdout() const { return to_stdout_; }

private:
    bool to_stdout_;
    std::ofstream file_;
};

void emit(const json& meta, bool to_stderr = false) {
    (to_stderr ? std::cerr : std::cout) << meta.dump() << '\n';
}

ChannelFile resolve_channel(const std::string& name, int harmonics, int samples_per_symbol) {
    ChannelFile f;
    if (name == "identity") {
        f.model = ParametricChannelModel::identity(harmonics);
    } else if (name == "amr-like") {
        f.model = ParametricChannelModel::amr_like(harmonics);
    } else if (name == "silk-like") {
        f.model = ParametricChannelModel::silk_like(harmonics);
    } else {
        f = load_channel_file(name, samples_per_symbol);
    }
    if (static_cast<int>(f.model.harmonics()) != harmonics) {
        throw InvalidArgument("channel model has " + std::to_string(f.model.harmonics()) +
                              " harmonics, expected " + std::to_string(harmonics));
    }
    return f;
}

json model_json(const ParametricChannelModel& m) {
    return {{"gains", m.gains}, {"phases_rad", m.phases_rad}, {"noise_vars", m.noise_vars}};
}

json estimate_json(const ChannelEstimate& e) {
    std::vector<double> phase, gain;
    for (std::size_t k = 0; k < e.harmonics(); ++k) {
        phase.push_back(e.phase(k));
        gain.push_back(e.gain(k));
    }
    return {{"phases_rad", phase},
            {"gains", gain},
            {"variances", e.variance},
            {"training_symbols", e.training_length},
            {"variance_floored", e.variance_floored}};
}

// Symbol layout shared by modulate/demodulate/simulate/stats.
struct SymbolOptions {
    int samples_per_symbol = 20;
    int first_harmonic = 1;
    double peak = 0.9;

    void add(CLI::App* app) {
        app->add_option("--samples-per-symbol", samples_per_symbol, "Samples per symbol (N)");
        app->add_option("--first-harmonic", first_harmonic, "Lowest carrier index (k0)");
        app->add_option("--peak", peak, "Peak sample of the loudest waveform (full scale = 1)");
    }

    WaveformCodebook codebook(const std::string& path) const {
        auto quat = load_codebook(path);
        SymbolParams p;
        p.samples_per_symbol = samples_per_symbol;
        p.harmonics = quat.word_length();
        p.first_harmonic = first_harmonic;
        p.validate();
        return WaveformCodebook::normalized(p, std::move(quat), peak);
    }
};

struct TrainingOptions {
    double seconds = kDefaultTrainingSeconds;
    std::uint64_t seed = kDefaultTrainingSeed;
    bool skip = false;

    void add(CLI::App* app, bool receiver) {
        app->add_option("--train", seconds, "Training preamble length in seconds (0 for none)")
            ->check(CLI::NonNegativeNumber);
        app->add_option("--training-seed", seed, "Seed of the training index sequence");
        if (receiver) app->add_flag("--no-training", skip, "Skip the preamble without estimating the channel");
    }
};

// ----------------------------------------------------------------------------

struct CodebookCmd {
    int n = 8;
    int size = 64;
    std::uint64_t seed = 0;
    int retries = 1;
    std::string out;
    std::string waveforms;
    SymbolOptions sym;

    void add(CLI::App& app) {
        auto* c = app.add_subcommand("codebook", "Generate and certify a quaternary codebook");
        c->add_option("-n,--length", n, "Word length (harmonics)")->check(CLI::Range(1, kMaxWordLength));
        c->add_option("-M,--size", size, "Number of codewords (even)");
        c->add_option("--seed", seed, "Search seed");
        c->add_option("--retries", retries, "Try seeds seed..seed+retries-1, keep the best")
            ->check(CLI::PositiveNumber);
        c->add_option("-o,--out", out, "Codebook file")->required();
        c->add_option("--waveforms", waveforms, "Also write one synthesized waveform per line");
        sym.add(c);
    }

    void run() const {
        const auto cb = retries > 1 ? codebook_search_best(n, size, seed, retries) : codebook_search(n, size, seed);
        save_codebook(out, cb);
        json meta{{"command", "codebook"}, {"n", cb.word_length()}, {"M", cb.size()},
                  {"min_lee_distance", cb.min_lee_distance()}, {"seed", cb.seed()},
                  {"requested_seed", seed}, {"retries", retries}, {"out", out}};
        if (!waveforms.empty()) {
            const auto w = sym.codebook(out);
            std::ofstream f(waveforms);
            if (!f) throw IoError("cannot open " + waveforms + " for writing");
            for (std::size_t m = 0; m < w.size(); ++m) {
                const auto& x = w.waveform(m);
                for (std::size_t i = 0; i < x.size(); ++i) f << (i ? " " : "") << format_double(x[i]);
                f << '\n';
            }
            meta["waveforms"] = waveforms;
            meta["amplitude"] = w.params().amplitude;
        }
        emit(meta);
    }
};

struct ModulateCmd {
    std::string codebook, in, out;
    SymbolOptions sym;
    TrainingOptions train;

    void add(CLI::App& app) {
        auto* c = app.add_subcommand("modulate", "Bytes to audio: training preamble then payload");
        c->add_option("-c,--codebook", codebook, "Codebook file")->required();
        c->add_option("-i,--in", in, "Payload file (any bytes)")->required();
        c->add_option("-o,--out", out, "Audio out (.wav, else raw s16le)")->required();
        sym.add(c);
        train.add(c, false);
    }

    void run() const {
        const auto cb = sym.codebook(codebook);
        const auto bytes = read_bytes(in);
        PayloadStreamOptions opt;
        opt.training_symbols = training_symbol_count(train.seconds, cb.params());
        opt.training_seed = train.seed;
        auto samples = modulate_payload(bytes, cb, opt);
        const auto n = samples.size();
        write_audio(out, std::move(samples));
        emit({{"command", "modulate"}, {"M", cb.size()}, {"min_lee_distance", cb.quat().min_lee_distance()},
              {"amplitude", cb.params().amplitude}, {"training_seconds", train.seconds},
              {"training_symbols", opt.training_symbols}, {"training_seed", train.seed},
              {"payload_bytes", bytes.size()},
              {"payload_symbols", pack_payload(bytes, bits_per_index(cb.size())).size()}, {"samples", n},
              {"out", out}});
    }
};

struct DemodulateCmd {
    std::string codebook, in, out, reference;
    SymbolOptions sym;
    TrainingOptions train;

    void add(CLI::App& app) {
        auto* c = app.add_subcommand("demodulate", "Audio to bytes, trained on the preamble");
        c->add_option("-c,--codebook", codebook, "Codebook file")->required();
        c->add_option("-i,--in", in, "Audio in (.wav, else raw s16le)")->required();
        c->add_option("-o,--out", out, "Payload file")->required();
        c->add_option("--reference", reference, "Original payload; reports symbol and bit error rates");
        sym.add(c);
        train.add(c, true);
    }

    void run() const {
        const auto cb = sym.codebook(codebook);
        const auto samples = read_audio(in);
        PayloadStreamOptions opt;
        opt.training_symbols = training_symbol_count(train.seconds, cb.params());
        opt.training_seed = train.seed;
        const bool trained = !train.skip && opt.training_symbols > 0;
        const auto dec = demodulate_payload(samples, cb, opt, trained);
        write_bytes(out, dec.bytes);
        json meta{{"command", "demodulate"}, {"M", cb.size()}, {"training_seconds", train.seconds},
                  {"training_symbols", opt.training_symbols}, {"training_seed", train.seed},
                  {"trained", trained}, {"symbols", dec.indices.size()}, {"bytes", dec.bytes.size()},
                  {"length_valid", dec.length_valid}, {"out", out}};
        if (dec.estimate) meta["estimate"] = estimate_json(*dec.estimate);
        if (!reference.empty()) {
            const int bits = bits_per_index(cb.size());
            const auto sent = pack_payload(read_bytes(reference), bits);
            const std::size_t n = std::min(sent.size(), dec.indices.size());
            auto counts = error_counters(std::span(sent).first(n), std::span(dec.indices).first(n), bits);
            // Symbols missing from the received stream count as errors.
            counts.symbol_errors += sent.size() - n;
            counts.symbols += sent.size() - n;
            counts.bit_errors += (sent.size() - n) * bits;
            counts.bits += (sent.size() - n) * bits;
            meta["reference"] = reference;
            meta["symbol_errors"] = counts.symbol_errors;
            meta["ser"] = counts.ser();
            meta["bit_errors"] = counts.bit_errors;
            meta["ber"] = counts.ber();
            meta["payload_match"] = dec.bytes == read_bytes(reference);
        }
        emit(meta);
    }
};

struct SimulateCmd {
    std::string in, out, model, codec, codebook;
    std::optional<double> amplitude, snr_db, gain;
    std::size_t delay = 0;
    std::vector<std::string> dropouts;
    std::size_t tolerance = 20;
    std::uint64_t seed = 1;
    int harmonics = 8;
    SymbolOptions sym;

    void add(CLI::App& app) {
        auto* c = app.add_subcommand("simulate", "Pass audio through a channel model or an external codec");
        c->add_option("-i,--in", in, "Audio in")->required();
        c->add_option("-o,--out", out, "Audio out")->required();
        auto* m = c->add_option("--model", model, "identity | amr-like | silk-like | channel JSON file");
        auto* x = c->add_option("--codec", codec, "Shell command filtering s16le 8 kHz stdin to stdout");
        m->excludes(x);
        c->add_option("--codebook", codebook, "Codebook of the stream; sets A for the noise units");
        c->add_option("--amplitude", amplitude, "Symbol amplitude A when no codebook is given");
        c->add_option("--harmonics", harmonics, "Harmonics of the model when no codebook is given");
        c->add_option("--snr-db", snr_db, "Additive white noise at this SNR");
        c->add_option("--gain", gain, "Broadband gain");
        c->add_option("--delay", delay, "Delay in samples (zeros prepended)");
        c->add_option("--dropout", dropouts, "Zeroed span START:LENGTH in symbols (repeatable)");
        c->add_option("--tolerance", tolerance, "Allowed codec length error in samples");
        c->add_option("--seed", seed, "Noise seed");
        sym.add(c);
    }

    void run() const {
        auto samples = read_audio(in);
        json meta{{"command", "simulate"}, {"seed", seed}, {"in_samples", samples.size()}};
        TimeImpairments imp;
        if (!codec.empty()) {
            samples = external_codec_channel(samples, codec, tolerance);
            meta["codec"] = codec;
        } else {
            SymbolParams p;
            p.samples_per_symbol = sym.samples_per_symbol;
            p.first_harmonic = sym.first_harmonic;
            if (!codebook.empty()) {
                p = sym.codebook(codebook).params();
            } else {
                p.harmonics = harmonics;
                p.amplitude = amplitude.value_or(1.0);
                p.validate();
            }
            const auto ch = resolve_channel(model.empty() ? "identity" : model, p.harmonics, p.samples_per_symbol);
            imp = ch.impairments;
            samples = apply_parametric_audio(samples, p, ch.model, derive_seed(seed, 1));
            meta["model"] = model.empty() ? "identity" : model;
            meta["parametric"] = model_json(ch.model);
            meta["amplitude"] = p.amplitude;
        }
        imp.samples_per_symbol = sym.samples_per_symbol;
        if (snr_db) imp.snr_db = snr_db;
        if (gain) imp.gain = gain;
        if (delay) imp.delay_samples = delay;
        for (const auto& d : dropouts) {
            const auto colon = d.find(':');
            if (colon == std::string::npos) throw InvalidArgument("dropout must be START:LENGTH, got " + d);
            try {
                imp.dropouts.push_back({std::stoull(d.substr(0, colon)), std::stoull(d.substr(colon + 1))});
            } catch (const std::logic_error&) {
                throw InvalidArgument("dropout must be START:LENGTH, got " + d);
            }
        }
        if (!imp.empty()) samples = apply_time_impairments(samples, imp, derive_seed(seed, 2));
        meta["out_samples"] = samples.size();
        meta["out"] = out;
        write_audio(out, std::move(samples));
        emit(meta);
    }
};

struct StatsCmd {
    CLI::App* mardia = nullptr;
    CLI::App* snr = nullptr;
    CLI::App* correlation = nullptr;
    CLI::App* se = nullptr;

    std::string out = "-";
    std::string reference, received;  // snr
    std::string codebook, tx, rx;     // mardia, correlation
    std::size_t skip = 0;
    std::string model = "amr-like";  // se
    double t_min = 0.5, t_max = 2.5, t_step = 0.05;
    int runs = 200;
    std::size_t reference_symbols = 10000;
    std::uint64_t seed = 1;
    SymbolOptions sym;

    void add(CLI::App& app) {
        auto* c = app.add_subcommand("stats", "Channel statistics reports as CSV");
        c->require_subcommand(1);
        auto csv = [&](CLI::App* s) { s->add_option("-o,--out", out, "CSV file, - for stdout"); };

        snr = c->add_subcommand("snr", "Waveform SNR of received audio against a reference");
        snr->add_option("--reference", reference, "Reference audio")->required();
        snr->add_option("--received", received, "Received audio")->required();
        csv(snr);

        for (auto** s : {&mardia, &correlation}) {
            const bool is_mardia = s == &mardia;
            *s = c->add_subcommand(is_mardia ? "mardia" : "correlation",
                                   is_mardia ? "Mardia skewness and kurtosis of per-harmonic distortion"
                                             : "Inter-harmonic and lag-1 distortion correlations");
            (*s)->add_option("-c,--codebook", codebook, "Codebook of the stream")->required();
            (*s)->add_option("--tx", tx, "Transmitted audio (aligned)")->required();
            (*s)->add_option("--rx", rx, "Received audio (aligned)")->required();
            (*s)->add_option("--skip-symbols", skip, "Leading symbols to ignore");
            sym.add(*s);
            csv(*s);
        }

        se = c->add_subcommand("se", "Standard error of the trained estimates versus training length");
        se->add_option("-c,--codebook", codebook, "Codebook used for training symbols")->required();
        se->add_option("--model", model, "identity | amr-like | silk-like | channel JSON file");
        se->add_option("--t-min", t_min, "Shortest training duration in seconds");
        se->add_option("--t-max", t_max, "Longest training duration in seconds");
        se->add_option("--t-step", t_step, "Duration step in seconds")->check(CLI::PositiveNumber);
        se->add_option("--runs", runs, "Monte Carlo runs per duration (>= 100)");
        se->add_option("--reference-symbols", reference_symbols, "Length of the reference estimate");
        se->add_option("--seed", seed, "Seed");
        sym.add(se);
        csv(se);
    }

    // Distortion of aligned received symbols relative to the decoded clean ones.
    std::vector<std::vector<cplx>> distortion() const {
        const auto cb = sym.codebook(codebook);
        const auto p = cb.params();
        const auto txs = read_audio(tx), rxs = read_audio(rx);
        const std::size_t N = p.samples_per_symbol;
        const std::size_t L = std::min(txs.size(), rxs.size()) / N;
        if (L <= skip) throw InvalidArgument("no symbols left after --skip-symbols");
        const auto tpsk = demultiplex_stream(std::span(txs).subspan(skip * N, (L - skip) * N), p);
        const auto rpsk = demultiplex_stream(std::span(rxs).subspan(skip * N, (L - skip) * N), p);
        std::vector<QuaternaryWord> words;
        words.reserve(tpsk.size());
        for (const auto& s : tpsk) words.push_back(cb.quat()[demodulate_ml(s, cb)]);
        return distortion_stream(rpsk, words, p.amplitude);
    }

    void run() const {
        CsvSink sink(out);
        json meta{{"command", "stats"}};
        if (snr->parsed()) {
            const auto a = read_audio(reference), b = read_audio(received);
            const std::size_t n = std::min(a.size(), b.size());
            const double v = snr_db(std::span(a).first(n), std::span(b).first(n));
            CsvWriter w(sink.stream(), {"samples", "snr_db"});
            w.row({static_cast<long long>(n), v});
            meta["report"] = "snr";
            meta["snr_db"] = v;
        } else if (mardia->parsed()) {
            const auto d = distortion();
            CsvWriter w(sink.stream(), {"harmonic", "points", "skewness", "kurtosis"});
            for (std::size_t k = 0; k < d.front().size(); ++k) {
                const auto s = harmonic_sample(d, k);
                w.row({static_cast<long long>(k), static_cast<long long>(s.size()), mardia_skewness(s),
                       mardia_kurtosis(s)});
            }
            meta["report"] = "mardia";
            meta["symbols"] = d.size();
        } else if (correlation->parsed()) {
            const auto d = distortion();
            const auto r = correlation_report(d);
            CsvWriter w(sink.stream(), {"kind", "i", "j", "value", "degenerate"});
            const std::size_t K = r.inter.size();
            for (std::size_t i = 0; i < K; ++i) {
                for (std::size_t j = 0; j < K; ++j) {
                    w.row({std::string("inter"), static_cast<long long>(i), static_cast<long long>(j), r.inter[i][j],
                           static_cast<long long>(r.inter_degenerate[i][j])});
                }
            }
            for (std::size_t i = 0; i < K; ++i) {
                w.row({std::string("lag1"), static_cast<long long>(i), static_cast<long long>(i), r.lag1[i],
                       static_cast<long long>(r.lag1_degenerate[i])});
            }
            meta["report"] = "correlation";
            meta["symbols"] = d.size();
            meta["max_offdiag_abs"] = r.max_offdiag_abs();
            meta["max_lag1_abs"] = r.max_lag1_abs();
        } else {
            const auto cb = sym.codebook(codebook);
            const auto ch = resolve_channel(model, cb.params().harmonics, cb.params().samples_per_symbol);
            SeConfig cfg;
            for (int i = 0;; ++i) {
                const double t = t_min + i * t_step;
                if (t > t_max + 1e-9) break;
                cfg.durations_s.push_back(t);
            }
            cfg.runs = runs;
            cfg.reference_symbols = reference_symbols;
            cfg.seed = seed;
            const auto rows = estimator_standard_error(ch.model, cb, cfg);
            CsvWriter w(sink.stream(),
                        {"duration_s", "symbols", "se_phase", "se_variance_normalized", "se_variance_raw"});
            w.meta("seed", std::to_string(seed));
            w.meta("runs", std::to_string(runs));
            std::vector<double> t, y;
            for (const auto& r : rows) {
                w.row({r.duration_s, static_cast<long long>(r.symbols), r.se_phase, r.se_variance_normalized,
                       r.se_variance_raw});
                t.push_back(r.duration_s);
                y.push_back(r.se_phase);
            }
            meta["report"] = "se";
            meta["seed"] = seed;
            meta["runs"] = runs;
            meta["model"] = model;
            if (t.size() >= 2) {
                const auto fit = fit_inverse_sqrt(t, y);
                meta["fit_c"] = fit.c;
                meta["fit_r2"] = fit.r2;
            }
        }
        meta["out"] = out;
        emit(meta, sink.to_stdout());
    }
};

struct FrameCmd {
    CLI::App* encode = nullptr;
    CLI::App* decode = nullptr;

    std::string mode = "low";
    std::string key_hex, key_file, nonce_hex;
    std::uint64_t codebook_seed = kFrameCodebookSeed;
    std::string in, out, report;
    std::uint16_t counter = 0;
    int silence_period = 0;
    TrainingOptions train;

    void add(CLI::App& app) {
        auto* c = app.add_subcommand("frame", "Secure-voice frames: speech bits <-> audio");
        c->require_subcommand(1);
        encode = c->add_subcommand("encode", "Encrypt, protect and modulate raw speech bits");
        decode = c->add_subcommand("decode", "Synchronize, demodulate, correct and decrypt");
        for (auto* s : {encode, decode}) {
            s->add_option("--mode", mode, "low (64 words) or high (4096 words)")
                ->check(CLI::IsMember({"low", "high"}));
            auto* k = s->add_option("--key", key_hex, "AES-256 key, 64 hex digits");
            auto* kf = s->add_option("--key-file", key_file, "File holding the key as hex");
            k->excludes(kf);
            s->add_option("--nonce", nonce_hex, "Session nonce, 26 hex digits")->required();
            s->add_option("--codebook-seed", codebook_seed, "Frame codebook seed (both ends must agree)");
            train.add(s, s == decode);
        }
        encode->add_option("-i,--in", in, "Speech bits, packed MSB first, whole frames")->required();
        encode->add_option("-o,--out", out, "Audio out")->required();
        encode->add_option("--counter", counter, "Counter of the first frame");
        encode->add_option("--silence-period", silence_period, "Blank every P-th frame (0: never)");
        decode->add_option("-i,--in", in, "Audio in")->required();
        decode->add_option("-o,--out", out, "Speech bits out; lost frames are zero-filled")->required();
        decode->add_option("--report", report, "Per-frame CSV report");
        decode->add_option("--silence-period", silence_period, "Silence period used by the sender");
    }

    FrameCodec codec() const {
        std::string key = key_hex;
        if (!key_file.empty()) {
            const auto raw = read_bytes(key_file);
            key.assign(raw.begin(), raw.end());
            key.erase(std::remove_if(key.begin(), key.end(), [](unsigned char ch) { return std::isspace(ch); }),
                      key.end());
        }
        if (key.empty()) throw InvalidArgument("a key is required (--key or --key-file)");
        const auto m = parse_frame_mode(mode);
        const auto cfg = FrameConfig::make(m);
        return FrameCodec(cfg, CipherSession::from_hex(key, nonce_hex),
                          WaveformCodebook::normalized(cfg.symbol, frame_codebook(m, codebook_seed)));
    }

    void run() const {
        const auto fc = codec();
        const auto& cfg = fc.config();
        FrameStreamOptions opt;
        opt.training_symbols = training_symbol_count(train.seconds, cfg.symbol);
        opt.training_seed = train.seed;
        opt.silence_period = silence_period;
        const std::size_t frame_bytes = cfg.speech_bits / 8;
        json meta{{"mode", mode}, {"codebook_seed", codebook_seed}, {"training_seconds", train.seconds},
                  {"training_symbols", opt.training_symbols}, {"training_seed", train.seed},
                  {"silence_period", silence_period}, {"frame_seconds", cfg.frame_seconds()}};
        if (encode->parsed()) {
            const auto bytes = read_bytes(in);
            if (bytes.size() % frame_bytes != 0) {
                throw InvalidArgument("speech file is not a whole number of " + std::to_string(frame_bytes) +
                                      "-byte frames");
            }
            std::vector<std::vector<std::uint8_t>> frames;
            for (std::size_t i = 0; i < bytes.size(); i += frame_bytes) {
                frames.push_back(bytes_to_bits(std::span(bytes).subspan(i, frame_bytes)));
            }
            auto samples = transmit_frames(frames, counter, fc, opt);
            meta["command"] = "frame encode";
            meta["frames"] = frames.size();
            meta["first_counter"] = counter;
            meta["samples"] = samples.size();
            write_audio(out, std::move(samples));
        } else {
            const auto samples = read_audio(in);
            const bool trained = !train.skip && opt.training_symbols > 0;
            const auto dec = receive_frames(samples, fc, opt, trained);
            std::vector<std::uint8_t> bits;
            std::size_t decoded = 0, lost = 0, desync = 0, silent = 0;
            std::optional<CsvSink> sink;
            std::optional<CsvWriter> w;
            if (!report.empty()) {
                sink.emplace(report);
                w.emplace(sink->stream(),
                          std::vector<std::string>{"slot", "class", "status", "counter", "erasures", "attempts"});
            }
            for (const auto& f : dec.frames) {
                std::string status = "silent";
                long long ctr = -1, er = 0, att = 0;
                std::vector<std::uint8_t> out_bits(cfg.speech_bits, 0);
                if (f.result) {
                    if (const auto* d = std::get_if<DecodedFrame>(&*f.result)) {
                        status = "decoded";
                        ctr = d->counter;
                        er = d->erasures_used;
                        att = d->attempts;
                        out_bits = d->speech_bits;
                        ++decoded;
                    } else if (const auto* l = std::get_if<FrameLoss>(&*f.result)) {
                        status = "lost";
                        att = l->attempts;
                        ++lost;
                    } else {
                        status = "desync";
                        ++desync;
                    }
                } else {
                    ++silent;
                }
                bits.insert(bits.end(), out_bits.begin(), out_bits.end());
                if (w) {
                    w->row({static_cast<long long>(f.slot),
                            std::string(f.cls == FrameClass::silent ? "silent" : "speech"), status, ctr, er, att});
                }
            }
            write_bytes(out, bits_to_bytes(bits));
            meta["command"] = "frame decode";
            meta["trained"] = trained;
            meta["synchronized"] = dec.sync.has_value();
            if (dec.sync) {
                meta["sync_offset"] = dec.sync->offset;
                meta["sync_confidence"] = dec.sync->confidence;
            }
            meta["frames"] = dec.frames.size();
            meta["decoded"] = decoded;
            meta["lost"] = lost;
            meta["desync"] = desync;
            meta["silent"] = silent;
        }
        meta["out"] = out;
        emit(meta);
    }
};

struct BenchSerCmd {
    std::vector<int> sizes{16, 64, 256, 1024};
    int n = 8;
    std::string model = "amr-like";
    std::size_t symbols = 100000;
    std::size_t training_symbols = 800;
    std::uint64_t seed = 1;
    std::uint64_t codebook_seed = 0;
    std::string out = "-";

    void add(CLI::App& app) {
        auto* c = app.add_subcommand("bench-ser", "Symbol error rate versus codebook size");
        c->add_option("--sizes", sizes, "Codebook sizes")->delimiter(',');
        c->add_option("-n,--length", n, "Word length");
        c->add_option("--model", model, "identity | amr-like | silk-like | channel JSON file");
        c->add_option("--symbols", symbols, "Symbols per codebook size");
        c->add_option("--training-symbols", training_symbols, "Training symbols (0: uncorrected)");
        c->add_option("--seed", seed, "Trial seed");
        c->add_option("--codebook-seed", codebook_seed, "Codebook search seed");
        c->add_option("-o,--out", out, "CSV file, - for stdout");
    }

    void run() const {
        SerBenchConfig cfg;
        cfg.sizes = sizes;
        cfg.word_length = n;
        cfg.model = resolve_channel(model, n, 20).model;
        cfg.symbols = symbols;
        cfg.training_symbols = training_symbols;
        cfg.seed = seed;
        cfg.codebook_seed = codebook_seed;
        const auto rows = bench_ser(cfg);
        CsvSink sink(out);
        CsvWriter w(sink.stream(), {"M", "min_lee", "symbols", "errors", "ser", "ci_low", "ci_high"});
        w.meta("seed", std::to_string(seed));
        w.meta("codebook_seed", std::to_string(codebook_seed));
        w.meta("model", model);
        for (const auto& r : rows) {
            w.row({static_cast<long long>(r.size), static_cast<long long>(r.min_lee),
                   static_cast<long long>(r.symbols), static_cast<long long>(r.errors), r.ser, r.ci_low,
                   r.ci_high});
        }
        json meta{{"command", "bench-ser"}, {"seed", seed}, {"codebook_seed", codebook_seed}, {"model", model},
                  {"symbols", symbols}, {"training_symbols", training_symbols}, {"out", out}};
        emit(meta, sink.to_stdout());
    }
};

// Config file values override flags. Top-level keys apply to the selected
// command chain, nested objects to the command of that name.
void apply_config(CLI::App& app, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    json cfg;
    try {
        cfg = json::parse(in);
    } catch (const json::parse_error& e) {
        throw MalformedFile(path + ": " + e.what());
    }
    if (!cfg.is_object()) throw MalformedFile(path + ": expected a JSON object");

    std::vector<CLI::App*> chain;
    for (CLI::App* a = &app;;) {
        chain.push_back(a);
        const auto subs = a->get_subcommands();
        if (subs.empty()) break;
        a = subs.front();
    }

    auto to_text = [&](const json& v) -> std::string {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        if (v.is_number()) return v.dump();
        throw MalformedFile(path + ": unsupported value " + v.dump());
    };

    auto apply = [&](const json& obj, std::size_t depth) {
        for (const auto& [key, value] : obj.items()) {
            if (key == "config") continue;
            if (value.is_object()) continue;
            CLI::Option* opt = nullptr;
            for (std::size_t i = chain.size(); i-- > depth;) {
                try {
                    opt = chain[i]->get_option("--" + key);
                    break;
                } catch (const CLI::OptionNotFound&) {
                }
            }
            if (!opt) throw InvalidArgument(path + ": unknown setting '" + key + "'");
            opt->clear();
            if (value.is_array()) {
                for (const auto& v : value) opt->add_result(to_text(v));
            } else {
                opt->add_result(to_text(value));
            }
            opt->run_callback();
        }
    };

    apply(cfg, 0);
    const json* level = &cfg;
    for (std::size_t i = 1; i < chain.size(); ++i) {
        const auto it = level->find(chain[i]->get_name());
        if (it == level->end() || !it->is_object()) break;
        apply(*it, i);
        level = &*it;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dovtool: data-over-voice modem, channel simulator and secure-voice frames"};
    app.option_defaults()->take_last();
    app.require_subcommand(1);
    app.set_version_flag("--version", "dovtool 0.1.0");
    std::string config;
    app.add_option("--config", config, "JSON settings overriding flags");

    CodebookCmd codebook;
    ModulateCmd modulate;
    DemodulateCmd demodulate;
    SimulateCmd simulate;
    StatsCmd stats;
    FrameCmd frame;
    BenchSerCmd bench;
    codebook.add(app);
    modulate.add(app);
    demodulate.add(app);
    simulate.add(app);
    stats.add(app);
    frame.add(app);
    bench.add(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << category_name(ErrorCategory::invalid_argument) << ": " << e.what() << '\n';
        return exit_code(ErrorCategory::invalid_argument);
    }

    try {
        if (!config.empty()) apply_config(app, config);
        const std::string name = app.get_subcommands().front()->get_name();
        if (name == "codebook") codebook.run();
        else if (name == "modulate") modulate.run();
        else if (name == "demodulate") demodulate.run();
        else if (name == "simulate") simulate.run();
        else if (name == "stats") stats.run();
        else if (name == "frame") frame.run();
        else bench.run();
    } catch (const Error& e) {
        std::cerr << "error: " << category_name(e.category()) << ": " << e.what() << '\n';
        return exit_code(e.category());
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << category_name(ErrorCategory::invalid_argument) << ": " << e.what() << '\n';
        return exit_code(ErrorCategory::invalid_argument);
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << '\n';
        return 70;
    }
    return 0;
}
