#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <string>
#include <variant>

#include "dov/audio_io.hpp"
#include "dov/bench.hpp"
#include "dov/channelsim.hpp"
#include "dov/errors.hpp"
#include "dov/frame.hpp"
#include "dov/modem.hpp"
#include "dov/quatcode.hpp"
#include "dov/stats.hpp"
#include "dov/stream.hpp"

namespace py = pybind11;
using namespace dov;

namespace {

using Samples = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const Samples& a) {
    if (a.ndim() != 1) throw InvalidArgument("expected a 1-D sample array");
    return {a.data(), a.data() + a.size()};
}

py::array_t<double> to_array(const std::vector<double>& v) {
    return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

std::vector<std::uint8_t> to_bytes(const py::bytes& b) {
    const std::string s = b;
    return {s.begin(), s.end()};
}

py::bytes from_bytes(const std::vector<std::uint8_t>& v) {
    return {reinterpret_cast<const char*>(v.data()), v.size()};
}

BivariateSample to_sample(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2 || a.shape(1) != 2) throw InvalidArgument("expected an (n, 2) array");
    BivariateSample s(static_cast<std::size_t>(a.shape(0)));
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = {a.at(i, 0), a.at(i, 1)};
    return s;
}

std::vector<QuaternaryWord> to_words(const std::vector<std::string>& words) {
    std::vector<QuaternaryWord> out;
    out.reserve(words.size());
    for (const auto& w : words) out.push_back(QuaternaryWord::from_string(w));
    return out;
}

py::dict frame_result_dict(const FrameResult& r) {
    py::dict d;
    if (const auto* f = std::get_if<DecodedFrame>(&r)) {
        d["status"] = "decoded";
        d["speech_bits"] = f->speech_bits;
        d["counter"] = f->counter;
        d["erasures_used"] = f->erasures_used;
        d["attempts"] = f->attempts;
    } else if (const auto* l = std::get_if<FrameLoss>(&r)) {
        d["status"] = "lost";
        d["attempts"] = l->attempts;
        d["rs_successes"] = l->rs_successes;
    } else {
        d["status"] = "desync";
        d["header_mismatches"] = std::get<Desync>(r).header_mismatches;
    }
    return d;
}

FrameCodec make_codec(const std::string& mode, const std::string& key_hex, const std::string& nonce_hex,
                      std::uint64_t codebook_seed) {
    const auto m = parse_frame_mode(mode);
    const auto cfg = FrameConfig::make(m);
    return FrameCodec(cfg, CipherSession::from_hex(key_hex, nonce_hex),
                      WaveformCodebook::normalized(cfg.symbol, frame_codebook(m, codebook_seed)));
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Data-over-voice modem core";

    // Exceptions: DovError plus one subclass per category.
    static py::exception<Error> base(m, "DovError", PyExc_RuntimeError);
    static std::array<PyObject*, 8> classes{};
    const std::array<std::pair<ErrorCategory, const char*>, 8> names{{
        {ErrorCategory::invalid_argument, "InvalidArgument"},
        {ErrorCategory::construction_failure, "ConstructionFailure"},
        {ErrorCategory::degenerate_sample, "DegenerateSample"},
        {ErrorCategory::external_channel, "ExternalChannelError"},
        {ErrorCategory::unsupported_format, "UnsupportedFormat"},
        {ErrorCategory::malformed_file, "MalformedFile"},
        {ErrorCategory::clipping, "ClippingError"},
        {ErrorCategory::io, "IoError"},
    }};
    for (const auto& [cat, name] : names) {
        const std::string full = std::string("dovmodem._core.") + name;
        PyObject* cls = PyErr_NewException(full.c_str(), base.ptr(), nullptr);
        classes[static_cast<std::size_t>(cat)] = cls;
        m.attr(name) = py::handle(cls);
    }
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            PyErr_SetString(classes[static_cast<std::size_t>(e.category())], e.what());
        }
    });

    // Codes.
    m.def("lee_distance", [](const std::string& a, const std::string& b) {
        return lee_distance(QuaternaryWord::from_string(a), QuaternaryWord::from_string(b));
    });

    py::class_<QuaternaryCodebook>(m, "QuaternaryCodebook")
        .def(py::init([](const std::vector<std::string>& words, std::uint64_t seed) {
                 return QuaternaryCodebook(to_words(words), seed);
             }),
             py::arg("words"), py::arg("seed") = 0)
        .def_property_readonly("size", &QuaternaryCodebook::size)
        .def_property_readonly("word_length", &QuaternaryCodebook::word_length)
        .def_property_readonly("min_lee_distance", &QuaternaryCodebook::min_lee_distance)
        .def_property_readonly("seed", &QuaternaryCodebook::seed)
        .def_property_readonly("reflection_symmetric", &QuaternaryCodebook::has_reflection_symmetry)
        .def("words",
             [](const QuaternaryCodebook& cb) {
                 std::vector<std::string> w;
                 for (const auto& x : cb.words()) w.push_back(x.to_string());
                 return w;
             })
        .def("save", [](const QuaternaryCodebook& cb, const std::string& path) { save_codebook(path, cb); })
        .def_static("load", &load_codebook)
        .def("__len__", &QuaternaryCodebook::size);

    m.def("codebook_search", [](int n, int M, std::uint64_t seed) { return codebook_search(n, M, seed); },
          py::arg("n"), py::arg("M"), py::arg("seed") = 0);
    m.def("codebook_search_best", [](int n, int M, std::uint64_t seed, int retries) {
        return codebook_search_best(n, M, seed, retries);
    }, py::arg("n"), py::arg("M"), py::arg("seed") = 0, py::arg("retries") = 10);

    // Modem.
    py::class_<SymbolParams>(m, "SymbolParams")
        .def(py::init<>())
        .def(py::init([](double rate, int N, int K, int k0, double A) {
                 SymbolParams p{rate, N, K, k0, A};
                 p.validate();
                 return p;
             }),
             py::arg("sample_rate") = 8000.0, py::arg("samples_per_symbol") = 20, py::arg("harmonics") = 8,
             py::arg("first_harmonic") = 1, py::arg("amplitude") = 1.0)
        .def_readwrite("sample_rate", &SymbolParams::sample_rate)
        .def_readwrite("samples_per_symbol", &SymbolParams::samples_per_symbol)
        .def_readwrite("harmonics", &SymbolParams::harmonics)
        .def_readwrite("first_harmonic", &SymbolParams::first_harmonic)
        .def_readwrite("amplitude", &SymbolParams::amplitude)
        .def_property_readonly("baud_rate", &SymbolParams::baud_rate);

    py::class_<ChannelEstimate>(m, "ChannelEstimate")
        .def_static("identity", &ChannelEstimate::identity)
        .def_readonly("mean", &ChannelEstimate::mean)
        .def_readonly("variance", &ChannelEstimate::variance)
        .def_readonly("training_length", &ChannelEstimate::training_length)
        .def_readonly("variance_floored", &ChannelEstimate::variance_floored)
        .def("phase", &ChannelEstimate::phase)
        .def("gain", &ChannelEstimate::gain);

    py::class_<WaveformCodebook>(m, "WaveformCodebook")
        .def(py::init<const SymbolParams&, QuaternaryCodebook>())
        .def_static("normalized", &WaveformCodebook::normalized, py::arg("params"), py::arg("codebook"),
                    py::arg("peak") = 0.9)
        .def_property_readonly("params", &WaveformCodebook::params)
        .def_property_readonly("codebook", &WaveformCodebook::quat)
        .def_property_readonly("peak", &WaveformCodebook::peak)
        .def_property_readonly("symbol_energy", &WaveformCodebook::symbol_energy)
        .def("waveform", [](const WaveformCodebook& cb, std::size_t i) {
            if (i >= cb.size()) throw InvalidArgument("waveform index out of range");
            return to_array(cb.waveform(i));
        })
        .def("__len__", &WaveformCodebook::size);

    py::class_<Decision>(m, "Decision")
        .def_readonly("index", &Decision::index)
        .def_readonly("reliability", &Decision::reliability)
        .def_readonly("energy", &Decision::energy);

    m.def("psk_sequence", [](const std::string& w, double A) { return psk_sequence(QuaternaryWord::from_string(w), A); });
    m.def("synthesize_symbol", [](const SymbolParams& p, const std::string& w) {
        return to_array(synthesize_symbol(p, QuaternaryWord::from_string(w)));
    });
    m.def("demultiplex", [](const Samples& x, const SymbolParams& p) { return demultiplex(to_vector(x), p); });
    m.def("demodulate_ml", [](const PskSequence& y, const WaveformCodebook& cb) { return demodulate_ml(y, cb); });
    m.def("demodulate_corrected", [](const PskSequence& y, const WaveformCodebook& cb, const ChannelEstimate& e) {
        return demodulate_corrected(y, cb, e);
    });
    m.def("estimate_channel", [](const std::vector<PskSequence>& rx, const std::vector<std::string>& sent,
                                 const SymbolParams& p) { return estimate_channel(rx, to_words(sent), p); });
    m.def("modulate_stream", [](const std::vector<std::uint32_t>& idx, const WaveformCodebook& cb) {
        return to_array(modulate_stream(idx, cb));
    });
    m.def("demodulate_stream", [](const Samples& x, const WaveformCodebook& cb, const ChannelEstimate* est) {
        std::vector<std::uint32_t> out;
        for (const auto& d : demodulate_stream(to_vector(x), cb, est).symbols) out.push_back(d.index);
        return out;
    }, py::arg("samples"), py::arg("codebook"), py::arg("estimate") = nullptr);

    // Channel.
    py::class_<ParametricChannelModel>(m, "ParametricChannelModel")
        .def(py::init([](std::vector<double> g, std::vector<double> p, std::vector<double> v) {
                 ParametricChannelModel c{std::move(g), std::move(p), std::move(v)};
                 c.validate();
                 return c;
             }),
             py::arg("gains"), py::arg("phases_rad"), py::arg("noise_vars"))
        .def_readwrite("gains", &ParametricChannelModel::gains)
        .def_readwrite("phases_rad", &ParametricChannelModel::phases_rad)
        .def_readwrite("noise_vars", &ParametricChannelModel::noise_vars)
        .def_static("identity", &ParametricChannelModel::identity, py::arg("harmonics") = 8)
        .def_static("amr_like", &ParametricChannelModel::amr_like, py::arg("harmonics") = 8)
        .def_static("silk_like", &ParametricChannelModel::silk_like, py::arg("harmonics") = 8);

    m.def("apply_parametric", &apply_parametric, py::arg("stream"), py::arg("model"), py::arg("amplitude"),
          py::arg("seed"));
    m.def("apply_parametric_audio",
          [](const Samples& x, const SymbolParams& p, const ParametricChannelModel& model, std::uint64_t seed) {
              return to_array(apply_parametric_audio(to_vector(x), p, model, seed));
          },
          py::arg("samples"), py::arg("params"), py::arg("model"), py::arg("seed"));
    m.def("apply_time_impairments",
          [](const Samples& x, std::optional<double> snr_db, std::optional<double> gain, std::size_t delay,
             const std::vector<std::pair<std::size_t, std::size_t>>& dropouts, int samples_per_symbol,
             std::uint64_t seed) {
              TimeImpairments t;
              t.snr_db = snr_db;
              t.gain = gain;
              t.delay_samples = delay;
              for (auto [s, l] : dropouts) t.dropouts.push_back({s, l});
              t.samples_per_symbol = samples_per_symbol;
              return to_array(apply_time_impairments(to_vector(x), t, seed));
          },
          py::arg("samples"), py::arg("snr_db") = std::nullopt, py::arg("gain") = std::nullopt,
          py::arg("delay") = 0, py::arg("dropouts") = std::vector<std::pair<std::size_t, std::size_t>>{},
          py::arg("samples_per_symbol") = 20, py::arg("seed") = 1);
    m.def("external_codec_channel",
          [](const Samples& x, const std::string& cmd, std::size_t tol) {
              return to_array(external_codec_channel(to_vector(x), cmd, tol));
          },
          py::arg("samples"), py::arg("command"), py::arg("tolerance_samples") = 20);

    // Statistics.
    m.def("mardia_skewness", [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
        return mardia_skewness(to_sample(a));
    });
    m.def("mardia_kurtosis", [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
        return mardia_kurtosis(to_sample(a));
    });
    m.def("snr_db", [](const Samples& ref, const Samples& rx) { return snr_db(to_vector(ref), to_vector(rx)); });
    m.def("wilson_interval", &wilson_interval, py::arg("k"), py::arg("n"), py::arg("z") = 1.96);

    py::class_<SerBenchRow>(m, "SerBenchRow")
        .def_readonly("size", &SerBenchRow::size)
        .def_readonly("min_lee", &SerBenchRow::min_lee)
        .def_readonly("symbols", &SerBenchRow::symbols)
        .def_readonly("errors", &SerBenchRow::errors)
        .def_readonly("ser", &SerBenchRow::ser);
    m.def("bench_ser",
          [](const std::vector<int>& sizes, const ParametricChannelModel& model, std::size_t symbols,
             std::size_t training, std::uint64_t seed) {
              SerBenchConfig c;
              c.sizes = sizes;
              c.model = model;
              c.word_length = static_cast<int>(model.harmonics());
              c.symbols = symbols;
              c.training_symbols = training;
              c.seed = seed;
              return bench_ser(c);
          },
          py::arg("sizes"), py::arg("model"), py::arg("symbols") = 100000, py::arg("training_symbols") = 800,
          py::arg("seed") = 1);

    // Streams.
    m.def("training_symbol_count", &training_symbol_count);
    m.def("modulate_payload",
          [](const py::bytes& data, const WaveformCodebook& cb, std::size_t training, std::uint64_t seed) {
              return to_array(modulate_payload(to_bytes(data), cb, {training, seed}));
          },
          py::arg("data"), py::arg("codebook"), py::arg("training_symbols") = 0,
          py::arg("training_seed") = kDefaultTrainingSeed);
    m.def("demodulate_payload",
          [](const Samples& x, const WaveformCodebook& cb, std::size_t training, std::uint64_t seed,
             bool use_training) {
              const auto d = demodulate_payload(to_vector(x), cb, {training, seed}, use_training && training > 0);
              return py::make_tuple(from_bytes(d.bytes), d.length_valid, d.estimate);
          },
          py::arg("samples"), py::arg("codebook"), py::arg("training_symbols") = 0,
          py::arg("training_seed") = kDefaultTrainingSeed, py::arg("use_training") = true);

    // Frames.
    m.def("transmit_frames",
          [](const std::vector<std::vector<std::uint8_t>>& frames, std::uint16_t counter, const std::string& mode,
             const std::string& key, const std::string& nonce, std::size_t training, int silence_period) {
              const auto fc = make_codec(mode, key, nonce, kFrameCodebookSeed);
              FrameStreamOptions o;
              o.training_symbols = training;
              o.silence_period = silence_period;
              return to_array(transmit_frames(frames, counter, fc, o));
          },
          py::arg("frames"), py::arg("counter"), py::arg("mode"), py::arg("key_hex"), py::arg("nonce_hex"),
          py::arg("training_symbols") = 800, py::arg("silence_period") = 0);
    m.def("receive_frames",
          [](const Samples& x, const std::string& mode, const std::string& key, const std::string& nonce,
             std::size_t training, int silence_period, bool use_training) {
              const auto fc = make_codec(mode, key, nonce, kFrameCodebookSeed);
              FrameStreamOptions o;
              o.training_symbols = training;
              o.silence_period = silence_period;
              const auto d = receive_frames(to_vector(x), fc, o, use_training && training > 0);
              py::list frames;
              for (const auto& f : d.frames) {
                  py::dict e = f.result ? frame_result_dict(*f.result) : py::dict();
                  if (!f.result) e["status"] = "silent";
                  e["slot"] = f.slot;
                  frames.append(e);
              }
              py::object offset = py::none();
              if (d.sync) offset = py::int_(d.sync->offset);
              return py::make_tuple(offset, frames);
          },
          py::arg("samples"), py::arg("mode"), py::arg("key_hex"), py::arg("nonce_hex"),
          py::arg("training_symbols") = 800, py::arg("silence_period") = 0, py::arg("use_training") = true);
    m.def("frame_speech_bits", [](const std::string& mode) { return FrameConfig::make(parse_frame_mode(mode)).speech_bits; });
    m.def("counter_span_seconds", [](const std::string& mode) {
        return FrameConfig::make(parse_frame_mode(mode)).counter_span_seconds();
    });

    // Audio files.
    m.def("read_wav", [](const std::string& path) { return to_array(read_wav(path).samples); });
    m.def("write_wav", [](const std::string& path, const Samples& x) { write_wav(path, {to_vector(x), kAudioRate}); });
}
