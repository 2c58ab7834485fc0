#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dov/audio_io.hpp"
#include "dov/channelsim.hpp"
#include "dov/errors.hpp"

namespace dov {

namespace {

std::string shell_quote(const std::string& s) {
    std::string q = "'";
    for (char c : s) {
        if (c == '\'') q += "'\\''";
        else q += c;
    }
    return q + "'";
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        std::string tmpl = (std::filesystem::temp_directory_path() / "dovcodec.XXXXXX").string();
        if (!mkdtemp(tmpl.data())) throw ExternalChannelError("cannot create temporary directory");
        path = tmpl;
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
};

std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string s = ss.str();
    if (s.size() > 2000) s = s.substr(0, 2000) + "...";
    return s;
}

} // namespace

std::vector<double> external_codec_channel(const std::vector<double>& samples,
                                           const std::string& command,
                                           std::size_t tolerance_samples) {
    if (command.empty()) throw InvalidArgument("external codec command is empty");
    TempDir dir;
    const auto in_path = dir.path / "in.pcm";
    const auto out_path = dir.path / "out.pcm";
    const auto err_path = dir.path / "err.txt";
    {
        AudioBuffer b;
        b.samples = samples;
        write_raw_pcm(in_path.string(), b);
    }
    const std::string line = "/bin/sh -c " + shell_quote(command) + " < " +
                             shell_quote(in_path.string()) + " > " + shell_quote(out_path.string()) +
                             " 2> " + shell_quote(err_path.string());
    const int status = std::system(line.c_str());
    if (status == -1) throw ExternalChannelError("could not spawn shell for: " + command);
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        std::string msg = "external codec '" + command + "' failed with status " + std::to_string(code);
        if (code == 127) msg += " (program not found)";
        const auto err = read_text(err_path);
        if (!err.empty()) msg += "; stderr: " + err;
        throw ExternalChannelError(msg);
    }
    std::vector<double> out;
    try {
        out = read_raw_pcm(out_path.string()).samples;
    } catch (const Error& e) {
        throw ExternalChannelError("external codec output is not s16le PCM: " + std::string(e.what()));
    }
    const std::size_t n = samples.size();
    const std::size_t diff = out.size() > n ? out.size() - n : n - out.size();
    if (diff > tolerance_samples) {
        throw ExternalChannelError("external codec returned " + std::to_string(out.size()) +
                                   " samples for " + std::to_string(n) + " (tolerance " +
                                   std::to_string(tolerance_samples) + ")");
    }
    out.resize(n, 0.0);
    return out;
}

} // namespace dov
