#include "dov/csv.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "dov/errors.hpp"

namespace dov {

const char* category_name(ErrorCategory c) noexcept {
    switch (c) {
        case ErrorCategory::invalid_argument: return "invalid-argument";
        case ErrorCategory::construction_failure: return "construction-failure";
        case ErrorCategory::degenerate_sample: return "degenerate-sample";
        case ErrorCategory::external_channel: return "external-channel-error";
        case ErrorCategory::unsupported_format: return "unsupported-format";
        case ErrorCategory::malformed_file: return "malformed-file";
        case ErrorCategory::clipping: return "clipping";
        case ErrorCategory::io: return "io-error";
    }
    return "unknown";
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

namespace {

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + '"';
}

} // namespace

CsvWriter::CsvWriter(std::ostream& out, std::vector<std::string> header)
    : out_(out), columns_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << quote(header[i]);
    out_ << '\n';
}

void CsvWriter::row(const std::vector<CsvCell>& cells) {
    if (cells.size() != columns_) throw InvalidArgument("CSV row has wrong column count");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ',';
        std::visit(
            [&](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, std::string>) out_ << quote(v);
                else if constexpr (std::is_same_v<T, double>) out_ << format_double(v);
                else out_ << v;
            },
            cells[i]);
    }
    out_ << '\n';
}

void CsvWriter::meta(const std::string& key, const std::string& value) {
    out_ << "# " << key << '=' << value << '\n';
}

} // namespace dov
