#pragma once

// Minimal CSV writer. Floating-point cells use 9 significant digits so that
// reruns with the same seed produce byte-identical reports.

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace dov {

using CsvCell = std::variant<std::string, long long, double>;

std::string format_double(double v);

class CsvWriter {
public:
    CsvWriter(std::ostream& out, std::vector<std::string> header);
    void row(const std::vector<CsvCell>& cells);
    // "# key=value" line; readers treat lines starting with '#' as comments.
    void meta(const std::string& key, const std::string& value);

private:
    std::ostream& out_;
    std::size_t columns_;
};

} // namespace dov
