#pragma once

#include <stdexcept>
#include <string>

namespace dov {

// Machine-readable failure categories. The CLI prints the category name on
// stderr and maps it to a distinct exit code.
enum class ErrorCategory {
    invalid_argument,
    construction_failure,
    degenerate_sample,
    external_channel,
    unsupported_format,
    malformed_file,
    clipping,
    io,
};

const char* category_name(ErrorCategory c) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

struct InvalidArgument : Error {
    explicit InvalidArgument(const std::string& what)
        : Error(ErrorCategory::invalid_argument, what) {}
};

// Greedy construction ran out of admissible candidates.
struct ConstructionFailure : Error {
    ConstructionFailure(const std::string& what, std::size_t partial)
        : Error(ErrorCategory::construction_failure, what), partial_size(partial) {}
    std::size_t partial_size;
};

struct DegenerateSample : Error {
    explicit DegenerateSample(const std::string& what)
        : Error(ErrorCategory::degenerate_sample, what) {}
};

struct ExternalChannelError : Error {
    explicit ExternalChannelError(const std::string& what)
        : Error(ErrorCategory::external_channel, what) {}
};

struct UnsupportedFormat : Error {
    explicit UnsupportedFormat(const std::string& what)
        : Error(ErrorCategory::unsupported_format, what) {}
};

struct MalformedFile : Error {
    explicit MalformedFile(const std::string& what)
        : Error(ErrorCategory::malformed_file, what) {}
};

struct ClippingError : Error {
    explicit ClippingError(const std::string& what)
        : Error(ErrorCategory::clipping, what) {}
};

struct IoError : Error {
    explicit IoError(const std::string& what)
        : Error(ErrorCategory::io, what) {}
};

} // namespace dov
