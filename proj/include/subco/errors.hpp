#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace subco {

/// Malformed input file. Carries the 1-based line number when known (0 otherwise).
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Invalid configuration value or unknown configuration key.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Matrix or vector shapes that do not fit together.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace subco
