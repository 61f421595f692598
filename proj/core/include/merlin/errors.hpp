#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace merlin {

/// Invalid configuration values (bad corpus parameters, bad reward setup, ...).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// API misuse: violated precondition (stepping a terminal state, empty input, ...).
class UsageError : public std::logic_error {
public:
    explicit UsageError(const std::string& msg) : std::logic_error(msg) {}
};

/// Malformed input file. Carries the byte offset where parsing failed.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, std::size_t byte_offset)
        : std::runtime_error(msg + " (at byte " + std::to_string(byte_offset) + ")"),
          byte_offset_(byte_offset) {}
    std::size_t byte_offset() const { return byte_offset_; }

private:
    std::size_t byte_offset_;
};

/// File format version does not match what this build understands.
class VersionError : public std::runtime_error {
public:
    VersionError(int found, int expected)
        : std::runtime_error("unsupported format version " + std::to_string(found) +
                             ", expected " + std::to_string(expected)),
          found_(found), expected_(expected) {}
    int found() const { return found_; }
    int expected() const { return expected_; }

private:
    int found_;
    int expected_;
};

/// Non-finite value encountered where the computation cannot continue.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace merlin
