#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rsm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A configuration or argument value is outside its valid domain.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// File could not be opened, read or written.
class IoError : public Error {
public:
    IoError(std::string path, const std::string& what)
        : Error(path + ": " + what), path_(std::move(path)) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

/// Malformed file contents. `offset` is a byte offset (binary) or a 1-based line number (csv).
class ParseError : public Error {
public:
    enum class Kind { Header, DimensionMismatch, NonFinite, Syntax };

    ParseError(Kind kind, std::uint64_t offset, const std::string& what)
        : Error(what), kind_(kind), offset_(offset) {}
    Kind kind() const noexcept { return kind_; }
    std::uint64_t offset() const noexcept { return offset_; }

private:
    Kind kind_;
    std::uint64_t offset_;
};

}  // namespace rsm
