#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ais {

// Root of every error the engine raises. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SchemaError : public Error {
public:
    using Error::Error;
};

class EncodeError : public Error {
public:
    EncodeError(std::string feature, std::string value, const std::string& why)
        : Error(why + " (feature '" + feature + "', value '" + value + "')"),
          feature_(std::move(feature)),
          value_(std::move(value)) {}

    const std::string& feature() const noexcept { return feature_; }
    const std::string& value() const noexcept { return value_; }

private:
    std::string feature_;
    std::string value_;
};

class AffinityError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class CoverageError : public Error {
public:
    CoverageError(const std::string& what, std::size_t attempts)
        : Error(what), attempts_(attempts) {}

    std::size_t attempts() const noexcept { return attempts_; }

private:
    std::size_t attempts_;
};

class SchemaMismatchError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class LifecycleError : public Error {
public:
    using Error::Error;
};

class InputError : public Error {
public:
    using Error::Error;
};

class PolicyError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Malformed text input. `line` is the 1-based line number in the source file.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace ais
