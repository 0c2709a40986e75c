#pragma once

#include <stdexcept>
#include <string>

namespace ecdnn {

/// Base of every error raised by the library. `kind()` is a stable
/// machine-readable tag used by the CLI's error JSON.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "error"; }
};

/// Input whose shape does not match the model or operation.
class InvalidInput : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "invalid_input"; }
};

/// Two parameter vectors (or models) with different layouts were combined.
class LayoutMismatch : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "layout_mismatch"; }
};

/// Invalid configuration. `field()` carries the dotted path of the offending key.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& message)
        : Error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}
    const char* kind() const noexcept override { return "config_error"; }
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class IoError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "io_error"; }
};

}  // namespace ecdnn
