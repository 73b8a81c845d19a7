#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sepcp {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid arguments, inconsistent shapes, malformed configuration.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Data that cannot be studentized, e.g. a score component with zero residual variance.
class DegenerateDataError : public Error {
public:
    DegenerateDataError(const std::string& what, std::size_t component)
        : Error(what), component_(component) {}
    explicit DegenerateDataError(const std::string& what) : Error(what) {}

    /// Index of the offending component, or npos when not component specific.
    std::size_t component() const noexcept { return component_; }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    std::size_t component_ = npos;
};

/// File access and on-disk format violations.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace sepcp
