#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vfem {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or unsupported mesh input (file parsing, connectivity).
class MeshError : public Error {
public:
    using Error::Error;
};

class DegenerateElementError : public MeshError {
public:
    DegenerateElementError(std::size_t element, const std::string& what)
        : MeshError(what), element_(element) {}
    std::size_t element() const noexcept { return element_; }

private:
    std::size_t element_;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace vfem
