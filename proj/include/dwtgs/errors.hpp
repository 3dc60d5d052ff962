#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dwtgs {

// Base for every domain failure raised by the library. The CLI maps
// IoError/FormatError/UsageError to exit code 2 and everything else to 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class InvalidDepth : public Error {
public:
    using Error::Error;
};

class InvalidFilter : public Error {
public:
    using Error::Error;
};

class InvalidFraction : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    using Error::Error;
};

class MaskMismatch : public Error {
public:
    using Error::Error;
};

class EmptyMask : public Error {
public:
    using Error::Error;
};

class NonFiniteParameter : public Error {
public:
    using Error::Error;
};

class InvalidCount : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class NonFiniteLoss : public Error {
public:
    NonFiniteLoss(long iteration, const std::string& what)
        : Error("non-finite loss at iteration " + std::to_string(iteration) + ": " + what),
          iteration_(iteration) {}

    long iteration() const noexcept { return iteration_; }

private:
    long iteration_;
};

class IoError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    FormatError(std::size_t offset, const std::string& what)
        : Error("format error at byte " + std::to_string(offset) + ": " + what), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class UsageError : public Error {
public:
    using Error::Error;
};

}  // namespace dwtgs
