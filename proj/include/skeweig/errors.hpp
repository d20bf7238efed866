#ifndef SKEWEIG_ERRORS_HPP
#define SKEWEIG_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace skeweig {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotSkewSymmetric : public Error {
public:
    using Error::Error;
};

class NonSquare : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class IndexOutOfRange : public Error {
public:
    using Error::Error;
};

/// Malformed Matrix Market input. `line()` is 1-based; 0 when unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class UnsupportedField : public Error {
public:
    using Error::Error;
};

class NoConvergence : public Error {
public:
    using Error::Error;
};

class ZeroStartVector : public Error {
public:
    using Error::Error;
};

class InvalidOptions : public Error {
public:
    using Error::Error;
};

class MatrixAllZero : public Error {
public:
    using Error::Error;
};

}  // namespace skeweig

#endif  // SKEWEIG_ERRORS_HPP
