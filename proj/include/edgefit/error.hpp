#pragma once

#include <stdexcept>

namespace edgefit {

/// Base type for all errors thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input data (bad magic, unparseable header or text line).
class FormatError : public Error {
public:
    using Error::Error;
};

/// Well-formed but unsupported input variant.
class UnsupportedError : public Error {
public:
    using Error::Error;
};

/// Underlying I/O failure (missing file, short read or write).
class IoError : public Error {
public:
    using Error::Error;
};

/// Raster or tensor dimensions unusable for the requested operation.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Degenerate or inconsistent geometric input.
class GeometryError : public Error {
public:
    using Error::Error;
};

/// Invalid argument or configuration value.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Structurally valid input that is empty or unusable for the operation.
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

/// Template construction produced no usable edge points.
class EmptyTemplateError : public Error {
public:
    using Error::Error;
};

}  // namespace edgefit
