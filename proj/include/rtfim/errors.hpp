#pragma once

#include <stdexcept>
#include <string>

namespace rtfim {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid input that the caller could have checked (bad sizes, bad grids).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A numerical procedure failed to reach its tolerance.
class NumericalFailure : public Error {
public:
    using Error::Error;
};

class QuadratureFailure : public NumericalFailure {
public:
    using NumericalFailure::NumericalFailure;
};

/// The target vacuum is (numerically) orthogonal to the reference vacuum.
class SingularOverlap : public NumericalFailure {
public:
    SingularOverlap(const std::string& what, double ratio)
        : NumericalFailure(what), singular_value_ratio(ratio) {}
    double singular_value_ratio;
};

class NormDriftExceeded : public NumericalFailure {
public:
    NormDriftExceeded(const std::string& what, double drift)
        : NumericalFailure(what), drift(drift) {}
    double drift;
};

class InsufficientTail : public NumericalFailure {
public:
    using NumericalFailure::NumericalFailure;
};

class NonPositiveValue : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class SizeExceeded : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class IndexOutOfRange : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

/// Malformed configuration file or command-line override.
class ConfigError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

}  // namespace rtfim
