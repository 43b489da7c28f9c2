#pragma once

#include <stdexcept>
#include <string>

namespace zorb {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Contract violation: incompatible matrix/layer dimensions.
struct DimError : Error {
    explicit DimError(const std::string& msg) : Error(msg) {}
};

/// Numerical failure (SVD non-convergence, NaN divergence, ...).
struct NumericError : Error {
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

/// Malformed input file or architecture string.
struct ParseError : Error {
    explicit ParseError(const std::string& msg) : Error(msg) {}
};

/// Operation invoked on an object in the wrong state.
struct StateError : Error {
    explicit StateError(const std::string& msg) : Error(msg) {}
};

} // namespace zorb
