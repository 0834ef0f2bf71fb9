#pragma once

#include <stdexcept>
#include <string>

namespace coreg {

/// Base class for every exception thrown by this library.
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Caller handed us something malformed: bad parameter range, bad config,
/// inconsistent specification. Maps to CLI exit code 2.
class invalid_input : public error {
public:
    using error::error;
};

/// File/stream problems: unreadable paths, malformed CSV/JSON.
/// Maps to CLI exit code 2.
class io_error : public error {
public:
    using error::error;
};

/// Numerical or model-level failure on structurally valid input:
/// singular designs, non-PSD covariances, insufficient samples.
/// Maps to CLI exit code 3.
class numeric_error : public error {
public:
    using error::error;
};

/// Shape/size mismatch detected at an operation boundary.
class dimension_error : public numeric_error {
public:
    using numeric_error::numeric_error;
};

/// No module passed acceptance at any lambda; callers are expected to
/// fall back to the plain OLS analysis.
class no_structure_error : public numeric_error {
public:
    using numeric_error::numeric_error;
};

}  // namespace coreg
