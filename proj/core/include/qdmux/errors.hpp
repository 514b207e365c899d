#pragma once

#include <stdexcept>
#include <string>

namespace qdmux {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Physical parameter outside its admissible domain.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Scenario / sequence configuration violates an invariant.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed input data (unsorted streams, bad files).
class DataError : public Error {
public:
    using Error::Error;
};

/// Estimation failure: degenerate normalization, non-decaying tail,
/// rank-deficient sample set.
class FitError : public Error {
public:
    using Error::Error;
};

}  // namespace qdmux
