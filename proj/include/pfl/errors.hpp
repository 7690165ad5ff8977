#pragma once

#include <stdexcept>
#include <string>

namespace pfl {

// Invalid parameters, geometry or CLI input. Maps to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Solver breakdown, non-finite fields, training divergence. Exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent data files / arrays. Exit code 4.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class LabelingError : public DataError {
public:
    using DataError::DataError;
};

class SplitError : public DataError {
public:
    using DataError::DataError;
};

} // namespace pfl
