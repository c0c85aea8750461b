#pragma once

#include <stdexcept>
#include <string>

namespace fdc {

// Malformed or inconsistent input data (files, datasets). CLI exit code 2.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical failure at runtime (divergence, NaN loss). CLI exit code 3.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace fdc
