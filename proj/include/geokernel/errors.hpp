#pragma once

#include <stdexcept>
#include <string>

namespace geokernel {

// Bad input or configuration. The CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Integration, projection or solve failure. The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace geokernel
