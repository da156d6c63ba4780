#pragma once

#include <stdexcept>
#include <string>

namespace reserve_lasso {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input: bad triangle file, invalid config value, wrong sizes.
class InvalidInput : public Error {
public:
    using Error::Error;
};

// A numerical routine failed to produce a usable answer.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace reserve_lasso
