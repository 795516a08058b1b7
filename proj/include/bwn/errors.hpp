#pragma once

#include <stdexcept>
#include <string>

namespace bwn {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// point outside the closed domain
struct DomainMembershipError : Error {
    using Error::Error;
};

struct ParameterError : Error {
    using Error::Error;
};

struct UnsupportedError : Error {
    using Error::Error;
};

// bad experiment configuration; the CLI maps this to exit code 1
struct ConfigError : Error {
    using Error::Error;
};

// the numerics refuse to run at the requested resolution (exit code 2)
struct NumericalRefusal : Error {
    using Error::Error;
};

}  // namespace bwn
