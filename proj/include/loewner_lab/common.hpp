#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace ll {

using Point = std::complex<double>;

struct InvalidInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ResolutionError : std::runtime_error {
    ResolutionError(const std::string& msg, long index = -1)
        : std::runtime_error(msg), index(index) {}
    long index;
};

struct ConditioningImpossible : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace ll
