#pragma once

#include <stdexcept>
#include <string>

namespace ffbs {

// Invalid configuration or violated input contract. The CLI maps this to
// exit code 2; the message names the violated constraint.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// NaN/Inf or state blow-up during evaluation or integration. The CLI maps
// this to exit code 3.
struct NumericalError : std::runtime_error {
    double t_abort;
    NumericalError(const std::string& what, double t)
        : std::runtime_error(what), t_abort(t) {}
};

}  // namespace ffbs
