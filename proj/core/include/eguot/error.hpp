#pragma once

#include <stdexcept>
#include <string>

namespace eguot {

/// Raised on contract violations: bad shapes, out-of-range arguments,
/// non-finite inputs.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised by the training loop when a loss turns NaN/Inf. `what()` carries
/// the step diagnostic.
class NonFiniteLoss : public Error {
public:
    using Error::Error;
};

}  // namespace eguot
