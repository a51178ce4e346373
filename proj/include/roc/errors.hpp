#ifndef ROC_ERRORS_HPP
#define ROC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace roc {

// Bad arguments, malformed config, out-of-range parameters.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A mathematically inadmissible point (det <= 0, log of a non-positive
// value, ...). Carries enough context to locate the offending input.
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical evaluation could not be completed (non-finite values,
// finite-difference step underflow, ...).
struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Randomized construction exhausted its retry budget.
struct SamplingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace roc

#endif
