#pragma once

#include <stdexcept>
#include <string>

namespace loopgrade {

/// Integration produced a non-finite state; no usable trajectory exists.
struct NumericalFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A caller required a stable trajectory but the loop diverged.
struct UnstableError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// No gain crossover found on the (extended) frequency grid.
struct NoCrossoverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Reference tuning search ended with the margin constraints violated.
struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Query point lies outside the mesh design range.
struct OutOfRangeError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Response has no usable peak (max below 1e-6), features are undefined.
struct DegenerateResponseError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Reference trajectory integrates to ~zero, distance is undefined.
struct ZeroReferenceError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Dataset generation could not fill the class quotas within its attempt budget.
struct BudgetExceededError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Step record never reaches steady state, fitting preconditions fail.
struct NotSettledError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Model fit residual exceeds the acceptable fraction of the output span.
struct FitDivergedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace loopgrade
