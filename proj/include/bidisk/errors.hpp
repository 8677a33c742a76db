#pragma once

#include <stdexcept>
#include <string>

namespace bidisk {

/// Input polynomial/function is identically zero or otherwise unusable.
struct DegenerateInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A denominator fails the strict-stability test on the closed bidisk.
struct UnstableDenominator : std::domain_error {
    using std::domain_error::domain_error;
};

/// Two torus grids of different sizes were combined.
struct GridMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A coefficient array expected to be divisible by a coordinate was not.
struct NonDivisible : std::logic_error {
    using std::logic_error::logic_error;
};

/// p and its reflection share a polynomial factor.
struct CommonFactor : std::domain_error {
    using std::domain_error::domain_error;
};

/// The kernel-identity linear system has no solution.
struct InfeasibleIdentity : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Sampled Loewner comparison rejected a computed extremal pair.
struct NotLoewnerMaximal : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Model-space truncation has dimension zero.
struct DegenerateFrame : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A function handed to a model-space operator is not in the model space.
struct NotInModelSpace : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A matrix expected to be Hermitian is not.
struct NotHermitian : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Numerical witnesses contradict the predicted verdict.
struct InconsistentWithTheorem : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace bidisk
