#pragma once

#include <stdexcept>
#include <string>

namespace qfc {

// Base of everything thrown by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad arguments or configuration; the CLI maps these to exit code 2.
struct InvalidInputError : Error {
    using Error::Error;
};

// Numerical breakdown during a run; the CLI maps these to exit code 3.
struct NumericalError : Error {
    using Error::Error;
};

struct InvalidConfigError : InvalidInputError {
    using InvalidInputError::InvalidInputError;
};

struct ZeroFrameError : InvalidInputError {
    ZeroFrameError() : InvalidInputError("frame coefficients (alpha, beta) are both zero") {}
};

struct UnnormalizableFrameError : InvalidInputError {
    UnnormalizableFrameError()
        : InvalidInputError("omega = 0 admits only position-like frames (beta must be zero)") {}
};

struct FreeParticleError : InvalidInputError {
    FreeParticleError() : InvalidInputError("operation undefined for omega = 0; use the SI-form operations") {}
};

struct NotFreeParticleError : InvalidInputError {
    NotFreeParticleError() : InvalidInputError("operation requires omega = 0") {}
};

struct IntegrationUnstableError : NumericalError {
    using NumericalError::NumericalError;
};

struct HeatingRegimeError : InvalidInputError {
    HeatingRegimeError() : InvalidInputError("thermal analogy requires v < 0 (cooling regime)") {}
};

struct NegativeOccupationError : NumericalError {
    NegativeOccupationError() : NumericalError("pump constant c < 0; no physical bath occupation") {}
};

struct InvalidAnalogyError : InvalidInputError {
    InvalidAnalogyError()
        : InvalidInputError("temperature formula undefined for -kappa*omega < v < 0") {}
};

struct GridTooSmallError : InvalidInputError {
    using InvalidInputError::InvalidInputError;
};

struct NotNormalizedError : InvalidInputError {
    NotNormalizedError() : InvalidInputError("wavefunction is not normalized") {}
};

struct NormCollapseError : NumericalError {
    using NumericalError::NumericalError;
};

struct BoundaryLeakError : NumericalError {
    using NumericalError::NumericalError;
};

struct BudgetExceededError : InvalidInputError {
    using InvalidInputError::InvalidInputError;
};

struct TruncationLeakError : NumericalError {
    using NumericalError::NumericalError;
};

struct PositivityLossError : NumericalError {
    using NumericalError::NumericalError;
};

}  // namespace qfc
