#pragma once

#include <stdexcept>
#include <string>

namespace coagprof {

// Construction parameters outside their admissible range (empty interval,
// nonpositive endpoint, too few nodes).
struct InvalidRangeError : std::invalid_argument {
    explicit InvalidRangeError(const std::string& what) : std::invalid_argument(what) {}
};

// A kernel exponent constraint does not hold. The message names the violated
// inequality.
struct ConstraintViolation : std::invalid_argument {
    explicit ConstraintViolation(const std::string& what) : std::invalid_argument(what) {}
};

// Kernel evaluated outside its domain (x, y must be positive).
struct KernelDomainError : std::domain_error {
    explicit KernelDomainError(const std::string& what) : std::domain_error(what) {}
};

// An operation received a grid of the wrong kind (e.g. fractional operators
// require uniform spacing).
struct GridKindError : std::invalid_argument {
    explicit GridKindError(const std::string& what) : std::invalid_argument(what) {}
};

// Interpolation queried beyond the right end of the grid.
struct ExtrapolationError : std::out_of_range {
    explicit ExtrapolationError(const std::string& what) : std::out_of_range(what) {}
};

// A quadrature or moment produced a non-finite value.
struct NonFiniteValueError : std::runtime_error {
    explicit NonFiniteValueError(const std::string& what) : std::runtime_error(what) {}
};

// Partial sums of a singular integrand grow toward the lower grid edge, so the
// integral is not resolved by the grid.
struct SingularIntegrandError : std::runtime_error {
    explicit SingularIntegrandError(const std::string& what) : std::runtime_error(what) {}
};

// An operation restricted to one kernel class was called with another.
struct ClassMismatchError : std::invalid_argument {
    explicit ClassMismatchError(const std::string& what) : std::invalid_argument(what) {}
};

// An exponential factor left the representable range and no rescaling was
// possible.
struct OverflowGuardError : std::runtime_error {
    explicit OverflowGuardError(const std::string& what) : std::runtime_error(what) {}
};

// A solver was seeded with an unusable initial iterate.
struct InvalidInitialization : std::invalid_argument {
    explicit InvalidInitialization(const std::string& what) : std::invalid_argument(what) {}
};

// An iteration exhausted its budget without meeting its tolerance.
struct ConvergenceError : std::runtime_error {
    explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

// Explicit time step exceeds the stability bound.
struct StabilityViolationError : std::runtime_error {
    explicit StabilityViolationError(const std::string& what) : std::runtime_error(what) {}
};

// A diagnostic window contains too few nodes to be meaningful.
struct InsufficientResolutionError : std::runtime_error {
    explicit InsufficientResolutionError(const std::string& what) : std::runtime_error(what) {}
};

// A persisted file does not parse as the format it claims: unreadable path,
// malformed syntax, missing fields, or sample counts contradicting the
// declared grid.
struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// An origin diagnostic found its window shrunk below half a decade because
// the values underflowed to zero there. The message names what remains.
struct UnderflowWindowError : std::runtime_error {
    explicit UnderflowWindowError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace coagprof
