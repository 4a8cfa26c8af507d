#pragma once

#include <string>
#include <vector>

#include "coagprof/grid.hpp"
#include "coagprof/kernel.hpp"
#include "coagprof/profiles.hpp"

namespace coagprof {

// Numerical property checks for computed profiles: structural facts the
// solutions are supposed to carry, each measured against an explicit bar, so
// a report reads as a list of falsifiable statements rather than a shrug.
// Every check is deterministic: identical inputs give bit-identical results.

struct Check {
    std::string name;
    double measured = 0.0;
    // Target value or bound the measurement is held against; `tolerance` is
    // the allowed discrepancy. Range-style checks put the upper cap here and
    // explain themselves in `note`.
    double expected = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    // Window bounds, offending node, auxiliary estimates; free-form.
    std::string note;
};

struct VerificationReport {
    std::string profile_id;
    std::vector<Check> checks;
    bool all_pass() const;
};

// Fits the decay exponent of the tail primitive G on the decade [2 y0, 20 y0]
// (least squares on log G vs log y, tau_fit = 1 - slope) and compares it with
// the moment identity value carried by the solution; pass within 5e-2.
// The fit needs at least 16 nodes with positive G in the window, else
// InsufficientResolutionError. Alpha-zero solutions only: ClassMismatchError
// otherwise. Note that the window truncation biases the fit for exponents
// near 1, where G picks up a slowly decaying correction from y_max.
Check check_tau_identity(const ProfileSolution& sol);

// Verifies tau sits inside (1, min(3/2, 1 + lambda)) with slack 5e-2 on each
// side. Meaningful for alpha-zero kernels with lambda > 0 (at lambda = 0 the
// interval degenerates); ClassMismatchError outside that class.
Check check_tau_range(const ProfileSolution& sol);

// Verifies y^{tau-1} G(y) is nonincreasing across the whole grid, with slack
// 1e-6 relative to its own sup. The measured value is the worst increase on
// that scale; a violation is located in the note. The zero function passes
// vacuously. Alpha-zero solutions only: ClassMismatchError otherwise.
Check check_tail_monotonicity(const ProfileSolution& sol);

// Reads K(y) = exp(log g + Lambda) over the lowest resolved decade, where
// "resolved" means g >= 1e-300 (below that, log g loses precision to the
// denormal range and K turns to noise). Checks that K is nonincreasing
// (relative slack 1e-6), positive at the window start, and has relative
// oscillation at most 5e-2 over the lowest half-decade; the K value at the
// window start is reported in the note as the origin constant estimate.
// Throws UnderflowWindowError when underflow leaves less than half a decade
// (or fewer than 4 nodes) of resolved values, naming what remains.
// Negative-alpha solutions only: ClassMismatchError otherwise.
Check check_origin_constant(const ProfileSolution& sol);

// Solves the class-appropriate profile problem twice, once from each seed,
// at the same mass, and measures the mass-norm distance between the outputs.
// Distance and the class moment agreements (M_lambda for alpha-zero, the two
// exponent moments for negative alpha, relative) must all come in under
// 3x opts.tol. The note records the moment discrepancies and, for negative
// alpha, both origin constants. opts.initial is overwritten per seed; solver
// errors propagate.
Check uniqueness_experiment(const KernelSpec& k, double mass,
                            const GridFunction& seed_a, const GridFunction& seed_b,
                            const SolverOptions& opts);

// Ratio test for discrete smoothness: divided second and third differences
// in the grid coordinate, fine stencils (stride 1) against coarse stencils
// (stride 2, even offsets only), sup over the trusted interval. A smooth
// resolved function gives ratios near 1; a kink or jump concentrates the
// fine stencil and pushes the ratio past the bound 4. A sanity proxy, not a
// proof. The zero function passes. InsufficientResolutionError when the
// trusted interval has no room for the coarse stencil.
Check smoothness_sanity(const ProfileSolution& sol);

// The class-appropriate report: tau identity, tau range (when lambda > 0)
// and tail monotonicity for alpha-zero; the origin constant for negative
// alpha; the smoothness proxy for both.
VerificationReport verify_profile(const ProfileSolution& sol,
                                  std::string profile_id);

}  // namespace coagprof
