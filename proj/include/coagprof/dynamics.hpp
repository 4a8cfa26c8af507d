#pragma once

#include <cstddef>

#include "coagprof/grid.hpp"
#include "coagprof/kernel.hpp"
#include "coagprof/profiles.hpp"

namespace coagprof {

// Time-dependent solver for the coagulation equation, plus the change of
// variables that exposes self-similar behavior. Serves as an independent
// cross-check on the profile solvers and as a fallback when the fixed-point
// iteration stalls.

struct EvolutionState {
    GridFunction f;      // current number density
    double t = 0.0;      // elapsed time
    double t0 = 1.0;     // positive time offset of the scaling frame
    double mass0 = 0.0;  // on-grid mass at construction
    // Audit trail: mass that left through the top boundary, and negative
    // mass removed by clipping. On-grid mass + outflux - clipped stays equal
    // to mass0 to roundoff.
    double outflux = 0.0;
    double clipped = 0.0;
};

// Validates the density (nonnegative, finite) and records its mass.
EvolutionState make_evolution_state(GridFunction f, double t0);

// Largest stable step at the current state: a fraction below 1 over the
// maximal per-particle merge rate. Infinite for an empty state.
double stable_dt(const EvolutionState& state, const KernelSpec& k);

// One explicit step of the coagulation equation, conservative in the mass
// variable y f. The update is written in flux form: the mass current through
// each cell edge counts every pair whose merge product crosses that edge, so
// interior transfers telescope exactly and only the top-boundary current
// changes the total, which is recorded in outflux. Throws
// StabilityViolationError when dt exceeds the stable bound.
EvolutionState step(const EvolutionState& state, double dt, const KernelSpec& k);

// Undoes the self-similar change of variables at time t: with
// p = (t0+t)^{-1/(1-lambda)} and q = p^2, returns f(t, y/p)/q sampled on the
// state's grid. For an exactly self-similar f this returns the profile for
// every t.
GridFunction rescale_to_profile_frame(const EvolutionState& state, double lambda);

// Drives the rescaled coagulation flow ds g = 2g + y dg/dy + (1-lambda)
// C(g,g), whose steady states are exactly the profiles and whose transport
// characteristics run toward the origin, by explicit pseudo-time stepping
// with forward-difference upwind advection and per-step renormalization to
// unit mass. Renormalization makes the scaling-family direction contract, so
// the unit-mass profile is the attractor; other masses come from the family.
// Convergence is judged by the scale-normalized centered defect against
// opts.residual_tol; opts.max_iter counts pseudo-time steps here. A seed
// without mass returns immediately as the degenerate zero solution. Throws
// ConvergenceError when the budget runs out.
ProfileSolution relax_to_profile(const KernelSpec& k, const GridFunction& g0,
                                 const SolverOptions& opts);

}  // namespace coagprof
