#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "coagprof/grid.hpp"
#include "coagprof/kernel.hpp"

namespace coagprof {

// Self-similar profile solvers. A profile g solves
//   2 g + y g' + (1 - lambda) C(g, g) = 0,  y g integrable,
// and is computed here as a damped fixed point of the class-specific
// rewriting of that equation, on the grid the caller supplies.

struct SolverOptions {
    GridPtr grid;
    double tol = 1e-8;           // relative L1 (mass-weighted) change per sweep
    double residual_tol = 1e-2;  // bar for the relative equation defect
    std::size_t max_iter = 300;
    double damping = 0.5;  // fraction of the update mixed into the iterate
    // Seed iterate; when absent the solver starts from a mass-normalized
    // shape matching the class (exponential for negative alpha, mildly
    // singular power times exponential otherwise).
    std::optional<GridFunction> initial;
};

// The exponential weight of a negative-alpha profile: g = K e^{-Lambda} with
// K slowly varying, so Lambda carries the entire decay at both ends.
// Lambda(y) = 2 log y - (1-lambda) w (M_beta y^alpha / alpha
//                                     + M_alpha y^beta / beta),
// with a log branch replacing a power when its exponent is zero.
struct LambdaFunction {
    double alpha = 0.0;
    double beta = 0.0;
    double weight = 1.0;
    double lambda = 0.0;
    double M_alpha = 0.0;
    double M_beta = 0.0;
    bool beta_is_zero = false;

    double operator()(double y) const;
};

struct ProfileSolution {
    GridFunction g;
    KernelSpec kernel;
    // exponent -> (on-grid moment, upper-tail estimate)
    std::map<double, std::pair<double, double>> moments;
    // Decay exponent of the profile at 0, defined through the moment
    // identity tau = 2 - (1-lambda) sum_t w_t M_{beta_t}. Meaningful for the
    // alpha-zero class only.
    double tau = 0.0;
    // alpha_neg: limit of g e^Lambda at the lower edge (positive for a
    // genuine profile). alpha_zero: limit of y^{tau-1} G with G the tail
    // primitive of g.
    double K0 = 0.0;
    LambdaFunction lambda_fn;  // populated for the alpha_neg class
    // Sup over the trusted interval of the equation defect measured against
    // the local size of its terms. The relative form is invariant under the
    // scaling family, where the raw defect picks up a factor mu^{1+lambda}.
    double residual = 0.0;
    std::size_t iterations = 0;
    // A posteriori flags; discretization can push a genuine solution
    // slightly past the sharp bounds, so these warn instead of throwing.
    bool tau_in_range = true;  // alpha_zero: 1 < tau < min(3/2, 1+lambda)
    bool monotone = true;      // alpha_neg: g e^Lambda nonincreasing
    // Set when a solver returned the zero function because the seed carried
    // no mass; none of the diagnostics above mean anything then.
    bool degenerate = false;
};

// ConvergenceError that carries the last iterate, diagnostics recomputed, so
// a caller can persist what the budget bought before the failure surfaced.
// Handlers written against ConvergenceError keep working unchanged.
struct SolverStallError : ConvergenceError {
    ProfileSolution partial;

    SolverStallError(const std::string& what, ProfileSolution p)
        : ConvergenceError(what), partial(std::move(p)) {}
};

// Solves mu(y) g + y g' = h by variation of constants, anchored at the grid
// node y_a with value g_a. The integrating factor is carried per cell as
// exp of a Lambda difference, never as e^Lambda itself, so steep mu cannot
// overflow an intermediate; OverflowGuardError only if the solution value
// itself leaves the representable range.
GridFunction ode_solve(const GridFunction& mu, const GridFunction& h, double y_a,
                       double g_a);

// Fixed-point solver for kernels whose every term has alpha = 0. Iterates
//   tau = 2 - (1-lambda) sum_t w_t M_{beta_t}[g]
//   h   = (1-lambda) sum_t w_t (G * (y^{beta_t} g))
//   K   = tail integral of y^{tau-2} h,   G = y^{1-tau} K,
//   g  <- -G' clipped at 0, renormalized to the target mass,
// damped by opts.damping, until the mass-weighted relative change drops
// under opts.tol; the converged iterate must also pass the independent
// residual check. Throws ConvergenceError when the budget runs out.
ProfileSolution solve_alpha_zero(const KernelSpec& k, double mass,
                                 const SolverOptions& opts);

// Fixed-point solver for single-term kernels with alpha < 0. Iterates
//   h = -(1-lambda) w (y^alpha g) * (y^beta g),
//   g = K e^{-Lambda} with K from the cumulative integral of e^Lambda h / y,
// anchoring the free constant through the mass target, all exponentials
// carried as per-cell Lambda differences. The profile vanishes faster than
// any power at 0, so nodes whose value underflows are reported as exact 0.
ProfileSolution solve_alpha_neg(const KernelSpec& k, double mass,
                                const SolverOptions& opts);

// The scaling family: g -> mu^{1+lambda} g(mu y) resampled onto the same
// grid. Leaves M_lambda unchanged and scales the mass by mu^{lambda-1};
// diagnostic fields are recomputed from the resampled values.
ProfileSolution rescale_profile(const ProfileSolution& sol, double mu);

// Pointwise residual 2 g + y g' + (1-lambda) C(g,g), with g' by central
// differences in the grid coordinate and C by the pointwise quadrature
// route. Deliberately not the route the solvers iterate, so a small value
// is an independent statement about the solution.
GridFunction residual(const ProfileSolution& sol);

// Sup-norm of a node field over the trusted interval [10 y_min, y_max/10].
double trusted_sup(const GridFunction& f);

namespace detail {
// Recomputes every diagnostic field of sol from sol.g and sol.kernel.
// Internal plumbing shared by the solvers; not part of the stable surface.
void finalize_solution(ProfileSolution& sol);
}  // namespace detail

}  // namespace coagprof
