#pragma once

#include "coagprof/grid.hpp"

namespace coagprof {

// Riemann-Liouville operators for sampled functions on uniform grids.
//
// Sampled functions are read as left-supported: zero on (-infinity, 0),
// piecewise linear between the nodes h, 2h, ..., and on the leading cell
// [0, h] linear from a virtual sample at 0 extrapolated through the first
// two nodes. A constant sample array therefore really means the indicator
// of [0, infinity), and a function that vanishes quadratically at 0 keeps
// that behavior to O(h^2).
//
// Only uniform grids are accepted: the power-kernel cell moments that remove
// the (y-z)^{k-1} singularity in closed form exist only on uniform steps.

// Order of a fractional derivative split as k = n - s with integer n >= 0
// and s in [0, 1); the split is unique, with n = 0 only for k = 0.
struct FracOrder {
    double k;
    int n;
    double s;
};

// Splits a nonnegative order; negative orders have no derivative meaning.
FracOrder frac_order(double k);

// A sampled density read distributionally: it acts on test functions only
// through pairings that subtract phi(0), so it may be non-integrable at 0 as
// long as y^k f is integrable for some k <= 1. Whether a given pairing is
// actually finite is only decidable when it is evaluated.
struct FinitePart {
    GridFunction f;
};

// D^{-k} f (y) = (1/Gamma(k)) int_{-inf}^{y} f(z) (y-z)^{k-1} dz for k > 0,
// by product integration: f piecewise linear, cell moments of the kernel
// exact. The integrable singularity at z = y never meets a quadrature node.
// k = 0 returns the samples unchanged (D^0 is the identity).
GridFunction left_integral(const GridFunction& f, double k);

// D^k f = d^n/dy^n (D^{-s} f) with k = n - s. Finite differences are
// second order: central inside, one-sided at both edges. k = 0 is the
// identity.
GridFunction left_derivative(const GridFunction& f, double k);

// Mirror image about the grid's midpoint: node j takes the value of node
// n-1-j, exactly. Sends left-supported data to right-supported data.
GridFunction reflect(const GridFunction& f);

// Right-sided operators, defined as the reflection conjugates of the left
// ones: reflect, apply the left operator, reflect back. This makes the
// mirror identity hold to the bit.
GridFunction right_integral(const GridFunction& f, double k);
GridFunction right_derivative(const GridFunction& f, double k);

// int_0^inf f(z) (phi(z) - phi(0)) dz: the pairing that regularizes an
// integrable-after-subtraction singularity of f at 0. phi is a smooth test
// function on its own grid, read like the weak-pairing test functions
// (linear in y, extended linearly down to 0, so phi(0) is explicit).
// Throws SingularIntegrandError when the per-node contributions keep
// growing toward the lower edge, i.e. the grid does not resolve the pairing.
double finite_part_pairing(const FinitePart& f, const GridFunction& phi);

// Quadrature check of  int_0^inf (x^{k-1} - (z+x)^{k-1}) dx = z^k / k
// for 0 < k < 1: numeric value (head piece in closed form, geometric-grid
// trapezoid body, power-law tail estimate) next to the exact one.
struct DifferenceIntegralCheck {
    double numeric;
    double exact;
};
DifferenceIntegralCheck check_difference_integral(double k, double z);

}  // namespace coagprof
