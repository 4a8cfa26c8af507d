#pragma once

#include <cstdint>
#include <vector>

#include "coagprof/grid.hpp"
#include "coagprof/kernel.hpp"

namespace coagprof {

// Coagulation collision operator C(f, g), symmetric and bilinear, normalized
// so that C(f, f) has gain (1/2) int_0^y a(z, y-z) f(z) f(y-z) dz and loss
// f(y) int_0^infty a(z, y) f(z) dz.
//
// Both the gain integral and the loss moments are truncated at the same lower
// cutoff y_min. For kernels with an alpha = 0 exponent the two truncated
// pieces diverge individually as y_min -> 0 but their difference converges;
// sharing the cutoff is what makes the cancellation happen at the discrete
// level, so no piece of this operator may move its lower limit independently.
//
// Values below roughly 2*y_min carry no resolvable gain and are reliable only
// inside the trusted interval [10*y_min, y_max/10].
class CoagulationOperator {
  public:
    CoagulationOperator(GridPtr grid, KernelSpec kernel);

    // C(f, g) at every grid node. Throws SingularIntegrandError when a
    // negative exponent meets an input that does not vanish fast enough at
    // the lower grid edge.
    GridFunction apply(const GridFunction& f, const GridFunction& g) const;

    const GridPtr& grid() const { return grid_; }
    const KernelSpec& kernel() const { return kernel_; }

  private:
    struct Entry {
        double a;          // kernel value a(z, y_i - z)
        double w;          // trapezoid weight on [y_min, y_i - y_min]
        std::uint32_t zb;  // stencil base for the abscissa z
        std::uint32_t qb;  // stencil base for the reflected point y_i - z
        double z0, z1, z2;  // three-point reconstruction coefficients
        double q0, q1, q2;
    };

    GridPtr grid_;
    KernelSpec kernel_;
    std::vector<std::size_t> row_begin_;
    std::vector<Entry> entries_;
    std::vector<std::vector<double>> pow_alpha_;  // per term, y_i^alpha
    std::vector<std::vector<double>> pow_beta_;   // per term, y_i^beta
};

// One-shot wrapper; builds the quadrature plan, applies it once.
GridFunction apply_pointwise(const KernelSpec& k, const GridFunction& f,
                             const GridFunction& g);

// Weak pairing < C(f,g), phi > through the symmetric double sum with the
// difference phi(x+z) - phi(x) - phi(z). On a grid over (0, y_max] only the
// part of C supported on (0, infinity) is observable, and this bracket is its
// action; a test function with phi(0) != 0 therefore sees the decay in the
// number of clusters (phi == 1 gives -1/2 integral of a f g), while
// phi(y) = y gives 0 identically, one bracket at a time.
//
// phi is sampled on its own grid, which must reach 2 * y_max.
double apply_weak(const KernelSpec& k, const GridFunction& f, const GridFunction& g,
                  const GridFunction& phi);

// Smooth-test-function evaluation used by apply_weak: piecewise linear in y
// on any grid kind (so affine test functions are reproduced exactly), with
// the first cell extended linearly down to 0.
double test_function_value(const GridFunction& phi, double q);

// Truncated convolution  (u * v)(y_i) = int u(z) v(y_i - z) dz  over
// [y_min, y_i - y_min]. Breakpoints are the grid nodes merged with their
// reflections y_i - z; between consecutive breakpoints both factors follow
// local quadratic models in y and the product is integrated exactly by
// three-point Gauss. Shares only the node samples with the pointwise route,
// so agreement between the two is a genuine resolution statement.
GridFunction convolve(const GridFunction& u, const GridFunction& v);

// C(f, g) assembled from the convolution representation: per term,
//   gain = (w/2) [ (y^a f) * (y^b g) + (y^b f) * (y^a g) ]
//   loss = (w/2) [ M_b[g] y^a f + M_a[f] y^b g + M_a[g] y^b f + M_b[f] y^a g ]
// with the same truncated moments as the pointwise route. Agrees with
// apply_pointwise up to quadrature differences of second order in the cell
// width.
GridFunction apply_convolution(const KernelSpec& k, const GridFunction& f,
                               const GridFunction& g);

// Tail primitive G(y_i) = int_{y_i}^{y_max} g plus an exponential-fit
// estimate of the mass above y_max (zero when no clean decay is visible).
GridFunction tail_primitive(const GridFunction& g);

// Moment with the upper-tail estimate added; the lower truncation at y_min
// always stays, deliberately, to match the gain truncation.
double moment_with_tail(const GridFunction& f, double mu);

// Primitive of the collision operator taken from y to infinity,
//   int_y^infty C(g, g) = sum_t w_t [ (G * (y^b_t g))(y) - M_{b_t}[g] G(y) ],
// valid when every kernel term has alpha = 0 (ClassMismatchError otherwise).
// This is the identity that turns the profile equation into a first-order
// problem for G.
GridFunction primitive_of_C(const KernelSpec& k, const GridFunction& g);

}  // namespace coagprof
