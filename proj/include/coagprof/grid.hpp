#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "coagprof/errors.hpp"

namespace coagprof {

enum class GridKind { geometric, uniform };

// One-dimensional quadrature grid on (0, y_max]. Node 0 is never part of the
// grid: densities handled here may be singular at the origin, and the
// operators that need sub-grid contributions handle them explicitly.
//
// Two kinds are supported.
//   geometric  nodes y_i = y_min * r^i with r = (y_max/y_min)^(1/(n-1)).
//              Used for profiles, which live across many decades.
//   uniform    nodes y_i = (i+1)*h with h = y_max/n. Used by the fractional
//              operators, whose kernels are functions of node differences.
//
// Weights are trapezoidal on [y_min, y_max]; quadrature against them is exact
// for piecewise-linear integrands on the nodes.
class Grid {
  public:
    static Grid geometric(double y_min, double y_max, std::size_t n);
    static Grid uniform(double y_max, std::size_t n);

    GridKind kind() const { return kind_; }
    std::size_t size() const { return nodes_.size(); }
    double node(std::size_t i) const { return nodes_[i]; }
    double weight(std::size_t i) const { return weights_[i]; }
    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<double>& weights() const { return weights_; }

    double y_min() const { return nodes_.front(); }
    double y_max() const { return nodes_.back(); }

    // Common ratio (geometric) or step (uniform); throws GridKindError for
    // the other kind.
    double ratio() const;
    double step() const;

    // Index of the cell [node(i), node(i+1)] containing q, assuming
    // y_min <= q <= y_max.
    std::size_t cell_index(double q) const;

    bool same_nodes_as(const Grid& other) const;

  private:
    Grid(GridKind kind, std::vector<double> nodes, std::vector<double> weights,
         double param);

    GridKind kind_;
    std::vector<double> nodes_;
    std::vector<double> weights_;
    double param_;  // ratio r for geometric, step h for uniform
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_geometric_grid(double y_min, double y_max, std::size_t n);
GridPtr make_uniform_grid(double y_max, std::size_t n);

// Samples on a grid. Values are extended by zero to the left of y_min; the
// functions represented here are supported on (0, infinity) and anything the
// grid does not resolve below y_min is treated as absent.
struct GridFunction {
    GridPtr grid;
    std::vector<double> values;

    GridFunction() = default;
    GridFunction(GridPtr g, std::vector<double> v);

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }
};

GridFunction sample(const GridPtr& grid, const std::function<double(double)>& f);

// Interpolated value at q. Piecewise linear in log y on geometric grids and
// in y on uniform grids; zero for q < y_min. Queries beyond y_max throw
// ExtrapolationError unless beyond_right_is_zero is set (profiles decay, so
// callers that know the tail is negligible may opt in).
double interpolate(const GridFunction& f, double q, bool beyond_right_is_zero = false);

// Truncated moment  sum_i w_i y_i^mu f_i  ~  integral over [y_min, y_max] of
// y^mu f(y) dy. Summation order is fixed (left to right), so results are
// reproducible bit for bit. Throws NonFiniteValueError if the sum leaves the
// finite range.
double moment(const GridFunction& f, double mu);

// Estimate of the moment mass above y_max, from an exponential fit
// f ~ A exp(-b y) over the top decade of the grid. Returns 0 when no clean
// positive decay is visible. This is a reporting device: moments themselves
// stay truncated.
double moment_tail_estimate(const GridFunction& f, double mu);

// f transplanted onto target. Source values interpolate by the source grid's
// rule; target nodes left of the source range get zero; target nodes beyond
// the source y_max (with 1e-12 relative slack) throw ExtrapolationError.
GridFunction resample(const GridFunction& f, const GridPtr& target);

}  // namespace coagprof
