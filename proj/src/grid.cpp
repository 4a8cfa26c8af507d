#include "coagprof/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace coagprof {

namespace {

std::vector<double> trapezoid_weights(const std::vector<double>& nodes) {
    const std::size_t n = nodes.size();
    std::vector<double> w(n, 0.0);
    w[0] = 0.5 * (nodes[1] - nodes[0]);
    for (std::size_t i = 1; i + 1 < n; ++i) w[i] = 0.5 * (nodes[i + 1] - nodes[i - 1]);
    w[n - 1] = 0.5 * (nodes[n - 1] - nodes[n - 2]);
    return w;
}

}  // namespace

Grid::Grid(GridKind kind, std::vector<double> nodes, std::vector<double> weights,
           double param)
    : kind_(kind), nodes_(std::move(nodes)), weights_(std::move(weights)), param_(param) {}

Grid Grid::geometric(double y_min, double y_max, std::size_t n) {
    if (!(y_min > 0.0) || !(y_max > y_min))
        throw InvalidRangeError("geometric grid requires 0 < y_min < y_max");
    if (n < 2) throw InvalidRangeError("geometric grid requires at least 2 nodes");
    const double lmin = std::log(y_min);
    const double lmax = std::log(y_max);
    std::vector<double> nodes(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(n - 1);
        nodes[i] = std::exp(lmin + t * (lmax - lmin));
    }
    nodes.front() = y_min;
    nodes.back() = y_max;
    const double r = std::exp((lmax - lmin) / static_cast<double>(n - 1));
    auto weights = trapezoid_weights(nodes);
    return Grid(GridKind::geometric, std::move(nodes), std::move(weights), r);
}

Grid Grid::uniform(double y_max, std::size_t n) {
    if (!(y_max > 0.0)) throw InvalidRangeError("uniform grid requires y_max > 0");
    if (n < 2) throw InvalidRangeError("uniform grid requires at least 2 nodes");
    const double h = y_max / static_cast<double>(n);
    std::vector<double> nodes(n);
    for (std::size_t i = 0; i < n; ++i) nodes[i] = h * static_cast<double>(i + 1);
    nodes.back() = y_max;
    auto weights = trapezoid_weights(nodes);
    return Grid(GridKind::uniform, std::move(nodes), std::move(weights), h);
}

double Grid::ratio() const {
    if (kind_ != GridKind::geometric)
        throw GridKindError("ratio() is defined for geometric grids only");
    return param_;
}

double Grid::step() const {
    if (kind_ != GridKind::uniform)
        throw GridKindError("step() is defined for uniform grids only");
    return param_;
}

std::size_t Grid::cell_index(double q) const {
    const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), q);
    std::size_t j = static_cast<std::size_t>(it - nodes_.begin());
    if (j == 0) return 0;
    if (j >= nodes_.size()) return nodes_.size() - 2;
    return j - 1;
}

bool Grid::same_nodes_as(const Grid& other) const {
    return kind_ == other.kind_ && nodes_ == other.nodes_;
}

GridPtr make_geometric_grid(double y_min, double y_max, std::size_t n) {
    return std::make_shared<Grid>(Grid::geometric(y_min, y_max, n));
}

GridPtr make_uniform_grid(double y_max, std::size_t n) {
    return std::make_shared<Grid>(Grid::uniform(y_max, n));
}

GridFunction::GridFunction(GridPtr g, std::vector<double> v)
    : grid(std::move(g)), values(std::move(v)) {
    if (!grid) throw InvalidRangeError("GridFunction requires a grid");
    if (values.size() != grid->size())
        throw InvalidRangeError("GridFunction values must match grid size");
}

GridFunction sample(const GridPtr& grid, const std::function<double(double)>& f) {
    std::vector<double> v(grid->size());
    for (std::size_t i = 0; i < grid->size(); ++i) v[i] = f(grid->node(i));
    return GridFunction(grid, std::move(v));
}

double interpolate(const GridFunction& f, double q, bool beyond_right_is_zero) {
    const Grid& g = *f.grid;
    if (q < g.y_min()) return 0.0;
    if (q > g.y_max()) {
        if (q <= g.y_max() * (1.0 + 1e-12)) return f.values.back();
        if (beyond_right_is_zero) return 0.0;
        throw ExtrapolationError("interpolation query beyond y_max");
    }
    const std::size_t j = g.cell_index(q);
    const double a = g.node(j), b = g.node(j + 1);
    double t;
    if (g.kind() == GridKind::geometric) {
        t = std::log(q / a) / std::log(b / a);
    } else {
        t = (q - a) / (b - a);
    }
    return f.values[j] + t * (f.values[j + 1] - f.values[j]);
}

double moment(const GridFunction& f, double mu) {
    const Grid& g = *f.grid;
    double s = 0.0;
    if (mu == 0.0) {
        for (std::size_t i = 0; i < f.size(); ++i) s += g.weight(i) * f.values[i];
    } else if (mu == 1.0) {
        for (std::size_t i = 0; i < f.size(); ++i) s += g.weight(i) * g.node(i) * f.values[i];
    } else {
        for (std::size_t i = 0; i < f.size(); ++i)
            s += g.weight(i) * std::pow(g.node(i), mu) * f.values[i];
    }
    if (!std::isfinite(s)) throw NonFiniteValueError("moment is not finite");
    return s;
}

double moment_tail_estimate(const GridFunction& f, double mu) {
    const Grid& g = *f.grid;
    const double cutoff = g.y_max() / 10.0;
    // Least-squares fit of log f against y over the top decade.
    double sy = 0, sl = 0, syy = 0, syl = 0;
    std::size_t m = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (g.node(i) < cutoff || !(f.values[i] > 0.0)) continue;
        const double y = g.node(i), l = std::log(f.values[i]);
        sy += y;
        sl += l;
        syy += y * y;
        syl += y * l;
        ++m;
    }
    if (m < 4 || !(f.values.back() > 0.0)) return 0.0;
    const double denom = static_cast<double>(m) * syy - sy * sy;
    if (!(denom > 0.0)) return 0.0;
    const double slope = (static_cast<double>(m) * syl - sy * sl) / denom;
    const double b = -slope;
    if (!(b > 0.0) || !std::isfinite(b)) return 0.0;
    // Leading order of the integral of y^mu A exp(-b y) above y_max.
    const double est = f.values.back() * std::pow(g.y_max(), mu) / b;
    return std::isfinite(est) ? est : 0.0;
}

GridFunction resample(const GridFunction& f, const GridPtr& target) {
    if (f.grid->same_nodes_as(*target)) return GridFunction(target, f.values);
    const double src_max = f.grid->y_max();
    std::vector<double> v(target->size());
    for (std::size_t i = 0; i < target->size(); ++i) {
        const double q = target->node(i);
        if (q > src_max * (1.0 + 1e-12))
            throw ExtrapolationError("resample target extends beyond source y_max");
        v[i] = interpolate(f, std::min(q, src_max));
    }
    return GridFunction(target, std::move(v));
}

}  // namespace coagprof
