#include "coagprof/fracalc.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "coagprof/coagop.hpp"
#include "coagprof/errors.hpp"

namespace coagprof {

namespace {

void require_uniform(const GridFunction& f, const char* who) {
    if (!f.grid) {
        throw InvalidRangeError(std::string(who) + " needs a grid-backed input");
    }
    if (f.grid->kind() != GridKind::uniform) {
        throw GridKindError(std::string(who) +
                            " is defined on uniform grids only; resample first");
    }
    if (f.size() < 4) {
        throw InsufficientResolutionError(std::string(who) +
                                          " needs at least 4 grid nodes");
    }
}

// d/dy by second-order differences: central inside, one-sided at the edges.
std::vector<double> derivative(const std::vector<double>& v, double h) {
    const std::size_t n = v.size();
    std::vector<double> out(n);
    const double inv2h = 1.0 / (2.0 * h);
    out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) * inv2h;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        out[i] = (v[i + 1] - v[i - 1]) * inv2h;
    }
    out[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) * inv2h;
    return out;
}

void require_finite(const std::vector<double>& v, const char* who) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw NonFiniteValueError(std::string(who) +
                                      " produced a non-finite value");
        }
    }
}

}  // namespace

FracOrder frac_order(double k) {
    if (!(k >= 0.0)) {
        throw InvalidRangeError("fractional derivative order must be nonnegative");
    }
    const double r = std::round(k);
    if (std::abs(k - r) < 1e-12) {
        return FracOrder{k, static_cast<int>(r), 0.0};
    }
    const int n = static_cast<int>(std::ceil(k));
    return FracOrder{k, n, static_cast<double>(n) - k};
}

GridFunction left_integral(const GridFunction& f, double k) {
    require_uniform(f, "left_integral");
    if (k == 0.0) {
        return f;
    }
    if (!(k > 0.0)) {
        throw InvalidRangeError("fractional integral order must be nonnegative");
    }
    const std::size_t n = f.size();
    const double h = f.grid->step();

    // Per-cell moments of (y-z)^{k-1} against the linear hat pair, in units
    // of h^k. With u = y - z running over [(M-1)h, Mh] the cell contributes
    // f_a * A[M] + f_b * B[M]; the ramp cell [0, h] uses the virtual sample
    // extrapolated through the first two nodes, so a flat sample array is
    // treated as the indicator of [0, inf) and integrates exactly.
    std::vector<double> A(n + 1), B(n + 1);
    {
        std::vector<double> mk(n + 1), mk1(n + 1);
        for (std::size_t m = 0; m <= n; ++m) {
            mk[m] = std::pow(static_cast<double>(m), k);
            mk1[m] = std::pow(static_cast<double>(m), k + 1.0);
        }
        for (std::size_t M = 1; M <= n; ++M) {
            const double dk = (mk[M] - mk[M - 1]) / k;
            const double dk1 = (mk1[M] - mk1[M - 1]) / (k + 1.0);
            A[M] = (1.0 - static_cast<double>(M)) * dk + dk1;
            B[M] = static_cast<double>(M) * dk - dk1;
        }
    }
    // Interior node m collects A from the cell on its right and B from the
    // cell on its left.
    std::vector<double> AB(n);
    for (std::size_t M = 1; M + 1 <= n; ++M) {
        AB[M] = A[M] + B[M + 1];
    }

    const double ramp = 2.0 * f[0] - f[1];
    const double scale = std::pow(h, k) / std::tgamma(k);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = ramp * A[i + 1];
        for (std::size_t j = 0; j < i; ++j) {
            acc += f[j] * AB[i - j];
        }
        acc += f[i] * B[1];
        out[i] = scale * acc;
    }
    require_finite(out, "left_integral");
    return GridFunction(f.grid, std::move(out));
}

GridFunction left_derivative(const GridFunction& f, double k) {
    require_uniform(f, "left_derivative");
    const FracOrder ord = frac_order(k);
    if (ord.n == 0) {
        return f;
    }
    GridFunction base = (ord.s > 0.0) ? left_integral(f, ord.s) : f;
    std::vector<double> v = std::move(base.values);
    const double h = f.grid->step();
    for (int d = 0; d < ord.n; ++d) {
        v = derivative(v, h);
    }
    require_finite(v, "left_derivative");
    return GridFunction(f.grid, std::move(v));
}

GridFunction reflect(const GridFunction& f) {
    if (!f.grid) {
        throw InvalidRangeError("reflect needs a grid-backed input");
    }
    std::vector<double> v(f.values.rbegin(), f.values.rend());
    return GridFunction(f.grid, std::move(v));
}

GridFunction right_integral(const GridFunction& f, double k) {
    return reflect(left_integral(reflect(f), k));
}

GridFunction right_derivative(const GridFunction& f, double k) {
    return reflect(left_derivative(reflect(f), k));
}

double finite_part_pairing(const FinitePart& fp, const GridFunction& phi) {
    const GridFunction& f = fp.f;
    if (!f.grid) {
        throw InvalidRangeError("finite_part_pairing needs a grid-backed input");
    }
    const std::size_t n = f.size();
    if (n < 3) {
        throw InsufficientResolutionError(
            "finite_part_pairing needs at least 3 grid nodes");
    }
    const double phi0 = test_function_value(phi, 0.0);
    std::vector<double> contrib(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double dphi = test_function_value(phi, f.grid->node(i)) - phi0;
        contrib[i] = f.grid->weight(i) * f[i] * dphi;
    }
    // Contribution mass that does not decay toward the lower edge means the
    // subtracted singularity is still non-integrable on this grid. Block sums
    // rather than single nodes, so rough but integrable data does not trip
    // the check by chance; for a divergent power or log the blocks nearest
    // the edge carry the most mass no matter how fine the grid is.
    const std::size_t m = std::max<std::size_t>(1, n / 8);
    double blocks[3] = {0.0, 0.0, 0.0};
    for (int b = 0; b < 3; ++b) {
        for (std::size_t j = b * m; j < (b + 1) * m && j < n; ++j) {
            blocks[b] += contrib[j];
        }
    }
    double total_abs = 0.0;
    for (double c : contrib) {
        total_abs += std::abs(c);
    }
    // The 0.9 slack keeps the borderline logarithmic divergence caught even
    // though the half weight of the very first node shaves its block.
    const double b0 = std::abs(blocks[0]);
    if (b0 > 0.0 && b0 >= 0.9 * std::abs(blocks[1]) &&
        std::abs(blocks[1]) >= 0.9 * std::abs(blocks[2]) &&
        b0 > 1e-9 * total_abs) {
        throw SingularIntegrandError(
            "finite-part pairing is not resolved at the lower grid edge");
    }
    double acc = 0.0;
    for (double c : contrib) {
        acc += c;
    }
    if (!std::isfinite(acc)) {
        throw NonFiniteValueError("finite_part_pairing produced a non-finite value");
    }
    return acc;
}

DifferenceIntegralCheck check_difference_integral(double k, double z) {
    if (!(k > 0.0 && k < 1.0)) {
        throw InvalidRangeError("difference-integral check needs 0 < k < 1");
    }
    if (!(z > 0.0)) {
        throw InvalidRangeError("difference-integral check needs z > 0");
    }
    const double x_min = 1e-10 * z;
    const double x_max = 1e6 * z;
    const GridPtr grid = make_geometric_grid(x_min, x_max, 4096);

    // Head [0, x_min] in closed form; both pieces are integrable there.
    const double head =
        (std::pow(x_min, k) - std::pow(z + x_min, k) + std::pow(z, k)) / k;
    double body = 0.0;
    for (std::size_t i = 0; i < grid->size(); ++i) {
        const double x = grid->node(i);
        body += grid->weight(i) *
                (std::pow(x, k - 1.0) - std::pow(z + x, k - 1.0));
    }
    // Integrand ~ (1-k) z x^{k-2} for x >> z, so the mass above x_max is
    // z x_max^{k-1} to leading order.
    const double tail = z * std::pow(x_max, k - 1.0);

    const double numeric = head + body + tail;
    if (!std::isfinite(numeric)) {
        throw NonFiniteValueError(
            "difference-integral check produced a non-finite value");
    }
    return DifferenceIntegralCheck{numeric, std::pow(z, k) / k};
}

}  // namespace coagprof
