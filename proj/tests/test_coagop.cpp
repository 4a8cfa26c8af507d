#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "coagprof/coagop.hpp"

using namespace coagprof;

namespace {

GridFunction sampled(GridPtr g, double (*fn)(double)) {
    std::vector<double> v(g->size());
    for (std::size_t i = 0; i < g->size(); ++i) v[i] = fn(g->node(i));
    return GridFunction(std::move(g), std::move(v));
}

double expneg(double y) { return std::exp(-y); }
double yexpneg(double y) { return y * std::exp(-y); }
double identity_fn(double y) { return y; }
double one_fn(double) { return 1.0; }
double square_fn(double y) { return y * y; }

// Max |f - oracle| over the window [lo, hi].
double window_error(const GridFunction& f, double (*oracle)(double), double lo, double hi) {
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double y = f.grid->node(i);
        if (y < lo || y > hi) continue;
        m = std::max(m, std::abs(f.values[i] - oracle(y)));
    }
    return m;
}

double const_kernel_C(double y) { return (y - 2.0) * std::exp(-y); }
double const_kernel_primitive(double y) { return (y - 1.0) * std::exp(-y); }

}  // namespace

TEST_CASE("constant kernel operator matches its closed form") {
    auto g = make_geometric_grid(1e-4, 40.0, 1024);
    auto k = make_kernel(0.0, 0.0);
    auto f = sampled(g, expneg);
    auto C = apply_pointwise(k, f, f);

    CHECK(window_error(C, const_kernel_C, 1e-3, 4.0) <= 2e-4);
    CHECK(interpolate(C, 1.0) == doctest::Approx(-std::exp(-1.0)).epsilon(5e-4));
    CHECK(std::abs(interpolate(C, 2.0)) <= 1e-4);
}

TEST_CASE("constant kernel operator error decays at second order") {
    auto k = make_kernel(0.0, 0.0);
    double err[2];
    std::size_t sizes[2] = {512, 1024};
    for (int t = 0; t < 2; ++t) {
        auto g = make_geometric_grid(1e-4, 40.0, sizes[t]);
        auto f = sampled(g, expneg);
        err[t] = window_error(apply_pointwise(k, f, f), const_kernel_C, 1e-3, 4.0);
    }
    CHECK(err[0] >= 3.0 * err[1]);
}

TEST_CASE("operator on the zero function is exactly zero") {
    auto g = make_geometric_grid(1e-3, 20.0, 64);
    auto k = make_kernel(-0.3, 0.5);
    GridFunction zero(g, std::vector<double>(g->size(), 0.0));
    auto f = sampled(g, yexpneg);
    auto C = apply_pointwise(k, zero, f);
    for (double v : C.values) CHECK(v == 0.0);
}

TEST_CASE("operator is symmetric to the bit and repeatable") {
    auto g = make_geometric_grid(1e-3, 30.0, 256);
    auto k = make_kernel(-0.3, 0.5);
    std::mt19937_64 rng(415u);
    std::uniform_real_distribution<double> u(0.1, 2.0);
    std::vector<double> fv(g->size(), 0.0), gv(g->size(), 0.0);
    for (std::size_t i = g->size() / 3; i < 2 * g->size() / 3; ++i) {
        fv[i] = u(rng);
        gv[i] = u(rng);
    }
    GridFunction f(g, fv), h(g, gv);
    CoagulationOperator op(g, k);
    auto a = op.apply(f, h);
    auto b = op.apply(h, f);
    auto c = op.apply(f, h);
    for (std::size_t i = 0; i < g->size(); ++i) {
        CHECK(a.values[i] == b.values[i]);
        CHECK(a.values[i] == c.values[i]);
    }
}

TEST_CASE("operator is bilinear on compactly supported inputs") {
    auto g = make_geometric_grid(1e-3, 30.0, 256);
    auto k = make_kernel(-0.3, 0.5);
    std::mt19937_64 rng(977u);
    std::uniform_real_distribution<double> u(0.1, 2.0);
    std::vector<double> fv(g->size(), 0.0), gv(g->size(), 0.0), hv(g->size(), 0.0);
    for (std::size_t i = g->size() / 3; i < 2 * g->size() / 3; ++i) {
        fv[i] = u(rng);
        gv[i] = u(rng);
        hv[i] = u(rng);
    }
    GridFunction f(g, fv), p(g, gv), q(g, hv);

    std::vector<double> comb(g->size());
    for (std::size_t i = 0; i < g->size(); ++i) comb[i] = 2.0 * gv[i] + 3.0 * hv[i];
    CoagulationOperator op(g, k);
    auto lhs = op.apply(f, GridFunction(g, comb));
    auto cp = op.apply(f, p);
    auto cq = op.apply(f, q);
    double scale = 0.0;
    for (double v : lhs.values) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < g->size(); ++i) {
        const double rhs = 2.0 * cp.values[i] + 3.0 * cq.values[i];
        CHECK(std::abs(lhs.values[i] - rhs) <= 1e-12 * scale);
    }
}

TEST_CASE("operator needs a minimally resolved grid") {
    auto g = make_geometric_grid(1e-2, 10.0, 4);
    CHECK_THROWS_AS(CoagulationOperator(g, make_kernel(0.0, 0.0)), InsufficientResolutionError);
}

TEST_CASE("negative exponents reject inputs that are singular at the lower edge") {
    auto g = make_geometric_grid(1e-4, 10.0, 256);
    auto k = make_kernel(-0.5, 0.5);
    auto f = sampled(g, [](double y) { return std::pow(y, -0.8); });
    CHECK_THROWS_AS(apply_pointwise(k, f, f), SingularIntegrandError);
    CHECK_THROWS_AS(apply_convolution(k, f, f), SingularIntegrandError);
}

TEST_CASE("weak pairing vanishes for a linear test function") {
    auto g = make_geometric_grid(1e-5, 30.0, 512);
    auto k = make_kernel(-0.5, 0.5);
    auto f = sampled(g, yexpneg);
    auto phi = sampled(make_uniform_grid(60.0, 4096), identity_fn);
    CHECK(std::abs(apply_weak(k, f, f, phi)) <= 1e-10);
}

TEST_CASE("weak pairing counts the decay in the number of clusters") {
    auto phi = sampled(make_uniform_grid(100.0, 512), one_fn);

    // a == 2, f = e^{-y}: the pairing is -(integral of f)^2 = -1.
    auto g = make_geometric_grid(1e-6, 50.0, 2048);
    auto f = sampled(g, expneg);
    CHECK(apply_weak(make_kernel(0.0, 0.0), f, f, phi) == doctest::Approx(-1.0).epsilon(1e-3));

    // Exponents (-1/2, 1/2), f = y e^{-y}: the pairing is -3 pi / 8.
    auto g2 = make_geometric_grid(1e-6, 50.0, 1024);
    auto f2 = sampled(g2, yexpneg);
    const double oracle = -3.0 * 3.14159265358979323846 / 8.0;
    CHECK(apply_weak(make_kernel(-0.5, 0.5), f2, f2, phi) ==
          doctest::Approx(oracle).epsilon(1e-3));
}

TEST_CASE("weak pairing of a quadratic test function doubles the squared mass") {
    auto g = make_geometric_grid(1e-5, 40.0, 1024);
    auto f = sampled(g, expneg);
    auto phi = sampled(make_uniform_grid(80.0, 2048), square_fn);
    const double v = apply_weak(make_kernel(0.0, 0.0), f, f, phi);
    CHECK(std::abs(v - 2.0) <= 1e-4);
}

TEST_CASE("weak pairing is symmetric in its two inputs") {
    auto g = make_geometric_grid(1e-4, 20.0, 256);
    auto k = make_kernel(-0.3, 0.3);
    auto f = sampled(g, expneg);
    auto h = sampled(g, yexpneg);
    auto phi = sampled(make_uniform_grid(40.0, 1024), square_fn);
    const double a = apply_weak(k, f, h, phi);
    const double b = apply_weak(k, h, f, phi);
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("test function readout is linear below the grid and guarded above") {
    auto phi = sampled(make_uniform_grid(10.0, 64), identity_fn);
    const double h = 10.0 / 64.0;
    CHECK(test_function_value(phi, 0.0) == doctest::Approx(0.0).epsilon(1e-13));
    CHECK(test_function_value(phi, 0.25 * h) == doctest::Approx(0.25 * h).epsilon(1e-13));
    CHECK(test_function_value(phi, 3.7) == doctest::Approx(3.7).epsilon(1e-13));
    CHECK(test_function_value(phi, 10.0) == doctest::Approx(10.0));
    CHECK_THROWS_AS(test_function_value(phi, 10.5), ExtrapolationError);
}

TEST_CASE("truncated convolution of two exponentials") {
    auto g = make_geometric_grid(1e-6, 40.0, 1024);
    auto u = sampled(g, expneg);
    auto conv = convolve(u, u);
    CHECK(window_error(conv, yexpneg, 1e-5, 4.0) <= 1e-5);
}

TEST_CASE("pointwise and convolution routes agree and tighten at refinement") {
    auto k = make_kernel(0.0, 0.0);
    double d[2];
    std::size_t sizes[2] = {512, 1024};
    for (int t = 0; t < 2; ++t) {
        auto g = make_geometric_grid(2e-3, 25.0, sizes[t]);
        auto f = sampled(g, expneg);
        auto Cp = apply_pointwise(k, f, f);
        auto Cc = apply_convolution(k, f, f);
        double m = 0.0;
        for (std::size_t i = 0; i < g->size(); ++i) {
            const double y = g->node(i);
            if (y < 2e-2 || y > 2.5) continue;
            m = std::max(m, std::abs(Cp.values[i] - Cc.values[i]));
        }
        d[t] = m;
    }
    CHECK(d[0] <= 1e-6);
    CHECK(d[0] >= 3.0 * d[1]);
}

TEST_CASE("routes agree for a mixed-exponent kernel") {
    auto k = make_kernel(-0.5, 0.5);
    double d[2];
    std::size_t sizes[2] = {512, 1024};
    for (int t = 0; t < 2; ++t) {
        auto g = make_geometric_grid(1e-4, 40.0, sizes[t]);
        auto f = sampled(g, yexpneg);
        auto Cp = apply_pointwise(k, f, f);
        auto Cc = apply_convolution(k, f, f);
        double m = 0.0;
        for (std::size_t i = 0; i < g->size(); ++i) {
            const double y = g->node(i);
            if (y < 1e-3 || y > 4.0) continue;
            m = std::max(m, std::abs(Cp.values[i] - Cc.values[i]));
        }
        d[t] = m;
    }
    CHECK(d[0] <= 1.5e-3);
    CHECK(d[0] >= 2.0 * d[1]);
}

TEST_CASE("primitive of the constant kernel operator matches its closed form") {
    auto g = make_geometric_grid(1e-6, 40.0, 1024);
    auto k = make_kernel(0.0, 0.0);
    auto f = sampled(g, expneg);
    auto P = primitive_of_C(k, f);

    CHECK(window_error(P, const_kernel_primitive, 1e-5, 4.0) <= 1.5e-4);
    CHECK(std::abs(interpolate(P, 1.0)) <= 1e-4);
    CHECK(interpolate(P, 2.0) == doctest::Approx(std::exp(-2.0)).epsilon(5e-4));
}

TEST_CASE("primitive agrees with direct tail quadrature of the operator") {
    auto g = make_geometric_grid(1e-6, 40.0, 1024);
    auto k = make_kernel(0.0, 0.0);
    auto f = sampled(g, expneg);
    auto P = primitive_of_C(k, f);
    auto C = apply_pointwise(k, f, f);
    auto T = tail_primitive(C);

    double dcross = 0.0, dder = 0.0;
    for (std::size_t i = 1; i + 1 < g->size(); ++i) {
        const double y = g->node(i);
        if (y < 1e-5 || y > 4.0) continue;
        dcross = std::max(dcross, std::abs(T.values[i] - P.values[i]));
        if (y >= 1e-2) {
            const double der = (P.values[i + 1] - P.values[i - 1]) /
                               (g->node(i + 1) - g->node(i - 1));
            dder = std::max(dder, std::abs(der + C.values[i]));
        }
    }
    CHECK(dcross <= 1.5e-4);
    CHECK(dder <= 4e-4);
}

TEST_CASE("primitive requires every kernel term to sit in the alpha-zero class") {
    auto g = make_geometric_grid(1e-4, 20.0, 128);
    auto f = sampled(g, expneg);
    CHECK_THROWS_AS(primitive_of_C(make_kernel(-0.5, 0.5), f), ClassMismatchError);
}

TEST_CASE("tail primitive reproduces the tail integral of an exponential") {
    auto g = make_geometric_grid(1e-5, 50.0, 1024);
    auto f = sampled(g, expneg);
    auto G = tail_primitive(f);
    // Tail integral of e^{-y} is e^{-y} itself.
    CHECK(window_error(G, expneg, 1e-4, 10.0) <= 1e-6);
    CHECK(moment_with_tail(f, 0.0) == doctest::Approx(1.0).epsilon(1e-4));
}
