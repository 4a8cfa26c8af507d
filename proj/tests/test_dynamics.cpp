#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <limits>
#include <vector>

#include "coagprof/dynamics.hpp"
#include "coagprof/errors.hpp"
#include "coagprof/profiles.hpp"
#include "doctest.h"

using namespace coagprof;

namespace {

double l1_dist(const GridFunction& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a.grid->weight(i) * std::abs(a.values[i] - b[i]);
    return s;
}

double l11_dist(const GridFunction& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a.grid->weight(i) * a.grid->node(i) * std::abs(a.values[i] - b[i]);
    return s;
}

// relative defect of the audit identity: on-grid mass + outflux - clipped
// must return the initial mass
double mass_audit(const EvolutionState& s) {
    return std::abs(moment(s.f, 1.0) + s.outflux - s.clipped - s.mass0) /
           s.mass0;
}

}  // namespace

TEST_CASE("stepping conserves the mass audit and shrinks the cluster count") {
    auto gr = make_geometric_grid(1e-3, 5000.0, 256);
    auto k = make_kernel(0.0, 0.0);
    EvolutionState st = make_evolution_state(
        sample(gr, [](double y) { return std::exp(-y); }), 1.0);
    CHECK(st.mass0 == doctest::Approx(1.0).epsilon(1e-3));

    double m0_prev = moment(st.f, 0.0);
    while (st.t < 9.0) {
        st = step(st, 0.1 * stable_dt(st, k), k);
        CHECK(mass_audit(st) <= 1e-10);
        const double m0 = moment(st.f, 0.0);
        CHECK(m0 <= m0_prev + 1e-14);
        m0_prev = m0;
    }
    CHECK(st.clipped == 0.0);
    CHECK(st.outflux >= 0.0);
    CHECK(st.outflux <= 1e-12);
    // cluster count drops by an order of magnitude over a decade of time
    CHECK(m0_prev <= 0.2);
}

TEST_CASE("constant kernel evolution tracks the similarity solution") {
    auto gr = make_geometric_grid(1e-3, 5000.0, 256);
    auto k = make_kernel(0.0, 0.0);
    EvolutionState st = make_evolution_state(
        sample(gr, [](double y) { return std::exp(-y); }), 1.0);

    while (st.t < 99.0) {
        double dt = 0.05 * stable_dt(st, k);
        if (st.t + dt > 99.0) dt = 99.0 - st.t + 1e-12;
        st = step(st, dt, k);
    }
    CHECK(mass_audit(st) <= 1e-10);

    const double T = 1.0 + st.t;
    std::vector<double> exact(gr->size());
    for (std::size_t i = 0; i < gr->size(); ++i)
        exact[i] = std::exp(-gr->node(i) / T) / (T * T);
    CHECK(l11_dist(st.f, exact) <= 3e-2);

    GridFunction ghat = rescale_to_profile_frame(st, 0.0);
    std::vector<double> prof(gr->size());
    for (std::size_t i = 0; i < gr->size(); ++i)
        prof[i] = std::exp(-gr->node(i));
    CHECK(l11_dist(ghat, prof) <= 3e-2);
}

TEST_CASE("an empty state stays empty") {
    auto gr = make_geometric_grid(1e-3, 5000.0, 128);
    auto k = make_kernel(0.0, 0.0);
    EvolutionState st = make_evolution_state(
        GridFunction(gr, std::vector<double>(gr->size(), 0.0)), 1.0);
    CHECK(stable_dt(st, k) == std::numeric_limits<double>::infinity());
    EvolutionState s1 = step(st, 1.0, k);
    for (double v : s1.f.values) CHECK(v == 0.0);
    CHECK(s1.outflux == 0.0);
    CHECK(s1.clipped == 0.0);
}

TEST_CASE("stepping validates its inputs and its stability bound") {
    auto gr = make_geometric_grid(1e-3, 50.0, 128);
    auto k = make_kernel(0.0, 0.0);
    GridFunction f = sample(gr, [](double y) { return std::exp(-y); });

    CHECK_THROWS_AS(make_evolution_state(f, 0.0), InvalidRangeError);
    GridFunction bad = f;
    bad.values[3] = -1.0;
    CHECK_THROWS_AS(make_evolution_state(bad, 1.0), InvalidInitialization);

    EvolutionState st = make_evolution_state(f, 1.0);
    CHECK_THROWS_AS(step(st, 0.0, k), InvalidRangeError);
    CHECK_THROWS_AS(step(st, -0.5, k), InvalidRangeError);
    CHECK_THROWS_AS(step(st, 1.2 * stable_dt(st, k), k),
                    StabilityViolationError);
    CHECK_NOTHROW(step(st, 0.9 * stable_dt(st, k), k));
}

TEST_CASE("frame rescaling inverts self-similar data") {
    auto gr = make_geometric_grid(1e-3, 5000.0, 256);
    for (double lam : {0.4, -0.4}) {
        for (double t : {0.0, 3.0, 42.0}) {
            const double T = 1.0 + t;
            const double p = std::pow(T, -1.0 / (1.0 - lam));
            EvolutionState st;
            st.f = sample(gr, [&](double y) {
                return p * p * std::exp(-p * y);
            });
            st.t = t;
            st.t0 = 1.0;
            GridFunction gh = rescale_to_profile_frame(st, lam);
            double sup = 0.0;
            for (std::size_t i = 0; i < gr->size(); ++i)
                sup = std::max(sup, std::abs(gh.values[i] -
                                             std::exp(-gr->node(i))));
            CHECK(sup <= 1e-3);
        }
    }

    EvolutionState st;
    st.f = sample(gr, [](double) { return 0.0; });
    st.t = 0.0;
    CHECK_THROWS_AS(rescale_to_profile_frame(st, 1.0), InvalidRangeError);
    CHECK_THROWS_AS(rescale_to_profile_frame(st, -1.5), InvalidRangeError);
    st.t = -2.0;
    CHECK_THROWS_AS(rescale_to_profile_frame(st, 0.0), InvalidRangeError);
}

TEST_CASE("relaxation finds the constant kernel profile") {
    auto k = make_kernel(0.0, 0.0);

    auto gr = make_geometric_grid(1e-4, 50.0, 512);
    SolverOptions o;
    o.grid = gr;
    o.residual_tol = 1.5e-2;
    o.max_iter = 1500;
    ProfileSolution s = relax_to_profile(
        k, sample(gr, [](double y) { return 2.0 * std::exp(-2.0 * y); }), o);
    CHECK(!s.degenerate);
    CHECK(s.iterations <= 400);
    CHECK(s.residual <= 1.5e-2);
    CHECK(s.moments.at(1.0).first == doctest::Approx(1.0).epsilon(1e-12));
    std::vector<double> ex(gr->size());
    for (std::size_t i = 0; i < gr->size(); ++i)
        ex[i] = std::exp(-gr->node(i));
    CHECK(l1_dist(s.g, ex) <= 4e-2);
    CHECK(l11_dist(s.g, ex) <= 4e-2);
    CHECK(std::abs(s.tau - 1.0) <= 2e-2);

    // refinement tightens the landing point
    auto gr2 = make_geometric_grid(1e-4, 50.0, 1024);
    SolverOptions o2;
    o2.grid = gr2;
    o2.residual_tol = 7e-3;
    o2.max_iter = 1500;
    ProfileSolution s2 = relax_to_profile(
        k, sample(gr2, [](double y) { return 2.0 * std::exp(-2.0 * y); }), o2);
    std::vector<double> ex2(gr2->size());
    for (std::size_t i = 0; i < gr2->size(); ++i)
        ex2[i] = std::exp(-gr2->node(i));
    CHECK(l1_dist(s2.g, ex2) <= 3e-2);
    CHECK(l11_dist(s2.g, ex2) <= 2e-2);
}

TEST_CASE("relaxation agrees with the boundary layer solver") {
    auto gr = make_geometric_grid(1e-3, 50.0, 512);
    auto k = make_kernel(-0.5, 0.5);
    SolverOptions o;
    o.grid = gr;
    o.max_iter = 2000;
    ProfileSolution rel = relax_to_profile(
        k, sample(gr, [](double y) { return y * std::exp(-1.5 * y); }), o);
    CHECK(rel.iterations <= 600);
    CHECK(rel.residual <= 1e-2);

    ProfileSolution ref = solve_alpha_neg(k, 1.0, o);
    double l11 = 0.0;
    for (std::size_t i = 0; i < gr->size(); ++i)
        l11 += gr->weight(i) * gr->node(i) *
               std::abs(rel.g.values[i] - ref.g.values[i]);
    CHECK(l11 <= 8e-2);
    CHECK(rel.moments.at(-0.5).first ==
          doctest::Approx(ref.moments.at(-0.5).first).epsilon(6e-2));
    CHECK(rel.moments.at(0.5).first ==
          doctest::Approx(ref.moments.at(0.5).first).epsilon(3e-2));
}

TEST_CASE("an exact profile seed exits the relaxation immediately") {
    auto k = make_kernel(0.0, 0.0);

    auto gr = make_geometric_grid(1e-4, 50.0, 512);
    SolverOptions o;
    o.grid = gr;
    ProfileSolution s = relax_to_profile(
        k, sample(gr, [](double y) { return std::exp(-y); }), o);
    CHECK(s.iterations == 0);
    CHECK(s.residual <= 3e-4);

    // uniform-grid entry path
    auto gu = make_uniform_grid(16.0, 256);
    SolverOptions ou;
    ou.grid = gu;
    ProfileSolution su = relax_to_profile(
        k, sample(gu, [](double y) { return std::exp(-y); }), ou);
    CHECK(su.iterations == 0);
    CHECK(su.moments.at(1.0).first == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("relaxation validates seeds and budgets") {
    auto gr = make_geometric_grid(1e-3, 50.0, 128);
    auto k = make_kernel(0.0, 0.0);
    SolverOptions o;
    o.grid = gr;

    GridFunction zero(gr, std::vector<double>(gr->size(), 0.0));
    ProfileSolution s = relax_to_profile(k, zero, o);
    CHECK(s.degenerate);
    CHECK(s.iterations == 0);
    CHECK(s.residual == 0.0);
    for (double v : s.g.values) CHECK(v == 0.0);

    GridFunction bad = sample(gr, [](double y) { return std::exp(-y); });
    bad.values[5] = -1e-3;
    CHECK_THROWS_AS(relax_to_profile(k, bad, o), InvalidInitialization);
    bad.values[5] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(relax_to_profile(k, bad, o), InvalidInitialization);

    auto other = make_geometric_grid(1e-3, 50.0, 64);
    SolverOptions om;
    om.grid = other;
    CHECK_THROWS_AS(relax_to_profile(
                        k, sample(gr, [](double y) { return std::exp(-y); }), om),
                    InvalidRangeError);

    SolverOptions ob;
    ob.grid = gr;
    ob.residual_tol = 1e-9;
    ob.max_iter = 8;
    CHECK_THROWS_AS(relax_to_profile(
                        k, sample(gr, [](double y) { return std::exp(-y); }), ob),
                    ConvergenceError);
}
