#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <string>
#include <vector>

#include "coagprof/analyzer.hpp"
#include "coagprof/errors.hpp"
#include "coagprof/grid.hpp"
#include "coagprof/kernel.hpp"
#include "coagprof/profiles.hpp"
#include "doctest.h"

using namespace coagprof;

namespace {

// One solve per fixture for the whole binary; every check is pure.
const ProfileSolution& constant_solution() {
    static const ProfileSolution s = [] {
        SolverOptions so;
        so.grid = make_geometric_grid(1e-4, 50.0, 512);
        return solve_alpha_zero(make_kernel(0.0, 0.0), 1.0, so);
    }();
    return s;
}

const ProfileSolution& lam02_solution() {
    static const ProfileSolution s = [] {
        SolverOptions so;
        so.grid = make_geometric_grid(1e-4, 50.0, 512);
        return solve_alpha_zero(make_kernel(0.0, 0.2), 1.0, so);
    }();
    return s;
}

const ProfileSolution& neg_solution() {
    static const ProfileSolution s = [] {
        SolverOptions so;
        so.grid = make_geometric_grid(1e-3, 50.0, 512);
        return solve_alpha_neg(make_kernel(-0.5, 0.5), 1.0, so);
    }();
    return s;
}

ProfileSolution synthetic(KernelSpec k, GridFunction g) {
    ProfileSolution s;
    s.kernel = std::move(k);
    s.g = std::move(g);
    return s;
}

}  // namespace

TEST_CASE("the fitted decay exponent recovers synthetic power laws") {
    auto wide = make_geometric_grid(1e-6, 1e6, 1024);
    for (double t : {1.25, 1.35, 1.45}) {
        ProfileSolution syn = synthetic(
            make_kernel(0.0, 0.2),
            sample(wide, [&](double y) { return std::pow(y, -t); }));
        syn.tau = t;
        const Check c = check_tau_identity(syn);
        CHECK(std::abs(c.measured - t) <= 1e-3);
        CHECK(c.pass);
        // bit-identical reruns
        CHECK(check_tau_identity(syn).measured == c.measured);
    }
}

TEST_CASE("the fitted decay exponent matches the moment identity on solved profiles") {
    {
        const Check c = check_tau_identity(constant_solution());
        CHECK(c.pass);
        CHECK(std::abs(c.measured - c.expected) <= 2e-2);
        CHECK(std::abs(c.measured - c.expected) <= 5e-3);
        CHECK(std::abs(c.expected - 1.0) <= 5e-3);
    }
    {
        const Check c = check_tau_identity(lam02_solution());
        CHECK(c.pass);
        CHECK(std::abs(c.measured - c.expected) <= 5e-2);
        CHECK(std::abs(c.measured - c.expected) <= 2e-2);
    }
    const Check r = check_tau_range(lam02_solution());
    CHECK(r.pass);
    CHECK(r.measured > 1.0 - 5e-2);
    CHECK(r.measured < 1.2 + 5e-2);
}

TEST_CASE("the exponent fit demands resolution and the right class") {
    SolverOptions so;
    so.grid = make_geometric_grid(1e-4, 50.0, 32);
    ProfileSolution coarse = synthetic(
        make_kernel(0.0, 0.0), sample(so.grid, [](double y) { return std::exp(-y); }));
    CHECK_THROWS_AS((void)check_tau_identity(coarse), InsufficientResolutionError);
    CHECK_THROWS_AS((void)check_tau_identity(neg_solution()), ClassMismatchError);
    CHECK_THROWS_AS((void)check_tau_range(neg_solution()), ClassMismatchError);
}

TEST_CASE("the weighted tail primitive is ordered on solved profiles") {
    for (const ProfileSolution* s : {&constant_solution(), &lam02_solution()}) {
        const Check c = check_tail_monotonicity(*s);
        CHECK(c.pass);
        CHECK(c.measured <= 1e-6);
    }
    CHECK_THROWS_AS((void)check_tail_monotonicity(neg_solution()), ClassMismatchError);
}

TEST_CASE("a bump that breaks the tail ordering is caught and located") {
    auto grid = make_geometric_grid(1e-4, 50.0, 512);
    ProfileSolution syn = synthetic(make_kernel(0.0, 0.2), sample(grid, [](double y) {
        const double u = std::log(y);
        return std::exp(-y) + 0.05 * std::exp(-std::pow(u / 0.1, 2));
    }));
    syn.tau = 1.3;
    const Check c = check_tail_monotonicity(syn);
    CHECK_FALSE(c.pass);
    CHECK(c.measured > 1e-3);
    CHECK(c.note.find("node") != std::string::npos);

    // the zero function has nothing to order
    ProfileSolution zero = synthetic(make_kernel(0.0, 0.2),
                                     GridFunction(grid, std::vector<double>(512, 0.0)));
    const Check z = check_tail_monotonicity(zero);
    CHECK(z.pass);
    CHECK(z.measured == 0.0);
}

TEST_CASE("the origin constant is positive, flat, and ordered") {
    const Check c = check_origin_constant(neg_solution());
    CHECK(c.pass);
    CHECK(c.measured <= 1e-5);
    CHECK(c.note.find("K0") != std::string::npos);
    CHECK_THROWS_AS((void)check_origin_constant(constant_solution()),
                    ClassMismatchError);
}

TEST_CASE("an exact exponential-weight function has a constant origin read") {
    // g = e^{-Lambda} underflows below ~5e-6 on this grid; the window must
    // shift to the first resolved node and read K identically one there.
    auto deep = make_geometric_grid(1e-6, 50.0, 768);
    ProfileSolution syn =
        synthetic(make_kernel(-0.5, 0.5),
                  GridFunction(deep, std::vector<double>(768, 0.0)));
    syn.lambda_fn = neg_solution().lambda_fn;
    std::size_t zeros = 0;
    for (std::size_t i = 0; i < 768; ++i) {
        const double L = syn.lambda_fn(deep->node(i));
        syn.g.values[i] = L < 708.0 ? std::exp(-L) : 0.0;
        zeros += syn.g.values[i] == 0.0 ? 1 : 0;
    }
    REQUIRE(zeros > 0);
    const Check c = check_origin_constant(syn);
    CHECK(c.pass);
    CHECK(c.measured == 0.0);
}

TEST_CASE("the short-range exponent term drops out of the weight toward zero") {
    LambdaFunction full = neg_solution().lambda_fn;
    LambdaFunction trimmed = full;
    trimmed.M_alpha = 0.0;  // kills the y^beta contribution
    const double d8 = std::abs(std::exp(full(1e-8) - trimmed(1e-8)) - 1.0);
    const double d12 = std::abs(std::exp(full(1e-12) - trimmed(1e-12)) - 1.0);
    CHECK(d8 <= 1e-3);
    CHECK(d12 < d8);
}

TEST_CASE("underflow shrinks or destroys the origin window") {
    auto grid = make_geometric_grid(1e-3, 50.0, 256);
    ProfileSolution all_zero = synthetic(
        make_kernel(-0.5, 0.5), GridFunction(grid, std::vector<double>(256, 0.0)));
    all_zero.lambda_fn = neg_solution().lambda_fn;
    CHECK_THROWS_AS((void)check_origin_constant(all_zero), UnderflowWindowError);

    ProfileSolution top_only = all_zero;
    for (std::size_t i = 250; i < 256; ++i) {
        top_only.g.values[i] = 1e-3;
    }
    CHECK_THROWS_AS((void)check_origin_constant(top_only), UnderflowWindowError);
}

TEST_CASE("two seeds of equal mass land on the same profile") {
    auto g512 = make_geometric_grid(1e-4, 50.0, 512);
    SolverOptions su;
    su.grid = g512;
    su.tol = 1e-3;
    su.residual_tol = 5e-2;
    const GridFunction sA = sample(g512, [](double y) { return std::exp(-y); });
    const GridFunction sB = sample(g512, [](double y) {
        return 0.25 * (1.0 - std::tanh((y - 2.0) / 0.2));
    });
    const Check c = uniqueness_experiment(make_kernel(0.0, 0.0), 1.0, sA, sB, su);
    CHECK(c.pass);
    CHECK(c.measured <= 3e-3);

    const Check same = uniqueness_experiment(make_kernel(0.0, 0.0), 1.0, sA, sA, su);
    CHECK(same.measured == 0.0);
}

TEST_CASE("two seeds of equal mass agree for the boundary layer class") {
    auto ga = make_geometric_grid(1e-3, 50.0, 512);
    SolverOptions sv;
    sv.grid = ga;
    sv.tol = 1e-8;
    const GridFunction sA = sample(ga, [](double y) { return std::exp(-y); });
    const GridFunction sB =
        sample(ga, [](double y) { return y * y * std::exp(-2.0 * y); });
    const Check c = uniqueness_experiment(make_kernel(-0.5, 0.5), 1.0, sA, sB, sv);
    CHECK(c.pass);
    CHECK(c.measured <= 3e-8);
    CHECK(c.note.find("origin constants") != std::string::npos);

    CHECK_THROWS_AS(
        (void)uniqueness_experiment(make_kernel(0.3, 0.5), 1.0, sA, sB, sv),
        ClassMismatchError);
}

TEST_CASE("difference ratios stay near one for smooth profiles") {
    for (const ProfileSolution* s :
         {&constant_solution(), &lam02_solution(), &neg_solution()}) {
        const Check c = smoothness_sanity(*s);
        CHECK(c.pass);
        CHECK(c.measured <= 1.5);
    }
}

TEST_CASE("difference ratios explode on a kink or a jump") {
    auto grid = make_geometric_grid(1e-4, 50.0, 512);
    const double us = std::log(grid->node(251)) + 0.05 * std::log(grid->ratio());
    ProfileSolution corner = synthetic(make_kernel(0.0, 0.0), sample(grid, [&](double y) {
        const double u = std::log(y);
        return std::exp(-y) * (1.0 + 2.0 * std::max(0.0, u - us));
    }));
    const Check ck = smoothness_sanity(corner);
    CHECK_FALSE(ck.pass);
    CHECK(ck.measured > 5.0);

    ProfileSolution jump = synthetic(make_kernel(0.0, 0.0), sample(grid, [&](double y) {
        return std::exp(-y) * (std::log(y) > us ? 1.5 : 1.0);
    }));
    const Check cj = smoothness_sanity(jump);
    CHECK_FALSE(cj.pass);
    CHECK(cj.measured > 6.0);

    ProfileSolution zero = synthetic(make_kernel(0.0, 0.0),
                                     GridFunction(grid, std::vector<double>(512, 0.0)));
    CHECK(smoothness_sanity(zero).pass);

    ProfileSolution tiny = synthetic(
        make_kernel(0.0, 0.0),
        sample(make_geometric_grid(1e-4, 50.0, 6), [](double y) { return std::exp(-y); }));
    CHECK_THROWS_AS((void)smoothness_sanity(tiny), InsufficientResolutionError);
}

TEST_CASE("a report collects the class-appropriate checks") {
    const VerificationReport r0 = verify_profile(constant_solution(), "constant");
    REQUIRE(r0.checks.size() == 3);
    CHECK(r0.profile_id == "constant");
    CHECK(r0.checks[0].name == "tau-identity");
    CHECK(r0.checks[1].name == "tail-monotone");
    CHECK(r0.checks[2].name == "smoothness");
    CHECK(r0.all_pass());

    const VerificationReport r2 = verify_profile(lam02_solution(), "lam02");
    REQUIRE(r2.checks.size() == 4);
    CHECK(r2.checks[1].name == "tau-range");
    CHECK(r2.all_pass());

    const VerificationReport rn = verify_profile(neg_solution(), "neg");
    REQUIRE(rn.checks.size() == 2);
    CHECK(rn.checks[0].name == "origin-constant");
    CHECK(rn.all_pass());

    // reruns reproduce bit for bit
    const VerificationReport again = verify_profile(lam02_solution(), "lam02");
    for (std::size_t i = 0; i < again.checks.size(); ++i) {
        CHECK(again.checks[i].measured == r2.checks[i].measured);
    }

    ProfileSolution pos;
    pos.kernel = make_kernel(0.3, 0.4);
    pos.g = constant_solution().g;
    CHECK_THROWS_AS((void)verify_profile(pos, "pos"), ClassMismatchError);
}
