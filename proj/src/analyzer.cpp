#include "coagprof/analyzer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <limits>
#include <utility>
#include <vector>

#include "coagprof/coagop.hpp"
#include "coagprof/errors.hpp"

namespace coagprof {

namespace {

std::string text(const char* fmt, ...) {
    char buf[256];
    va_list ap;
    va_start(ap, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, ap);
    va_end(ap);
    return buf;
}

void require_class(const ProfileSolution& sol, KernelClass cls, const char* who) {
    if (sol.kernel.cls != cls) {
        throw ClassMismatchError(std::string(who) +
                                 " applies to the other kernel class");
    }
}

double rel_diff(double a, double b) {
    const double s = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / s;
}

// Floor below which a value counts as unresolved: log g in the denormal
// range carries quantization error of order 1, which exp turns into fake
// oscillation of the origin constant.
constexpr double kResolvedFloor = 1e-300;

}  // namespace

bool VerificationReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const Check& c) { return c.pass; });
}

Check check_tau_identity(const ProfileSolution& sol) {
    require_class(sol, KernelClass::alpha_zero, "the tau identity check");
    const Grid& gr = *sol.g.grid;
    const GridFunction G = tail_primitive(sol.g);
    const double lo = 2.0 * gr.y_min() * (1.0 - 1e-12);
    const double hi = 20.0 * gr.y_min() * (1.0 + 1e-12);

    std::vector<double> xs, zs;
    for (std::size_t i = 0; i < G.size(); ++i) {
        const double y = gr.node(i);
        if (y < lo || y > hi || !(G.values[i] > 0.0)) {
            continue;
        }
        xs.push_back(std::log(y));
        zs.push_back(std::log(G.values[i]));
    }
    if (xs.size() < 16) {
        throw InsufficientResolutionError(
            text("the fit decade [%g, %g] holds %zu usable nodes; 16 needed",
                 2.0 * gr.y_min(), 20.0 * gr.y_min(), xs.size()));
    }

    double xm = 0.0, zm = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        xm += xs[i];
        zm += zs[i];
    }
    xm /= static_cast<double>(xs.size());
    zm /= static_cast<double>(xs.size());
    double sxx = 0.0, sxz = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - xm) * (xs[i] - xm);
        sxz += (xs[i] - xm) * (zs[i] - zm);
    }
    const double tau_fit = 1.0 - sxz / sxx;

    Check c;
    c.name = "tau-identity";
    c.measured = tau_fit;
    c.expected = sol.tau;
    c.tolerance = 5e-2;
    c.pass = std::abs(tau_fit - sol.tau) <= c.tolerance;
    c.note = text("fitted on [%g, %g] over %zu nodes", 2.0 * gr.y_min(),
                  20.0 * gr.y_min(), xs.size());
    return c;
}

Check check_tau_range(const ProfileSolution& sol) {
    require_class(sol, KernelClass::alpha_zero, "the tau range check");
    const double cap = std::min(1.5, 1.0 + sol.kernel.lambda);
    Check c;
    c.name = "tau-range";
    c.measured = sol.tau;
    c.expected = cap;
    c.tolerance = 5e-2;
    c.pass = sol.tau >= 1.0 - c.tolerance && sol.tau <= cap + c.tolerance;
    c.note = text("admissible interval (1, %g) with slack %g", cap, c.tolerance);
    return c;
}

Check check_tail_monotonicity(const ProfileSolution& sol) {
    require_class(sol, KernelClass::alpha_zero, "the tail monotonicity check");
    const Grid& gr = *sol.g.grid;
    const GridFunction G = tail_primitive(sol.g);
    const std::size_t n = G.size();

    std::vector<double> m(n);
    double sup = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = std::pow(gr.node(i), sol.tau - 1.0) * G.values[i];
        sup = std::max(sup, std::abs(m[i]));
    }

    Check c;
    c.name = "tail-monotone";
    c.expected = 0.0;
    c.tolerance = 1e-6;
    if (sup == 0.0) {
        c.measured = 0.0;
        c.pass = true;
        c.note = "identically zero; nothing to order";
        return c;
    }
    double worst = 0.0;
    std::size_t at = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double inc = (m[i + 1] - m[i]) / sup;
        if (inc > worst) {
            worst = inc;
            at = i + 1;
        }
    }
    c.measured = worst;
    c.pass = worst <= c.tolerance;
    c.note = c.pass ? text("worst increase %.3e of sup", worst)
                    : text("violated at node %zu (y = %g)", at, gr.node(at));
    return c;
}

Check check_origin_constant(const ProfileSolution& sol) {
    require_class(sol, KernelClass::alpha_neg, "the origin constant check");
    const Grid& gr = *sol.g.grid;
    const std::size_t n = sol.g.size();

    std::size_t a = 0;
    while (a < n && !(sol.g.values[a] >= kResolvedFloor)) {
        ++a;
    }
    if (a == n) {
        throw UnderflowWindowError("every node underflowed; no window remains");
    }
    const double ya = gr.node(a);
    const double half_hi = std::sqrt(10.0) * ya;
    const double dec_hi = 10.0 * ya;
    if (half_hi > gr.y_max() * (1.0 + 1e-12)) {
        throw UnderflowWindowError(
            text("resolved values start at y = %g; [%g, %g] is less than half "
                 "a decade",
                 ya, ya, gr.y_max()));
    }

    double k_start = 0.0, k_min = std::numeric_limits<double>::infinity(),
           k_max = 0.0;
    double prev = std::numeric_limits<double>::infinity();
    double worst_inc = 0.0;
    std::size_t half_count = 0;
    bool mono = true;
    for (std::size_t i = a; i < n; ++i) {
        const double y = gr.node(i);
        if (y > dec_hi * (1.0 + 1e-12)) {
            break;
        }
        const double K = std::exp(std::log(sol.g.values[i]) + sol.lambda_fn(y));
        if (i == a) {
            k_start = K;
        }
        if (y <= half_hi * (1.0 + 1e-12)) {
            k_min = std::min(k_min, K);
            k_max = std::max(k_max, K);
            ++half_count;
        }
        if (prev < std::numeric_limits<double>::infinity() && K > prev) {
            worst_inc = std::max(worst_inc, K / prev - 1.0);
            if (K > prev * (1.0 + 1e-6)) {
                mono = false;
            }
        }
        prev = K;
    }
    if (half_count < 4) {
        throw UnderflowWindowError(
            text("only %zu resolved nodes in [%g, %g]", half_count, ya, half_hi));
    }

    Check c;
    c.name = "origin-constant";
    c.measured = k_max > 0.0 ? (k_max - k_min) / k_max : 0.0;
    c.expected = 0.0;
    c.tolerance = 5e-2;
    c.pass = mono && k_start > 0.0 && c.measured <= c.tolerance;
    c.note = text("K0 ~ %.6g at y = %g; decade [%g, %g]; worst increase %.2e",
                  k_start, ya, ya, dec_hi, worst_inc);
    return c;
}

Check uniqueness_experiment(const KernelSpec& k, double mass,
                            const GridFunction& seed_a, const GridFunction& seed_b,
                            const SolverOptions& opts) {
    SolverOptions run = opts;
    ProfileSolution s1, s2;
    switch (k.cls) {
        case KernelClass::alpha_zero:
            run.initial = seed_a;
            s1 = solve_alpha_zero(k, mass, run);
            run.initial = seed_b;
            s2 = solve_alpha_zero(k, mass, run);
            break;
        case KernelClass::alpha_neg:
            run.initial = seed_a;
            s1 = solve_alpha_neg(k, mass, run);
            run.initial = seed_b;
            s2 = solve_alpha_neg(k, mass, run);
            break;
        default:
            throw ClassMismatchError("no solver covers the positive-alpha class");
    }

    const Grid& gr = *s1.g.grid;
    double d = 0.0;
    for (std::size_t i = 0; i < s1.g.size(); ++i) {
        d += gr.weight(i) * gr.node(i) * std::abs(s1.g.values[i] - s2.g.values[i]);
    }

    Check c;
    c.name = "uniqueness";
    c.measured = d;
    c.expected = 0.0;
    c.tolerance = 3.0 * opts.tol;
    bool moments_ok = true;
    if (k.cls == KernelClass::alpha_zero) {
        const double dm = rel_diff(s1.moments.at(k.lambda).first,
                                   s2.moments.at(k.lambda).first);
        moments_ok = dm <= c.tolerance;
        c.note = text("M_lambda relative gap %.3e", dm);
    } else {
        const KernelTerm& t = k.terms.front();
        const double da =
            rel_diff(s1.moments.at(t.alpha).first, s2.moments.at(t.alpha).first);
        const double db =
            rel_diff(s1.moments.at(t.beta).first, s2.moments.at(t.beta).first);
        moments_ok = da <= c.tolerance && db <= c.tolerance;
        c.note = text("moment gaps %.3e / %.3e; origin constants %.6g / %.6g", da,
                      db, s1.K0, s2.K0);
    }
    c.pass = d <= c.tolerance && moments_ok;
    return c;
}

Check smoothness_sanity(const ProfileSolution& sol) {
    const Grid& gr = *sol.g.grid;
    const std::size_t n = sol.g.size();
    const double h = gr.kind() == GridKind::geometric ? std::log(gr.ratio())
                                                      : gr.step();
    const double lo = 10.0 * gr.y_min();
    const double hi = gr.y_max() / 10.0;
    const std::vector<double>& v = sol.g.values;

    double s2f = 0.0, s3f = 0.0;
    for (std::size_t i = 1; i + 2 < n; ++i) {
        if (gr.node(i) < lo || gr.node(i) > hi) {
            continue;
        }
        s2f = std::max(s2f, std::abs(v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h));
        s3f = std::max(
            s3f, std::abs(v[i + 2] - 3.0 * v[i + 1] + 3.0 * v[i] - v[i - 1]) /
                     (h * h * h));
    }
    // Coarse stencils live on the even-index subsample; taking both parities
    // would let a node-aligned kink look equally sharp at both resolutions.
    double s2c = 0.0, s3c = 0.0;
    bool any = false;
    const double H = 2.0 * h;
    for (std::size_t i = 2; i + 4 < n; i += 2) {
        if (gr.node(i) < lo || gr.node(i) > hi) {
            continue;
        }
        any = true;
        s2c = std::max(s2c, std::abs(v[i + 2] - 2.0 * v[i] + v[i - 2]) / (H * H));
        s3c = std::max(
            s3c, std::abs(v[i + 4] - 3.0 * v[i + 2] + 3.0 * v[i] - v[i - 2]) /
                     (H * H * H));
    }
    if (!any) {
        throw InsufficientResolutionError(
            "the trusted interval has no room for a coarse difference stencil");
    }

    auto ratio = [](double fine, double coarse) {
        if (coarse == 0.0) {
            return fine == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        }
        return fine / coarse;
    };
    const double r2 = ratio(s2f, s2c);
    const double r3 = ratio(s3f, s3c);

    Check c;
    c.name = "smoothness";
    c.measured = std::max(r2, r3);
    c.expected = 4.0;
    c.tolerance = 0.0;
    c.pass = c.measured <= 4.0;
    c.note = text("2nd/3rd difference ratios %.3f / %.3f", r2, r3);
    return c;
}

VerificationReport verify_profile(const ProfileSolution& sol,
                                  std::string profile_id) {
    VerificationReport rep;
    rep.profile_id = std::move(profile_id);
    switch (sol.kernel.cls) {
        case KernelClass::alpha_zero:
            rep.checks.push_back(check_tau_identity(sol));
            if (sol.kernel.lambda > 0.0) {
                rep.checks.push_back(check_tau_range(sol));
            }
            rep.checks.push_back(check_tail_monotonicity(sol));
            break;
        case KernelClass::alpha_neg:
            rep.checks.push_back(check_origin_constant(sol));
            break;
        default:
            throw ClassMismatchError("no checks cover the positive-alpha class");
    }
    rep.checks.push_back(smoothness_sanity(sol));
    return rep;
}

}  // namespace coagprof
