#include "coagprof/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "coagprof/coagop.hpp"
#include "coagprof/errors.hpp"

namespace coagprof {

namespace {

double power(double y, double e) { return e == 0.0 ? 1.0 : std::pow(y, e); }

std::size_t anchor_index(const Grid& g, double y_a) {
    std::size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double d = std::abs(g.node(i) - y_a);
        if (d < bd) {
            bd = d;
            best = i;
        }
    }
    if (bd > 1e-9 * std::max(std::abs(y_a), g.node(best))) {
        throw InvalidRangeError("anchor must sit on a grid node");
    }
    return best;
}

// d/dy through the grid coordinate (log y on geometric grids), second order
// with one-sided stencils at the edges.
std::vector<double> ddy(const Grid& gr, const std::vector<double>& v) {
    const std::size_t n = v.size();
    if (n < 3) {
        throw InsufficientResolutionError("derivative needs at least 3 grid nodes");
    }
    std::vector<double> out(n);
    if (gr.kind() == GridKind::geometric) {
        const double lr = std::log(gr.ratio());
        out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * lr * gr.node(0));
        for (std::size_t i = 1; i + 1 < n; ++i) {
            out[i] = (v[i + 1] - v[i - 1]) / (2.0 * lr * gr.node(i));
        }
        out[n - 1] =
            (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * lr * gr.node(n - 1));
    } else {
        const double h = gr.step();
        out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            out[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
        }
        out[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    }
    return out;
}

void require_options(const SolverOptions& opts, double mass) {
    if (!(mass > 0.0)) {
        throw InvalidRangeError("target mass must be positive");
    }
    if (!opts.grid) {
        throw InvalidRangeError("solver options must carry a grid");
    }
    if (!(opts.damping > 0.0 && opts.damping <= 1.0)) {
        throw InvalidRangeError("damping must lie in (0, 1]");
    }
}

GridFunction seed_iterate(const SolverOptions& opts, double mass,
                          const std::function<double(double)>& shape) {
    GridFunction g0;
    if (opts.initial) {
        const GridFunction& in = *opts.initial;
        if (!in.grid || !in.grid->same_nodes_as(*opts.grid)) {
            throw InvalidInitialization("the seed iterate must live on the solver grid");
        }
        for (double v : in.values) {
            if (!std::isfinite(v) || v < 0.0) {
                throw InvalidInitialization(
                    "the seed iterate must be nonnegative and finite");
            }
        }
        g0 = in;
    } else {
        g0 = sample(opts.grid, shape);
    }
    const double m1 = moment(g0, 1.0);
    if (!(m1 > 0.0)) {
        throw InvalidInitialization("the seed iterate carries no mass");
    }
    const double s = mass / m1;
    for (double& v : g0.values) {
        v *= s;
    }
    return g0;
}

}  // namespace

// Populates every diagnostic field from sol.g and sol.kernel. Shared by the
// solvers and by rescaling, so a rescaled solution is rejudged from scratch
// rather than by transforming the original's numbers.
void detail::finalize_solution(ProfileSolution& sol) {
    const KernelSpec& k = sol.kernel;
    const GridFunction& g = sol.g;
    const Grid& gr = *g.grid;

    sol.moments.clear();
    auto put = [&](double e) {
        sol.moments[e] = {moment(g, e), moment_tail_estimate(g, e)};
    };
    put(1.0);
    put(k.lambda);
    for (const auto& t : k.terms) {
        put(t.alpha);
        put(t.beta);
    }

    const double lo = 10.0 * gr.y_min();
    const double hi = gr.y_max() / 10.0;

    if (k.cls == KernelClass::alpha_zero) {
        double ml = 0.0;
        for (const auto& t : k.terms) {
            ml += t.weight * moment_with_tail(g, t.beta);
        }
        sol.tau = 2.0 - (1.0 - k.lambda) * ml;
        const GridFunction G = tail_primitive(g);
        std::size_t j = 0;
        while (j + 1 < g.size() && gr.node(j) < lo) {
            ++j;
        }
        sol.K0 = power(gr.node(j), sol.tau - 1.0) * G.values[j];
        const double cap = std::min(1.5, 1.0 + k.lambda);
        sol.tau_in_range = sol.tau >= 1.0 - 0.05 && sol.tau <= cap + 0.05;
        sol.monotone = true;
    } else {
        const KernelTerm& t = k.terms.front();
        sol.tau = 0.0;
        sol.tau_in_range = true;
        sol.lambda_fn =
            LambdaFunction{t.alpha,
                           t.beta,
                           t.weight,
                           k.lambda,
                           moment_with_tail(g, t.alpha),
                           moment_with_tail(g, t.beta),
                           t.beta == 0.0};
        // K = g e^Lambda read in log space on the trusted nodes; the value
        // nearest the lower edge estimates K0 and the sequence must not
        // increase beyond relative slack.
        double prev = std::numeric_limits<double>::infinity();
        bool mono = true;
        bool k0set = false;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double y = gr.node(i);
            if (y < lo || y > hi || !(g.values[i] > 0.0)) {
                continue;
            }
            const double log_k = std::log(g.values[i]) + sol.lambda_fn(y);
            if (!k0set) {
                sol.K0 = std::exp(log_k);
                k0set = true;
            }
            if (log_k > prev + 1e-6) {
                mono = false;
            }
            prev = log_k;
        }
        if (!k0set) {
            sol.K0 = 0.0;
        }
        sol.monotone = mono;
    }

    // Scalar residual: trusted sup of the equation defect divided by the
    // trusted sup of the equation's own terms. The raw defect scales with g
    // (for singular profiles it is dominated by the edge, where g blows up),
    // so only this ratio is scale-meaningful; it is also invariant under the
    // scaling family, where the raw defect picks up a factor mu^{1+lambda}.
    const GridFunction raw = residual(sol);
    const GridFunction C = apply_pointwise(k, g, g);
    const std::vector<double> gp = ddy(gr, g.values);
    double rsup = 0.0, smax = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double y = gr.node(i);
        if (y < lo || y > hi) {
            continue;
        }
        const double scale = 2.0 * g.values[i] + std::abs(y * gp[i]) +
                             (1.0 - k.lambda) * std::abs(C.values[i]);
        smax = std::max(smax, scale);
        rsup = std::max(rsup, std::abs(raw.values[i]));
    }
    sol.residual = smax > 0.0 ? rsup / smax : 0.0;
}

double LambdaFunction::operator()(double y) const {
    const double c = (1.0 - lambda) * weight;
    if (beta_is_zero) {
        return (2.0 - c * M_alpha) * std::log(y) -
               c * M_beta * std::pow(y, alpha) / alpha;
    }
    return 2.0 * std::log(y) - c * (M_beta * std::pow(y, alpha) / alpha +
                                    M_alpha * std::pow(y, beta) / beta);
}

GridFunction ode_solve(const GridFunction& mu, const GridFunction& h, double y_a,
                       double g_a) {
    if (!mu.grid || !h.grid || !mu.grid->same_nodes_as(*h.grid)) {
        throw InvalidRangeError("mu and h must share one grid");
    }
    const Grid& gr = *mu.grid;
    const std::size_t n = gr.size();
    const std::size_t ia = anchor_index(gr, y_a);

    std::vector<double> out(n, 0.0);
    out[ia] = g_a;
    // The integrating factor enters only as exp of the per-cell increment of
    // Lambda = int mu/y, so nothing blows up unless the solution itself does.
    for (std::size_t i = ia + 1; i < n; ++i) {
        const double ya = gr.node(i - 1), yb = gr.node(i);
        const double dy = yb - ya;
        const double delta = 0.5 * dy * (mu.values[i - 1] / ya + mu.values[i] / yb);
        const double e = std::exp(-delta);
        out[i] = e * out[i - 1] +
                 0.5 * dy * (e * h.values[i - 1] / ya + h.values[i] / yb);
    }
    for (std::size_t i = ia; i-- > 0;) {
        const double ya = gr.node(i), yb = gr.node(i + 1);
        const double dy = yb - ya;
        const double delta = 0.5 * dy * (mu.values[i] / ya + mu.values[i + 1] / yb);
        const double e = std::exp(delta);
        out[i] = e * out[i + 1] -
                 0.5 * dy * (h.values[i] / ya + e * h.values[i + 1] / yb);
    }
    for (double v : out) {
        if (!std::isfinite(v)) {
            throw OverflowGuardError("ode solution left the representable range");
        }
    }
    return GridFunction(mu.grid, std::move(out));
}

ProfileSolution solve_alpha_zero(const KernelSpec& k, double mass,
                                 const SolverOptions& opts) {
    if (k.cls != KernelClass::alpha_zero) {
        throw ClassMismatchError("solve_alpha_zero needs an alpha-zero kernel");
    }
    for (const auto& t : k.terms) {
        if (t.alpha != 0.0) {
            throw ClassMismatchError(
                "solve_alpha_zero needs every kernel term to have alpha = 0");
        }
    }
    require_options(opts, mass);
    const Grid& gr = *opts.grid;
    const std::size_t n = gr.size();
    const double lam = k.lambda;
    const double c1 = 1.0 - lam;
    const double om = opts.damping;

    // Mildly singular seed: the true profile behaves like y^-tau at 0 with
    // tau in (1, 1+lambda), so start halfway into that band.
    GridFunction g = seed_iterate(opts, mass, [lam](double y) {
        return std::pow(y, -(1.0 + 0.5 * lam)) * std::exp(-y);
    });

    bool converged = false;
    std::size_t iters = 0;
    for (std::size_t it = 0; it < opts.max_iter && !converged; ++it) {
        double ml = 0.0;
        for (const auto& t : k.terms) {
            ml += t.weight * moment_with_tail(g, t.beta);
        }
        const double tau = 2.0 - c1 * ml;

        const GridFunction G = tail_primitive(g);
        std::vector<double> hv(n, 0.0);
        for (const auto& t : k.terms) {
            std::vector<double> vb(n);
            for (std::size_t i = 0; i < n; ++i) {
                vb[i] = power(gr.node(i), t.beta) * g.values[i];
            }
            const GridFunction conv = convolve(G, GridFunction(opts.grid, vb));
            for (std::size_t i = 0; i < n; ++i) {
                hv[i] += c1 * t.weight * conv.values[i];
            }
        }

        std::vector<double> q(n);
        for (std::size_t i = 0; i < n; ++i) {
            q[i] = power(gr.node(i), tau - 2.0) * hv[i];
        }
        const GridFunction K = tail_primitive(GridFunction(opts.grid, std::move(q)));
        std::vector<double> Gn(n);
        for (std::size_t i = 0; i < n; ++i) {
            Gn[i] = power(gr.node(i), 1.0 - tau) * K.values[i];
        }

        std::vector<double> gh = ddy(gr, Gn);
        for (double& v : gh) {
            v = std::max(0.0, -v);
        }
        GridFunction ghf(opts.grid, std::move(gh));
        // Normalization anchors on the on-grid moment. The tail estimate is a
        // reporting device; feeding it back here lets a distorted top decade
        // fake off-grid mass and park the iteration at the wrong amplitude.
        const double m1 = moment(ghf, 1.0);
        if (!std::isfinite(m1) || !(m1 > 0.0)) {
            throw ConvergenceError("alpha-zero iteration collapsed to zero mass");
        }
        const double s = mass / m1;

        double change = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double nv = (1.0 - om) * g.values[i] + om * s * ghf.values[i];
            change += gr.weight(i) * gr.node(i) * std::abs(nv - g.values[i]);
            g.values[i] = nv;
        }
        change /= mass;
        iters = it + 1;
        converged = change < opts.tol;
    }
    ProfileSolution sol;
    sol.g = std::move(g);
    sol.kernel = k;
    sol.iterations = iters;
    detail::finalize_solution(sol);
    if (!converged) {
        throw SolverStallError(
            "alpha-zero profile iteration did not meet its tolerance in " +
                std::to_string(opts.max_iter) + " sweeps",
            std::move(sol));
    }
    if (sol.residual > opts.residual_tol) {
        const std::string what =
            "alpha-zero profile converged in L1 but its residual " +
            std::to_string(sol.residual) + " exceeds the declared bar";
        throw SolverStallError(what, std::move(sol));
    }
    return sol;
}

ProfileSolution solve_alpha_neg(const KernelSpec& k, double mass,
                                const SolverOptions& opts) {
    if (k.cls != KernelClass::alpha_neg) {
        throw ClassMismatchError("solve_alpha_neg needs a negative-alpha kernel");
    }
    if (k.terms.size() != 1) {
        throw ClassMismatchError("solve_alpha_neg handles a single kernel term");
    }
    require_options(opts, mass);
    const KernelTerm& t = k.terms.front();
    const Grid& gr = *opts.grid;
    const std::size_t n = gr.size();
    const double lam = k.lambda;
    const double c1 = 1.0 - lam;
    const double om = opts.damping;

    GridFunction g =
        seed_iterate(opts, mass, [](double y) { return std::exp(-y); });

    bool converged = false;
    std::size_t iters = 0;
    for (std::size_t it = 0; it < opts.max_iter && !converged; ++it) {
        const double ma = moment_with_tail(g, t.alpha);
        const double mb = moment_with_tail(g, t.beta);
        const LambdaFunction L{t.alpha, t.beta,         t.weight, lam,
                               ma,      mb,             t.beta == 0.0};

        std::vector<double> u(n), v(n);
        for (std::size_t i = 0; i < n; ++i) {
            u[i] = power(gr.node(i), t.alpha) * g.values[i];
            v[i] = power(gr.node(i), t.beta) * g.values[i];
        }
        const GridFunction conv =
            convolve(GridFunction(opts.grid, std::move(u)),
                     GridFunction(opts.grid, std::move(v)));
        // h = -(1-lambda) w conv is nonpositive; carry its magnitude so the
        // sweep below accumulates only positive quantities.
        std::vector<double> hneg(n);
        for (std::size_t i = 0; i < n; ++i) {
            hneg[i] = c1 * t.weight * conv.values[i];
        }

        std::vector<double> lamv(n);
        for (std::size_t i = 0; i < n; ++i) {
            lamv[i] = L(gr.node(i));
        }

        // One backward sweep from y_max: homogeneous factor A (value 1 at the
        // top) and particular part B (value 0 there). Anchoring at the top
        // keeps both positive and cancellation-free; toward 0 they underflow
        // to exact 0 together with the profile. The free constant kappa is
        // then fixed by the mass target.
        std::vector<double> A(n), B(n);
        A[n - 1] = 1.0;
        B[n - 1] = 0.0;
        for (std::size_t i = n - 1; i-- > 0;) {
            const double ya = gr.node(i), yb = gr.node(i + 1);
            const double dy = yb - ya;
            const double delta = lamv[i + 1] - lamv[i];
            const double e = std::exp(delta);
            A[i] = e * A[i + 1];
            B[i] = e * B[i + 1] +
                   0.5 * dy * (hneg[i] / ya + e * hneg[i + 1] / yb);
        }
        double m1A = 0.0, m1B = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            m1A += gr.weight(i) * gr.node(i) * A[i];
            m1B += gr.weight(i) * gr.node(i) * B[i];
        }
        if (!std::isfinite(m1A) || !std::isfinite(m1B) || !(m1A > 0.0)) {
            throw OverflowGuardError(
                "negative-alpha sweep left the representable range");
        }
        const double kappa = std::max(0.0, (mass - m1B) / m1A);

        std::vector<double> gh(n);
        for (std::size_t i = 0; i < n; ++i) {
            gh[i] = kappa * A[i] + B[i];
        }
        GridFunction ghf(opts.grid, std::move(gh));
        // On-grid anchor, for the same reason as in the alpha-zero sweep: a
        // tail estimate in this denominator opens a spurious equilibrium at a
        // fraction of the target mass.
        const double m1 = moment(ghf, 1.0);
        if (!std::isfinite(m1) || !(m1 > 0.0)) {
            throw ConvergenceError("negative-alpha iteration collapsed to zero mass");
        }
        const double s = mass / m1;

        double change = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double nv = (1.0 - om) * g.values[i] + om * s * ghf.values[i];
            change += gr.weight(i) * gr.node(i) * std::abs(nv - g.values[i]);
            g.values[i] = nv;
        }
        change /= mass;
        iters = it + 1;
        converged = change < opts.tol;
    }
    ProfileSolution sol;
    sol.g = std::move(g);
    sol.kernel = k;
    sol.iterations = iters;
    detail::finalize_solution(sol);
    if (!converged) {
        throw SolverStallError(
            "negative-alpha profile iteration did not meet its tolerance in " +
                std::to_string(opts.max_iter) + " sweeps",
            std::move(sol));
    }
    if (sol.residual > opts.residual_tol) {
        const std::string what =
            "negative-alpha profile converged in L1 but its residual " +
            std::to_string(sol.residual) + " exceeds the declared bar";
        throw SolverStallError(what, std::move(sol));
    }
    return sol;
}

ProfileSolution rescale_profile(const ProfileSolution& sol, double mu) {
    if (!(mu > 0.0)) {
        throw InvalidRangeError("rescaling factor must be positive");
    }
    if (mu == 1.0) {
        return sol;
    }
    const double lam = sol.kernel.lambda;
    const double s = std::pow(mu, 1.0 + lam);
    const Grid& gr = *sol.g.grid;
    std::vector<double> v(gr.size());
    for (std::size_t i = 0; i < gr.size(); ++i) {
        v[i] = s * interpolate(sol.g, mu * gr.node(i), true);
    }
    ProfileSolution out;
    out.g = GridFunction(sol.g.grid, std::move(v));
    out.kernel = sol.kernel;
    out.iterations = sol.iterations;
    detail::finalize_solution(out);
    return out;
}

GridFunction residual(const ProfileSolution& sol) {
    const GridFunction& g = sol.g;
    const Grid& gr = *g.grid;
    const GridFunction C = apply_pointwise(sol.kernel, g, g);
    const std::vector<double> gp = ddy(gr, g.values);
    std::vector<double> out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        out[i] = 2.0 * g.values[i] + gr.node(i) * gp[i] +
                 (1.0 - sol.kernel.lambda) * C.values[i];
    }
    return GridFunction(g.grid, std::move(out));
}

double trusted_sup(const GridFunction& f) {
    const Grid& gr = *f.grid;
    const double lo = 10.0 * gr.y_min();
    const double hi = gr.y_max() / 10.0;
    double m = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double y = gr.node(i);
        if (y < lo || y > hi) {
            continue;
        }
        any = true;
        m = std::max(m, std::abs(f.values[i]));
    }
    if (!any) {
        throw InsufficientResolutionError("trusted interval holds no grid nodes");
    }
    return m;
}

}  // namespace coagprof
