#include "coagprof/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "coagprof/coagop.hpp"
#include "coagprof/errors.hpp"

namespace coagprof {

namespace {

double power(double y, double e) { return e == 0.0 ? 1.0 : std::pow(y, e); }

// Per-particle merge rate  int a(y_i, z) f(z) dz  at every node, with plain
// on-grid moments standing in for the integrals.
std::vector<double> loss_rate(const GridFunction& f, const KernelSpec& k) {
    const Grid& gr = *f.grid;
    std::vector<double> L(f.size(), 0.0);
    for (const auto& t : k.terms) {
        const double Ma = moment(f, t.alpha);
        const double Mb = moment(f, t.beta);
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double y = gr.node(i);
            L[i] += t.weight * (power(y, t.alpha) * Mb + power(y, t.beta) * Ma);
        }
    }
    return L;
}

}  // namespace

EvolutionState make_evolution_state(GridFunction f, double t0) {
    if (!std::isfinite(t0) || !(t0 > 0.0)) {
        throw InvalidRangeError("the frame offset t0 must be positive and finite");
    }
    if (!f.grid) {
        throw InvalidRangeError("an evolution state needs a grid");
    }
    for (double v : f.values) {
        if (!std::isfinite(v) || v < 0.0) {
            throw InvalidInitialization(
                "the initial density must be nonnegative and finite");
        }
    }
    EvolutionState s;
    s.mass0 = moment(f, 1.0);
    s.f = std::move(f);
    s.t0 = t0;
    return s;
}

double stable_dt(const EvolutionState& state, const KernelSpec& k) {
    if (!state.f.grid) {
        throw InvalidRangeError("an evolution state needs a grid");
    }
    const std::vector<double> L = loss_rate(state.f, k);
    const double m = *std::max_element(L.begin(), L.end());
    if (!(m > 0.0)) {
        return std::numeric_limits<double>::infinity();
    }
    return 0.9 / m;
}

EvolutionState step(const EvolutionState& state, double dt, const KernelSpec& k) {
    if (!state.f.grid) {
        throw InvalidRangeError("an evolution state needs a grid");
    }
    if (!std::isfinite(dt) || !(dt > 0.0)) {
        throw InvalidRangeError("the time step must be positive and finite");
    }
    const Grid& gr = *state.f.grid;
    const std::size_t n = gr.size();
    const std::vector<double>& ys = gr.nodes();
    const GridFunction& f = state.f;

    const std::vector<double> L = loss_rate(f, k);
    const double max_rate = *std::max_element(L.begin(), L.end());
    if (dt * max_rate >= 1.0) {
        throw StabilityViolationError(
            "the time step exceeds the inverse of the largest merge rate");
    }

    // Suffix partner sums per term exponent: S_e[l0] = sum_{l >= l0} of
    // w_l y_l^e f_l, so the partners above any cutoff cost one lookup.
    const std::size_t nt = k.terms.size();
    std::vector<std::vector<double>> suf_a(nt), suf_b(nt);
    std::vector<std::vector<double>> pow_a(nt), pow_b(nt);
    for (std::size_t t = 0; t < nt; ++t) {
        const KernelTerm& kt = k.terms[t];
        pow_a[t].resize(n);
        pow_b[t].resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            pow_a[t][i] = power(ys[i], kt.alpha);
            pow_b[t][i] = power(ys[i], kt.beta);
        }
        suf_a[t].assign(n + 1, 0.0);
        suf_b[t].assign(n + 1, 0.0);
        for (std::size_t i = n; i-- > 0;) {
            const double wf = gr.weight(i) * f.values[i];
            suf_a[t][i] = suf_a[t][i + 1] + pow_a[t][i] * wf;
            suf_b[t][i] = suf_b[t][i + 1] + pow_b[t][i] * wf;
        }
    }
    auto first_above = [&](double s) -> std::size_t {
        if (s < ys.front()) return 0;
        return static_cast<std::size_t>(
            std::upper_bound(ys.begin(), ys.end(), s) - ys.begin());
    };

    // Mass parcels and the mass current through each dual-cell edge. The
    // current through b counts every pair whose merge product crosses b:
    // J(b) = sum over parcels at or below b of parcel mass times the merge
    // rate with partners large enough to clear b. The last edge sits at the
    // top node itself, so every merge of the top parcel leaves the system.
    std::vector<double> mass(n);
    for (std::size_t i = 0; i < n; ++i) {
        mass[i] = gr.weight(i) * ys[i] * f.values[i];
    }
    std::vector<double> J(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double b = (i + 1 < n) ? 0.5 * (ys[i] + ys[i + 1]) : ys[n - 1];
        double acc = 0.0;
        for (std::size_t j = 0; j <= i; ++j) {
            if (mass[j] == 0.0) continue;
            const std::size_t l0 = first_above(b - ys[j]);
            double rate = 0.0;
            for (std::size_t t = 0; t < nt; ++t) {
                rate += k.terms[t].weight * (pow_a[t][j] * suf_b[t][l0] +
                                             pow_b[t][j] * suf_a[t][l0]);
            }
            acc += mass[j] * rate;
        }
        J[i] = acc;
    }

    // Flux-difference update on the parcels; interior transfers telescope,
    // so the audit identity  on-grid mass + outflux - clipped = mass0  holds
    // to roundoff. The merge-rate bound above also bounds each cell's net
    // drain, so clipping only ever absorbs roundoff-level negatives.
    EvolutionState out = state;
    out.t = state.t + dt;
    out.outflux = state.outflux + dt * J[n - 1];
    for (std::size_t i = 0; i < n; ++i) {
        double m = mass[i] - dt * (J[i] - (i > 0 ? J[i - 1] : 0.0));
        if (m < 0.0) {
            out.clipped += -m;
            m = 0.0;
        }
        out.f.values[i] = m / (gr.weight(i) * ys[i]);
        if (!std::isfinite(out.f.values[i])) {
            throw NonFiniteValueError("the density left the finite range");
        }
    }
    return out;
}

GridFunction rescale_to_profile_frame(const EvolutionState& state, double lambda) {
    if (!(lambda > -1.0) || !(lambda < 1.0)) {
        throw InvalidRangeError("lambda must lie in (-1, 1)");
    }
    if (!state.f.grid) {
        throw InvalidRangeError("an evolution state needs a grid");
    }
    const double T = state.t0 + state.t;
    if (!(T > 0.0)) {
        throw InvalidRangeError("the frame time t0 + t must be positive");
    }
    const double p = std::pow(T, -1.0 / (1.0 - lambda));
    const double q = p * p;
    const Grid& gr = *state.f.grid;
    GridFunction out(state.f.grid, std::vector<double>(gr.size(), 0.0));
    for (std::size_t i = 0; i < gr.size(); ++i) {
        out.values[i] = interpolate(state.f, gr.node(i) / p, true) / q;
    }
    return out;
}

ProfileSolution relax_to_profile(const KernelSpec& k, const GridFunction& g0,
                                 const SolverOptions& opts) {
    if (!g0.grid) {
        throw InvalidInitialization("the seed iterate must live on a grid");
    }
    if (opts.grid && !opts.grid->same_nodes_as(*g0.grid)) {
        throw InvalidRangeError("the options grid disagrees with the seed grid");
    }
    for (double v : g0.values) {
        if (!std::isfinite(v) || v < 0.0) {
            throw InvalidInitialization(
                "the seed iterate must be nonnegative and finite");
        }
    }
    const double seed_mass = moment(g0, 1.0);
    if (seed_mass == 0.0) {
        ProfileSolution sol;
        sol.g = g0;
        sol.kernel = k;
        detail::finalize_solution(sol);
        sol.iterations = 0;
        sol.degenerate = true;
        return sol;
    }

    const Grid& gr = *g0.grid;
    const std::size_t n = gr.size();
    const std::vector<double>& ys = gr.nodes();
    const bool geometric = gr.kind() == GridKind::geometric;
    const double lnr = geometric ? std::log(ys[1] / ys[0]) : 0.0;
    const double dy = geometric ? 0.0 : ys[1] - ys[0];
    // Unit Courant number for the transport part: on a geometric grid the
    // upwind difference at dt = log(ratio) shifts nodes exactly, so the step
    // adds no transport diffusion beyond what the spatial stencil carries.
    const double adv_cap = geometric ? lnr : 0.9 * dy / ys[n - 1];
    const double c = 1.0 - k.lambda;

    GridFunction g = g0;
    for (double& v : g.values) v /= seed_mass;

    const CoagulationOperator op(g0.grid, k);
    std::vector<double> next(n);
    const std::size_t check_every = 16;
    auto packaged = [&](std::size_t steps) {
        ProfileSolution sol;
        sol.g = g;
        sol.kernel = k;
        detail::finalize_solution(sol);
        sol.iterations = steps;
        return sol;
    };
    for (std::size_t steps = 0;; ++steps) {
        if (steps % check_every == 0 || steps == opts.max_iter) {
            ProfileSolution sol = packaged(steps);
            if (sol.residual < opts.residual_tol) {
                return sol;
            }
            if (steps == opts.max_iter) {
                throw SolverStallError(
                    "pseudo-time relaxation did not meet the residual bar in " +
                        std::to_string(opts.max_iter) + " steps",
                    std::move(sol));
            }
        }
        const GridFunction C = op.apply(g, g);
        const std::vector<double> L = loss_rate(g, k);
        const double max_rate = *std::max_element(L.begin(), L.end());
        const double dt = std::min(adv_cap, 0.45 / (2.0 + c * max_rate));
        // Transport characteristics run toward the origin, so the upwind
        // neighbor is the one above; beyond the top node the tail is zero.
        for (std::size_t i = 0; i < n; ++i) {
            const double up = (i + 1 < n) ? g.values[i + 1] : 0.0;
            const double adv = geometric ? (up - g.values[i]) / lnr
                                         : ys[i] * (up - g.values[i]) / dy;
            next[i] =
                g.values[i] + dt * (adv + 2.0 * g.values[i] + c * C.values[i]);
        }
        for (double& v : next) {
            if (v < 0.0) v = 0.0;
        }
        g.values = next;
        const double cur = moment(g, 1.0);
        if (!(cur > 0.0)) {
            throw ConvergenceError("the relaxed iterate lost all of its mass");
        }
        for (double& v : g.values) v /= cur;
    }
}

}  // namespace coagprof
