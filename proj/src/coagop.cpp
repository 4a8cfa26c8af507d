#include "coagprof/coagop.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace coagprof {

namespace {

inline double power(double x, double e) { return e == 0.0 ? 1.0 : std::pow(x, e); }

struct Stencil {
    std::uint32_t b;
    double c0, c1, c2;
};

// Three-point reconstruction for a query inside [y_min, y_max]: Lagrange
// weights in the grid's interpolation coordinate (log y on geometric grids),
// on the node triple around the query's cell. Needs at least 3 nodes.
Stencil quad_stencil(const Grid& g, double q) {
    const std::size_t n = g.size();
    std::size_t c = g.cell_index(q);
    if (c > n - 2) c = n - 2;
    const std::size_t b = (c == 0) ? 0 : std::min(c - 1, n - 3);
    const bool geo = g.kind() == GridKind::geometric;
    const auto coord = [&](double y) { return geo ? std::log(y) : y; };
    const double x = coord(q);
    const double x0 = coord(g.node(b));
    const double x1 = coord(g.node(b + 1));
    const double x2 = coord(g.node(b + 2));
    Stencil s;
    s.b = static_cast<std::uint32_t>(b);
    s.c0 = (x - x1) * (x - x2) / ((x0 - x1) * (x0 - x2));
    s.c1 = (x - x0) * (x - x2) / ((x1 - x0) * (x1 - x2));
    s.c2 = (x - x0) * (x - x1) / ((x2 - x0) * (x2 - x1));
    return s;
}

// Exact read of node j, expressed in stencil form.
Stencil node_stencil(std::size_t j, std::size_t n) {
    const std::size_t b = (j == 0) ? 0 : std::min(j - 1, n - 3);
    Stencil s{static_cast<std::uint32_t>(b), 0.0, 0.0, 0.0};
    switch (j - b) {
        case 0: s.c0 = 1.0; break;
        case 1: s.c1 = 1.0; break;
        default: s.c2 = 1.0; break;
    }
    return s;
}

// Nonintegrable trend at the lower edge: per-cell contributions of the
// moment integrand z^e f(z) that keep growing toward the first cell cannot
// be resolved by the grid. Full cell widths, not trapezoid weights, so the
// halved boundary weight cannot mask the growth.
void reject_singular_edge(const GridFunction& f, double e) {
    const Grid& g = *f.grid;
    if (g.size() < 4) return;
    double c[3];
    double cmax = 0.0;
    for (std::size_t j = 0; j + 1 < g.size(); ++j) {
        const double cj =
            (g.node(j + 1) - g.node(j)) * power(g.node(j), e) * std::abs(f.values[j]);
        if (j < 3) c[j] = cj;
        cmax = std::max(cmax, cj);
    }
    if (c[0] > 0.0 && c[0] >= c[1] && c[1] >= c[2] && c[0] > 1e-9 * cmax)
        throw SingularIntegrandError(
            "integrand with negative exponent does not vanish fast enough at y_min");
}

void require_same_grid(const GridFunction& f, const Grid& g) {
    if (!f.grid || !f.grid->same_nodes_as(g))
        throw InvalidRangeError("operand lives on a different grid");
}

}  // namespace

CoagulationOperator::CoagulationOperator(GridPtr grid, KernelSpec kernel)
    : grid_(std::move(grid)), kernel_(std::move(kernel)) {
    const Grid& g = *grid_;
    const std::size_t n = g.size();
    if (n < 8)
        throw InsufficientResolutionError("coagulation operator needs at least 8 grid nodes");
    const double y0 = g.y_min();
    row_begin_.assign(n + 1, 0);

    std::vector<double> pts;
    for (std::size_t i = 0; i < n; ++i) {
        row_begin_[i] = entries_.size();
        const double yi = g.node(i);
        const double L = yi - y0;
        if (L <= y0 * (1.0 + 1e-12)) continue;

        pts.clear();
        for (std::size_t j = 0; j < n && g.node(j) <= L * (1.0 + 1e-15); ++j)
            pts.push_back(g.node(j));
        if (pts.empty()) continue;
        if (L - pts.back() > 1e-14 * yi) pts.push_back(L);
        if (pts.size() < 2) continue;

        for (std::size_t m = 0; m < pts.size(); ++m) {
            const double p = pts[m];
            double w;
            if (m == 0)
                w = 0.5 * (pts[1] - pts[0]);
            else if (m + 1 == pts.size())
                w = 0.5 * (pts[m] - pts[m - 1]);
            else
                w = 0.5 * (pts[m + 1] - pts[m - 1]);
            Entry e;
            e.a = evaluate(kernel_, p, yi - p);
            e.w = w;
            const Stencil zs =
                (m < n && p == g.node(m)) ? node_stencil(m, n) : quad_stencil(g, p);
            const Stencil qs = quad_stencil(g, yi - p);
            e.zb = zs.b;
            e.z0 = zs.c0;
            e.z1 = zs.c1;
            e.z2 = zs.c2;
            e.qb = qs.b;
            e.q0 = qs.c0;
            e.q1 = qs.c1;
            e.q2 = qs.c2;
            entries_.push_back(e);
        }
    }
    row_begin_[n] = entries_.size();

    pow_alpha_.resize(kernel_.terms.size());
    pow_beta_.resize(kernel_.terms.size());
    for (std::size_t t = 0; t < kernel_.terms.size(); ++t) {
        pow_alpha_[t].resize(n);
        pow_beta_[t].resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            pow_alpha_[t][i] = power(g.node(i), kernel_.terms[t].alpha);
            pow_beta_[t][i] = power(g.node(i), kernel_.terms[t].beta);
        }
    }
}

GridFunction CoagulationOperator::apply(const GridFunction& f, const GridFunction& g) const {
    require_same_grid(f, *grid_);
    require_same_grid(g, *grid_);
    const std::size_t n = grid_->size();

    for (const auto& t : kernel_.terms) {
        for (double e : {t.alpha, t.beta}) {
            if (e < 0.0) {
                reject_singular_edge(f, e);
                reject_singular_edge(g, e);
            }
        }
    }

    std::vector<double> out(n, 0.0);

    // Gain: shared quadrature plan, interpolating each operand at the
    // reflected abscissa. The integrand is symmetrized so C(f,g) = C(g,f).
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t e = row_begin_[i]; e < row_begin_[i + 1]; ++e) {
            const Entry& en = entries_[e];
            const double fz =
                en.z0 * f.values[en.zb] + en.z1 * f.values[en.zb + 1] + en.z2 * f.values[en.zb + 2];
            const double gz =
                en.z0 * g.values[en.zb] + en.z1 * g.values[en.zb + 1] + en.z2 * g.values[en.zb + 2];
            const double fq =
                en.q0 * f.values[en.qb] + en.q1 * f.values[en.qb + 1] + en.q2 * f.values[en.qb + 2];
            const double gq =
                en.q0 * g.values[en.qb] + en.q1 * g.values[en.qb + 1] + en.q2 * g.values[en.qb + 2];
            s += en.w * en.a * 0.25 * (fz * gq + gz * fq);
        }
        out[i] = s;
    }

    // Loss: moments share the gain's lower truncation so the singular parts
    // cancel for alpha = 0 kernels.
    for (std::size_t t = 0; t < kernel_.terms.size(); ++t) {
        const KernelTerm& kt = kernel_.terms[t];
        const double ma_f = moment_with_tail(f, kt.alpha);
        const double mb_f = moment_with_tail(f, kt.beta);
        const double ma_g = moment_with_tail(g, kt.alpha);
        const double mb_g = moment_with_tail(g, kt.beta);
        for (std::size_t i = 0; i < n; ++i) {
            const double pa = pow_alpha_[t][i], pb = pow_beta_[t][i];
            out[i] -= 0.5 * kt.weight *
                      (f.values[i] * (pa * mb_g + pb * ma_g) +
                       g.values[i] * (pa * mb_f + pb * ma_f));
        }
    }
    return GridFunction(grid_, std::move(out));
}

GridFunction apply_pointwise(const KernelSpec& k, const GridFunction& f,
                             const GridFunction& g) {
    CoagulationOperator op(f.grid, k);
    return op.apply(f, g);
}

double test_function_value(const GridFunction& phi, double q) {
    const Grid& g = *phi.grid;
    const auto& nd = g.nodes();
    if (q <= g.y_min()) {
        const double slope = (phi.values[1] - phi.values[0]) / (nd[1] - nd[0]);
        return phi.values[0] + (q - nd[0]) * slope;
    }
    if (q >= g.y_max()) {
        if (q <= g.y_max() * (1.0 + 1e-12)) return phi.values.back();
        throw ExtrapolationError("test function queried beyond its grid");
    }
    std::size_t c = g.cell_index(q);
    if (c > g.size() - 2) c = g.size() - 2;
    return phi.values[c] +
           (q - nd[c]) * (phi.values[c + 1] - phi.values[c]) / (nd[c + 1] - nd[c]);
}

double apply_weak(const KernelSpec& k, const GridFunction& f, const GridFunction& g,
                  const GridFunction& phi) {
    require_same_grid(g, *f.grid);
    const Grid& gr = *f.grid;
    const std::size_t n = gr.size();
    if (phi.grid->y_max() < 2.0 * gr.y_max() * (1.0 - 1e-12))
        throw InvalidRangeError("test function grid must cover [0, 2*y_max]");

    std::vector<double> phi_at(n);
    for (std::size_t i = 0; i < n; ++i) phi_at[i] = test_function_value(phi, gr.node(i));

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = gr.node(i);
        const double fw = gr.weight(i) * f.values[i];
        if (fw == 0.0) continue;
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double z = gr.node(j);
            const double bracket = test_function_value(phi, x + z) - phi_at[i] - phi_at[j];
            row += gr.weight(j) * g.values[j] * evaluate(k, x, z) * bracket;
        }
        total += fw * row;
    }
    return 0.5 * total;
}

GridFunction convolve(const GridFunction& u, const GridFunction& v) {
    require_same_grid(v, *u.grid);
    const Grid& g = *u.grid;
    const std::size_t n = g.size();
    if (n < 8) throw InsufficientResolutionError("convolution needs at least 8 grid nodes");
    const double y0 = g.y_min();
    const auto& nd = g.nodes();

    // Quadratic model in y around cell c; the breakpoint merge below keeps
    // every Gauss point inside the cell its stencil was chosen for.
    const auto quad = [&](const std::vector<double>& w, std::size_t c, double z) {
        const std::size_t b = (c == 0) ? 0 : std::min(c - 1, n - 3);
        const double x0 = nd[b], x1 = nd[b + 1], x2 = nd[b + 2];
        const double l0 = (z - x1) * (z - x2) / ((x0 - x1) * (x0 - x2));
        const double l1 = (z - x0) * (z - x2) / ((x1 - x0) * (x1 - x2));
        const double l2 = (z - x0) * (z - x1) / ((x2 - x0) * (x2 - x1));
        return l0 * w[b] + l1 * w[b + 1] + l2 * w[b + 2];
    };
    const double gx = std::sqrt(0.6);  // 3-point Gauss, exact through degree 5

    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double yi = nd[i];
        const double L = yi - y0;
        if (L <= y0 * (1.0 + 1e-12)) continue;

        // Breakpoints: grid nodes in [y0, L] merged with their reflections
        // yi - z, so both factors keep a single cell per segment.
        std::size_t J = 0;
        while (J + 1 < n && nd[J + 1] <= L * (1.0 + 1e-15)) ++J;

        std::size_t ja = 0;   // ascending over nodes
        std::size_t kb = J;   // descending over reflected nodes
        bool kb_done = false;
        std::size_t ucell = 0, vcell = n - 2;
        double acc = 0.0;

        auto next_point = [&]() -> double {
            const double pa = (ja <= J) ? nd[ja] : std::numeric_limits<double>::infinity();
            const double pb = !kb_done ? yi - nd[kb] : std::numeric_limits<double>::infinity();
            if (pa <= pb) {
                ++ja;
                return pa;
            }
            if (kb == 0)
                kb_done = true;
            else
                --kb;
            return pb;
        };

        double prev = next_point();
        while (ja <= J || !kb_done) {
            const double q = next_point();
            if (q - prev > 1e-13 * yi) {
                while (ucell < n - 2 && nd[ucell + 1] <= prev * (1.0 + 1e-15)) ++ucell;
                const double qlow = yi - q;
                while (vcell > 0 && nd[vcell] > qlow * (1.0 + 1e-15)) --vcell;
                const double mid = 0.5 * (prev + q), half = 0.5 * (q - prev);
                const auto at = [&](double z) {
                    return quad(u.values, ucell, z) * quad(v.values, vcell, yi - z);
                };
                acc += half * ((5.0 / 9.0) * (at(mid - half * gx) + at(mid + half * gx)) +
                               (8.0 / 9.0) * at(mid));
            }
            prev = q;
        }
        out[i] = acc;
    }
    return GridFunction(u.grid, std::move(out));
}

GridFunction tail_primitive(const GridFunction& g) {
    const Grid& gr = *g.grid;
    const std::size_t n = gr.size();
    const auto& nd = gr.nodes();
    std::vector<double> G(n, 0.0);
    G[n - 1] = moment_tail_estimate(g, 0.0);
    if (n == 2) {
        G[0] = G[1] + 0.5 * (nd[1] - nd[0]) * (g.values[0] + g.values[1]);
        return GridFunction(g.grid, std::move(G));
    }
    // Cell integrals through the quadratic on the three nodes around each
    // cell, evaluated by two-point Gauss (exact for quadratics).
    const double gx = 1.0 / std::sqrt(3.0);
    for (std::size_t i = n - 1; i-- > 0;) {
        const std::size_t b = (i == 0) ? 0 : std::min(i - 1, n - 3);
        const double x0 = nd[b], x1 = nd[b + 1], x2 = nd[b + 2];
        const double w0 = g.values[b], w1 = g.values[b + 1], w2 = g.values[b + 2];
        const auto p = [&](double z) {
            return w0 * (z - x1) * (z - x2) / ((x0 - x1) * (x0 - x2)) +
                   w1 * (z - x0) * (z - x2) / ((x1 - x0) * (x1 - x2)) +
                   w2 * (z - x0) * (z - x1) / ((x2 - x0) * (x2 - x1));
        };
        const double mid = 0.5 * (nd[i] + nd[i + 1]), half = 0.5 * (nd[i + 1] - nd[i]);
        G[i] = G[i + 1] + half * (p(mid - half * gx) + p(mid + half * gx));
    }
    return GridFunction(g.grid, std::move(G));
}

double moment_with_tail(const GridFunction& f, double mu) {
    return moment(f, mu) + moment_tail_estimate(f, mu);
}

GridFunction apply_convolution(const KernelSpec& k, const GridFunction& f,
                               const GridFunction& g) {
    require_same_grid(g, *f.grid);
    const Grid& gr = *f.grid;
    const std::size_t n = gr.size();

    for (const auto& t : k.terms) {
        for (double e : {t.alpha, t.beta}) {
            if (e < 0.0) {
                reject_singular_edge(f, e);
                reject_singular_edge(g, e);
            }
        }
    }

    std::vector<double> out(n, 0.0);
    for (const auto& t : k.terms) {
        std::vector<double> fa(n), fb(n), ga(n), gb(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double pa = power(gr.node(i), t.alpha);
            const double pb = power(gr.node(i), t.beta);
            fa[i] = pa * f.values[i];
            fb[i] = pb * f.values[i];
            ga[i] = pa * g.values[i];
            gb[i] = pb * g.values[i];
        }
        GridFunction ufa(f.grid, fa), ufb(f.grid, fb), vga(f.grid, ga), vgb(f.grid, gb);
        const GridFunction c1 = convolve(ufa, vgb);
        const GridFunction c2 = convolve(ufb, vga);
        const double ma_f = moment_with_tail(f, t.alpha);
        const double mb_f = moment_with_tail(f, t.beta);
        const double ma_g = moment_with_tail(g, t.alpha);
        const double mb_g = moment_with_tail(g, t.beta);
        for (std::size_t i = 0; i < n; ++i) {
            out[i] += 0.5 * t.weight * (c1.values[i] + c2.values[i]);
            out[i] -= 0.5 * t.weight *
                      (mb_g * fa[i] + ma_f * gb[i] + ma_g * fb[i] + mb_f * ga[i]);
        }
    }
    return GridFunction(f.grid, std::move(out));
}

GridFunction primitive_of_C(const KernelSpec& k, const GridFunction& g) {
    for (const auto& t : k.terms)
        if (t.alpha != 0.0)
            throw ClassMismatchError(
                "the primitive identity requires every kernel term to have alpha = 0");

    const GridFunction G = tail_primitive(g);
    const std::size_t n = g.size();
    std::vector<double> out(n, 0.0);
    for (const auto& t : k.terms) {
        std::vector<double> vb(n);
        for (std::size_t i = 0; i < n; ++i)
            vb[i] = power(g.grid->node(i), t.beta) * g.values[i];
        const GridFunction conv = convolve(G, GridFunction(g.grid, vb));
        const double mb = moment_with_tail(g, t.beta);
        for (std::size_t i = 0; i < n; ++i)
            out[i] += t.weight * (conv.values[i] - mb * G.values[i]);
    }
    return GridFunction(g.grid, std::move(out));
}

}  // namespace coagprof
