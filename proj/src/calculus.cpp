#include "pqeig/calculus.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "pqeig/logsum.hpp"

namespace pqeig {

namespace {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

inline double norm2(double a, double b) { return std::sqrt(a * a + b * b); }

// 1-D difference stencil: f' ~ cm*f[km] + cp*f[kp]
struct Diff1D {
    std::size_t km, kp;
    double cm, cp;
};

Diff1D x_stencil(const GridDomain& dom, int i, int j) {
    const std::size_t k = dom.idx(i, j);
    const bool w = dom.in_domain(i - 1, j);
    const bool e = dom.in_domain(i + 1, j);
    if (w && e) return {dom.idx(i - 1, j), dom.idx(i + 1, j), -0.5 / dom.hx, 0.5 / dom.hx};
    if (e) return {k, dom.idx(i + 1, j), -1.0 / dom.hx, 1.0 / dom.hx};
    if (w) return {dom.idx(i - 1, j), k, -1.0 / dom.hx, 1.0 / dom.hx};
    return {k, k, 0.0, 0.0};
}

Diff1D y_stencil(const GridDomain& dom, int i, int j) {
    const std::size_t k = dom.idx(i, j);
    const bool s = dom.in_domain(i, j - 1);
    const bool n = dom.in_domain(i, j + 1);
    if (s && n) return {dom.idx(i, j - 1), dom.idx(i, j + 1), -0.5 / dom.hy, 0.5 / dom.hy};
    if (n) return {k, dom.idx(i, j + 1), -1.0 / dom.hy, 1.0 / dom.hy};
    if (s) return {dom.idx(i, j - 1), k, -1.0 / dom.hy, 1.0 / dom.hy};
    return {k, k, 0.0, 0.0};
}

void check_shape(const Field& f, const GridDomain& dom, const char* what) {
    if (f.size() != dom.node_count())
        throw std::invalid_argument(std::string(what) + ": field size " +
                                    std::to_string(f.size()) + " does not match grid " +
                                    std::to_string(dom.node_count()));
}

} // namespace

void validate_field_pair(const FieldPair& fp, const GridDomain& dom) {
    check_shape(fp.u, dom, "field pair u");
    check_shape(fp.v, dom, "field pair v");
    for (std::size_t k = 0; k < fp.u.size(); ++k) {
        if (!std::isfinite(fp.u[k]) || !std::isfinite(fp.v[k]))
            throw std::invalid_argument("field pair has non-finite entries");
    }
    for (int j = 0; j < dom.ny; ++j)
        for (int i = 0; i < dom.nx; ++i)
            if (dom.is_boundary(i, j) && std::abs(fp.u[dom.idx(i, j)]) > 1e-14)
                throw std::invalid_argument(
                    "Dirichlet component u must vanish on the boundary set");
}

void clamp_dirichlet(Field& u, const GridDomain& dom) {
    for (std::size_t k = 0; k < u.size(); ++k)
        if (dom.boundary_mask[k]) u[k] = 0.0;
}

VectorField gradient_field(const Field& f, const GridDomain& dom) {
    check_shape(f, dom, "gradient_field");
    VectorField g;
    g.x.assign(dom.node_count(), 0.0);
    g.y.assign(dom.node_count(), 0.0);
    for (int j = 0; j < dom.ny; ++j) {
        for (int i = 0; i < dom.nx; ++i) {
            if (!dom.in_domain(i, j)) continue;
            const std::size_t k = dom.idx(i, j);
            const Diff1D sx = x_stencil(dom, i, j);
            const Diff1D sy = y_stencil(dom, i, j);
            g.x[k] = sx.cm * f[sx.km] + sx.cp * f[sx.kp];
            g.y[k] = sy.cm * f[sy.km] + sy.cp * f[sy.kp];
        }
    }
    return g;
}

double integrate(const Field& f, const GridDomain& dom) {
    check_shape(f, dom, "integrate");
    double acc = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
        if (dom.quad_weight[k] == 0.0) continue;
        if (!std::isfinite(f[k])) throw std::invalid_argument("integrate: non-finite entry");
        acc += f[k] * dom.quad_weight[k];
    }
    return acc;
}

namespace {

// Piecewise-linear gradient cells: each grid square is split into two
// triangles along alternating diagonals, a triangle counting when its three
// corners are in the domain.  The gradient of the linear interpolant is
// gx = (f[xb] - f[xa])/hx, gy = (f[yb] - f[ya])/hy.
struct Tri {
    std::size_t xa, xb, ya, yb;
};

template <class Fn>
void for_each_triangle(const GridDomain& dom, Fn&& fn) {
    for (int j = 0; j + 1 < dom.ny; ++j) {
        for (int i = 0; i + 1 < dom.nx; ++i) {
            const bool b00 = dom.in_domain(i, j), b10 = dom.in_domain(i + 1, j);
            const bool b01 = dom.in_domain(i, j + 1), b11 = dom.in_domain(i + 1, j + 1);
            const std::size_t k00 = dom.idx(i, j), k10 = dom.idx(i + 1, j);
            const std::size_t k01 = dom.idx(i, j + 1), k11 = dom.idx(i + 1, j + 1);
            if ((i + j) % 2 == 0) {
                if (b00 && b10 && b11) fn(Tri{k00, k10, k10, k11});
                if (b00 && b01 && b11) fn(Tri{k01, k11, k00, k01});
            } else {
                if (b00 && b10 && b01) fn(Tri{k00, k10, k00, k01});
                if (b10 && b11 && b01) fn(Tri{k01, k11, k10, k11});
            }
        }
    }
}

double tri_energy_sum(const Field& f, double power, const GridDomain& dom, const char* comp) {
    const double w = 0.5 * dom.hx * dom.hy;
    double acc = 0.0;
    for_each_triangle(dom, [&](const Tri& t) {
        const double gx = (f[t.xb] - f[t.xa]) / dom.hx;
        const double gy = (f[t.yb] - f[t.ya]) / dom.hy;
        const double m = norm2(gx, gy);
        if (m == 0.0) return;
        const double lg = std::log(m);
        if (m > 1.0 && power * lg > 700.0)
            throw scale_error(std::string("energy overflow: |grad ") + comp +
                              "| = " + std::to_string(m) + " at exponent " +
                              std::to_string(power) +
                              "; rescale the fields (the energy is homogeneous)");
        acc += w * std::exp(power * lg);
    });
    return acc;
}

} // namespace

double energy(const FieldPair& fp, const Exponents& e, const GridDomain& dom) {
    check_shape(fp.u, dom, "energy u");
    check_shape(fp.v, dom, "energy v");
    return tri_energy_sum(fp.u, e.p, dom, "u") / e.p +
           tri_energy_sum(fp.v, e.q, dom, "v") / e.q;
}

double coupling(const FieldPair& fp, const Exponents& e, const GridDomain& dom) {
    check_shape(fp.u, dom, "coupling u");
    check_shape(fp.v, dom, "coupling v");
    double acc = 0.0;
    for (std::size_t k = 0; k < dom.node_count(); ++k) {
        const double w = dom.quad_weight[k];
        if (w == 0.0) continue;
        const double au = std::abs(fp.u[k]);
        const double av = std::abs(fp.v[k]);
        if (!std::isfinite(au) || !std::isfinite(av))
            throw std::invalid_argument("coupling: non-finite entry");
        if (au == 0.0 || av == 0.0) continue;
        acc += w * std::exp(e.alpha * std::log(au) + e.beta * std::log(av));
    }
    return acc;
}

double constraint_value(const FieldPair& fp, const Exponents& e, const GridDomain& dom) {
    if (!(e.beta > 1.0))
        throw std::invalid_argument("constraint_value requires beta > 1, got " +
                                    std::to_string(e.beta));
    check_shape(fp.u, dom, "constraint u");
    check_shape(fp.v, dom, "constraint v");
    const Field log_wa = detail::make_log_weight_alpha(fp.u, e.alpha, dom);
    return detail::constraint_split(log_wa, fp.v, 0.0, e.beta, dom).value();
}

double rayleigh_quotient(const FieldPair& fp, const Exponents& e, const GridDomain& dom) {
    const double c = coupling(fp, e, dom);
    if (c <= 0.0)
        throw std::invalid_argument(
            "rayleigh_quotient: coupling integral vanishes, pair is not admissible (u*v == 0)");
    return energy(fp, e, dom) / c;
}

MaskedField infinity_laplacian(const Field& f, const GridDomain& dom) {
    check_shape(f, dom, "infinity_laplacian");
    MaskedField out;
    out.value.assign(dom.node_count(), 0.0);
    out.defined.assign(dom.node_count(), 0);
    const double ihx2 = 1.0 / (dom.hx * dom.hx);
    const double ihy2 = 1.0 / (dom.hy * dom.hy);
    const double ihxy = 1.0 / (4.0 * dom.hx * dom.hy);
    for (int j = 0; j < dom.ny; ++j) {
        for (int i = 0; i < dom.nx; ++i) {
            if (!dom.is_interior(i, j)) continue;
            bool full = true;
            for (int dj = -1; dj <= 1 && full; ++dj)
                for (int di = -1; di <= 1 && full; ++di)
                    if (!dom.in_domain(i + di, j + dj)) full = false;
            if (!full) continue;
            const std::size_t k = dom.idx(i, j);
            const double fc = f[k];
            const double fe = f[dom.idx(i + 1, j)], fw = f[dom.idx(i - 1, j)];
            const double fn = f[dom.idx(i, j + 1)], fs = f[dom.idx(i, j - 1)];
            const double fx = (fe - fw) / (2.0 * dom.hx);
            const double fy = (fn - fs) / (2.0 * dom.hy);
            const double fxx = (fe - 2.0 * fc + fw) * ihx2;
            const double fyy = (fn - 2.0 * fc + fs) * ihy2;
            const double fxy = (f[dom.idx(i + 1, j + 1)] - f[dom.idx(i + 1, j - 1)] -
                                f[dom.idx(i - 1, j + 1)] + f[dom.idx(i - 1, j - 1)]) *
                               ihxy;
            out.value[k] = fx * fx * fxx + 2.0 * fx * fy * fxy + fy * fy * fyy;
            out.defined[k] = 1;
        }
    }
    return out;
}

FieldPair energy_gradient(const FieldPair& fp, const Exponents& e, const GridDomain& dom) {
    check_shape(fp.u, dom, "energy_gradient u");
    check_shape(fp.v, dom, "energy_gradient v");
    FieldPair g;
    g.u.assign(dom.node_count(), 0.0);
    g.v.assign(dom.node_count(), 0.0);
    detail::tri_power_scatter(fp.u, e.p, 0.0, dom, g.u);
    detail::tri_power_scatter(fp.v, e.q, 0.0, dom, g.v);
    return g;
}

namespace detail {

double SignedSplit::value() const {
    if (log_pos == neg_inf && log_neg == neg_inf) return 0.0;
    if (log_neg == neg_inf) return std::exp(log_pos);
    if (log_pos == neg_inf) return -std::exp(log_neg);
    const double m = std::max(log_pos, log_neg);
    return std::exp(m) * (std::exp(log_pos - m) - std::exp(log_neg - m));
}

double SignedSplit::rel_residual() const {
    if (log_pos == neg_inf && log_neg == neg_inf) return 0.0;
    const double m = std::max(log_pos, log_neg);
    const double sp = std::exp(log_pos - m);
    const double sn = std::exp(log_neg - m);
    return std::abs(sp - sn) / (sp + sn);
}

double SignedSplit::log_scale() const { return log_sum_exp(log_pos, log_neg); }

double log_tri_power_sum(const Field& f, double power, const GridDomain& dom) {
    LogSum acc;
    const double log_w = std::log(0.5 * dom.hx * dom.hy);
    for_each_triangle(dom, [&](const Tri& t) {
        const double gx = (f[t.xb] - f[t.xa]) / dom.hx;
        const double gy = (f[t.yb] - f[t.ya]) / dom.hy;
        const double m = norm2(gx, gy);
        if (m == 0.0) return;
        acc.add(log_w + power * std::log(m));
    });
    return acc.log();
}

void tri_power_scatter(const Field& f, double power, double log_ref, const GridDomain& dom,
                       Field& out) {
    const double log_w = std::log(0.5 * dom.hx * dom.hy);
    for_each_triangle(dom, [&](const Tri& t) {
        const double gx = (f[t.xb] - f[t.xa]) / dom.hx;
        const double gy = (f[t.yb] - f[t.ya]) / dom.hy;
        const double m = norm2(gx, gy);
        if (m == 0.0) return;
        const double fac = std::exp(log_w + (power - 2.0) * std::log(m) - log_ref);
        if (fac == 0.0) return;
        const double fx = fac * gx / dom.hx;
        const double fy = fac * gy / dom.hy;
        out[t.xb] += fx;
        out[t.xa] -= fx;
        out[t.yb] += fy;
        out[t.ya] -= fy;
    });
}

double log_coupling_sum(const Field& u, const Field& v, double a, double b,
                        const GridDomain& dom) {
    LogSum acc;
    for (std::size_t k = 0; k < dom.node_count(); ++k) {
        const double w = dom.quad_weight[k];
        if (w == 0.0) continue;
        const double au = std::abs(u[k]);
        const double av = std::abs(v[k]);
        if (au == 0.0 || av == 0.0) continue;
        acc.add(std::log(w) + a * std::log(au) + b * std::log(av));
    }
    return acc.log();
}

Field make_log_weight_alpha(const Field& u, double alpha, const GridDomain& dom) {
    Field log_wa(dom.node_count(), neg_inf);
    for (std::size_t k = 0; k < dom.node_count(); ++k) {
        const double w = dom.quad_weight[k];
        const double au = std::abs(u[k]);
        if (w == 0.0 || au == 0.0) continue;
        log_wa[k] = std::log(w) + alpha * std::log(au);
    }
    return log_wa;
}

SignedSplit constraint_split(const Field& log_wa, const Field& v, double K, double beta,
                             const GridDomain& dom) {
    LogSum pos, neg;
    const double bm1 = beta - 1.0;
    for (std::size_t k = 0; k < dom.node_count(); ++k) {
        if (log_wa[k] == neg_inf) continue;
        const double d = v[k] - K;
        if (d == 0.0) continue;
        const double term = log_wa[k] + bm1 * std::log(std::abs(d));
        if (d > 0.0)
            pos.add(term);
        else
            neg.add(term);
    }
    return {pos.log(), neg.log()};
}

void coupling_gradient_scaled(const Field& u, const Field& v, double a, double b,
                              double log_ref, const GridDomain& dom, Field& out) {
    for (std::size_t k = 0; k < dom.node_count(); ++k) {
        const double w = dom.quad_weight[k];
        if (w == 0.0) continue;
        const double au = std::abs(u[k]);
        const double av = std::abs(v[k]);
        if (au == 0.0 || av == 0.0) continue;
        const double t = std::exp(std::log(w) + (a - 1.0) * std::log(au) + b * std::log(av) -
                                  log_ref);
        out[k] += a * (u[k] > 0.0 ? t : -t);
    }
}

} // namespace detail

} // namespace pqeig
