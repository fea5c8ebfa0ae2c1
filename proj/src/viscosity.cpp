#include "pqeig/viscosity.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "pqeig/calculus.hpp"

namespace pqeig {

namespace {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

struct Stencil2 {
    bool full = false;
    double fx = 0, fy = 0, mag = 0;
    double d_inf = 0; // <D2f grad f, grad f>
    double lap = 0;   // trace of D2f
};

Stencil2 eval_stencil(const Field& f, const GridDomain& dom, int i, int j) {
    Stencil2 st;
    for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di)
            if (!dom.in_domain(i + di, j + dj)) return st;
    st.full = true;
    const double fc = f[dom.idx(i, j)];
    const double fe = f[dom.idx(i + 1, j)], fw = f[dom.idx(i - 1, j)];
    const double fn = f[dom.idx(i, j + 1)], fs = f[dom.idx(i, j - 1)];
    st.fx = (fe - fw) / (2.0 * dom.hx);
    st.fy = (fn - fs) / (2.0 * dom.hy);
    st.mag = std::sqrt(st.fx * st.fx + st.fy * st.fy);
    const double fxx = (fe - 2.0 * fc + fw) / (dom.hx * dom.hx);
    const double fyy = (fn - 2.0 * fc + fs) / (dom.hy * dom.hy);
    const double fxy = (f[dom.idx(i + 1, j + 1)] - f[dom.idx(i + 1, j - 1)] -
                        f[dom.idx(i - 1, j + 1)] + f[dom.idx(i - 1, j - 1)]) /
                       (4.0 * dom.hx * dom.hy);
    st.d_inf = st.fx * st.fx * fxx + 2.0 * st.fx * st.fy * fxy + st.fy * st.fy * fyy;
    st.lap = fxx + fyy;
    return st;
}

double grad_sup_norm(const Field& f, const GridDomain& dom) {
    const VectorField g = gradient_field(f, dom);
    double m = 0.0;
    for (std::size_t k = 0; k < dom.node_count(); ++k)
        m = std::max(m, std::sqrt(g.x[k] * g.x[k] + g.y[k] * g.y[k]));
    return m;
}

struct Workspace {
    ResidualReport rep;
    double h = 0.0;
    double deadband = 0.0;
    std::vector<std::array<double, 2>> centers;
};

Workspace prepare(const Field& v, const GridDomain& dom, const ResidualOptions& opts,
                  const std::vector<std::array<double, 2>>& default_centers) {
    Workspace ws;
    ws.h = std::max(dom.hx, dom.hy);
    ws.rep.residual.assign(dom.node_count(), 0.0);
    ws.rep.defined.assign(dom.node_count(), 0);
    ws.rep.region.assign(dom.node_count(), Region::v_zero);
    ws.rep.excluded_radius = opts.exclusion_radius < 0.0 ? 3.0 * ws.h : opts.exclusion_radius;
    ws.centers = opts.exclusion_centers.empty() ? default_centers : opts.exclusion_centers;
    ws.deadband = opts.deadband_kappa * ws.h * grad_sup_norm(v, dom);

    for (int j = 0; j < dom.ny; ++j) {
        for (int i = 0; i < dom.nx; ++i) {
            if (!dom.in_domain(i, j)) continue;
            const std::size_t k = dom.idx(i, j);
            const double px = dom.x(i), py = dom.y(j);
            bool excl = opts.axis_halfwidth > 0.0 && std::abs(px) <= opts.axis_halfwidth;
            for (const auto& c : ws.centers) {
                const double d = std::sqrt((px - c[0]) * (px - c[0]) + (py - c[1]) * (py - c[1]));
                if (d <= ws.rep.excluded_radius) excl = true;
                if (opts.rim_radius > 0.0 &&
                    std::abs(d - opts.rim_radius) <= ws.rep.excluded_radius)
                    excl = true;
            }
            if (excl)
                ws.rep.region[k] = Region::excluded;
            else if (dom.is_boundary(i, j))
                ws.rep.region[k] = Region::boundary;
            else if (v[k] > ws.deadband)
                ws.rep.region[k] = Region::v_pos;
            else if (v[k] < -ws.deadband)
                ws.rep.region[k] = Region::v_neg;
            else
                ws.rep.region[k] = Region::v_zero;
        }
    }
    return ws;
}

void finish_sups(ResidualReport& rep, const GridDomain& dom) {
    rep.sup_defect = 0.0;
    rep.boundary_sup_defect = 0.0;
    for (std::size_t k = 0; k < dom.node_count(); ++k) {
        if (!rep.defined[k]) continue;
        const double a = std::abs(rep.residual[k]);
        if (rep.region[k] == Region::boundary)
            rep.boundary_sup_defect = std::max(rep.boundary_sup_defect, a);
        else if (rep.region[k] != Region::excluded)
            rep.sup_defect = std::max(rep.sup_defect, a);
    }
}

std::vector<std::array<double, 2>> default_apexes(const LimitSpec& s) {
    if (!s.is_rectangle()) return {{0.0, 0.0}};
    const AnsatzConfig c = ansatz_for(s);
    return {{c.a, 0.0}, {-c.a, 0.0}};
}

// Lambda * u_+^g1 * |v|^g2, zero factors short-circuited
double coefficient(double Lambda, double u, double g1, double v, double g2) {
    const double up = std::max(u, 0.0);
    const double av = std::abs(v);
    if (up == 0.0 || av == 0.0) return (g1 == 0.0 && g2 == 0.0) ? Lambda : 0.0;
    return Lambda * std::exp(g1 * std::log(up) + g2 * std::log(av));
}

void check_nonnegative(const Field& u, const char* what) {
    double m = 0.0;
    for (double x : u) m = std::max(m, std::abs(x));
    for (double x : u)
        if (x < -1e-9 * m)
            throw std::invalid_argument(std::string(what) +
                                        ": the Dirichlet component must be nonnegative");
}

} // namespace

ResidualReport h_infinity_residual(const Field& u, const Field& v, double Lambda,
                                   const LimitSpec& s, const GridDomain& dom,
                                   const ResidualOptions& opts) {
    s.validate();
    check_nonnegative(u, "h_infinity_residual");
    Workspace ws = prepare(v, dom, opts, default_apexes(s));
    const double g2 = (1.0 - s.gamma) * s.Q;
    for (int j = 0; j < dom.ny; ++j) {
        for (int i = 0; i < dom.nx; ++i) {
            if (!dom.in_domain(i, j)) continue;
            const std::size_t k = dom.idx(i, j);
            if (dom.is_boundary(i, j)) {
                ws.rep.residual[k] = u[k]; // Dirichlet trace check
                ws.rep.defined[k] = 1;
                continue;
            }
            const Stencil2 st = eval_stencil(u, dom, i, j);
            if (!st.full) continue;
            const double slot_b = st.mag - coefficient(Lambda, u[k], s.gamma, v[k], g2);
            ws.rep.residual[k] = std::min(-st.d_inf, slot_b);
            ws.rep.defined[k] = 1;
        }
    }
    finish_sups(ws.rep, dom);
    return ws.rep;
}

ResidualReport f_infinity_residual(const Field& v, const Field& u, double Lambda,
                                   const LimitSpec& s, const GridDomain& dom,
                                   const ResidualOptions& opts) {
    s.validate();
    check_nonnegative(u, "f_infinity_residual");
    Workspace ws = prepare(v, dom, opts, default_apexes(s));
    const double lam_q = std::exp(std::log(Lambda) / s.Q);
    const double g1 = s.gamma / s.Q;
    const double g2 = 1.0 - s.gamma;
    const VectorField gv = gradient_field(v, dom);
    for (int j = 0; j < dom.ny; ++j) {
        for (int i = 0; i < dom.nx; ++i) {
            if (!dom.in_domain(i, j)) continue;
            const std::size_t k = dom.idx(i, j);
            if (dom.is_boundary(i, j)) {
                // Neumann defect of the one-sided gradient
                ws.rep.residual[k] = gv.x[k] * dom.normal_x[k] + gv.y[k] * dom.normal_y[k];
                ws.rep.defined[k] = 1;
                continue;
            }
            const Stencil2 st = eval_stencil(v, dom, i, j);
            if (!st.full) continue;
            const double coeff = coefficient(lam_q, u[k], g1, v[k], g2);
            double r;
            if (v[k] > ws.deadband)
                r = std::min(-st.d_inf, st.mag - coeff);
            else if (v[k] < -ws.deadband)
                r = std::max(-st.d_inf, -st.mag + coeff);
            else
                r = -st.d_inf;
            ws.rep.residual[k] = r;
            ws.rep.defined[k] = 1;
        }
    }
    finish_sups(ws.rep, dom);
    return ws.rep;
}

ResidualReport h_p_residual(const Field& u, const Field& v, double lambda,
                            const Exponents& e, const GridDomain& dom,
                            const ResidualOptions& opts) {
    if (!(e.p >= 2.0))
        throw std::invalid_argument("h_p_residual requires p >= 2, got " + std::to_string(e.p));
    Workspace ws = prepare(v, dom, opts, {});
    const double log_lambda = std::log(lambda);
    for (int j = 0; j < dom.ny; ++j) {
        for (int i = 0; i < dom.nx; ++i) {
            if (!dom.in_domain(i, j)) continue;
            const std::size_t k = dom.idx(i, j);
            if (dom.is_boundary(i, j)) {
                ws.rep.residual[k] = u[k];
                ws.rep.defined[k] = 1;
                continue;
            }
            const Stencil2 st = eval_stencil(u, dom, i, j);
            if (!st.full) continue;
            if (st.mag == 0.0 && e.p < 4.0) {
                ws.rep.region[k] = Region::excluded; // negative power of |grad u|
                continue;
            }
            // both terms carried as sign + log magnitude to survive large p
            const double inner = st.mag * st.mag * st.lap + (e.p - 2.0) * st.d_inf;
            double log_t1 = neg_inf;
            int sign_t1 = 0;
            if (inner != 0.0 && st.mag > 0.0) {
                log_t1 = (e.p - 4.0) * std::log(st.mag) + std::log(std::abs(inner));
                sign_t1 = inner > 0.0 ? -1 : 1; // leading minus sign
            }
            double log_t2 = neg_inf;
            int sign_t2 = 0;
            const double au = std::abs(u[k]);
            const double av = std::abs(v[k]);
            if (au > 0.0 && av > 0.0 && lambda > 0.0) {
                log_t2 = std::log(e.alpha) + log_lambda + (e.alpha - 1.0) * std::log(au) +
                         e.beta * std::log(av);
                sign_t2 = u[k] > 0.0 ? 1 : -1;
            }
            // r = t1 - t2 in signed log form, reported as sign(r)*|r|^(1/p)
            double log_r = neg_inf;
            int sign_r = 0;
            if (sign_t1 == 0 && sign_t2 == 0) {
                // exact zero
            } else if (sign_t2 == 0) {
                log_r = log_t1;
                sign_r = sign_t1;
            } else if (sign_t1 == 0) {
                log_r = log_t2;
                sign_r = -sign_t2;
            } else {
                const double m = std::max(log_t1, log_t2);
                const double comb = sign_t1 * std::exp(log_t1 - m) - sign_t2 * std::exp(log_t2 - m);
                if (comb != 0.0) {
                    log_r = m + std::log(std::abs(comb));
                    sign_r = comb > 0.0 ? 1 : -1;
                }
            }
            ws.rep.residual[k] = sign_r == 0 ? 0.0 : sign_r * std::exp(log_r / e.p);
            ws.rep.defined[k] = 1;
        }
    }
    finish_sups(ws.rep, dom);
    return ws.rep;
}

} // namespace pqeig
