#include "pqeig/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>
#include <utility>
#include <sstream>

#include "pqeig/logsum.hpp"

namespace pqeig {

namespace {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();
constexpr double pos_inf = std::numeric_limits<double>::infinity();

double uniform_sym(std::mt19937_64& rng) {
    return 2.0 * ((rng() >> 11) * 0x1.0p-53) - 1.0;
}

Field distance_profile(const GridDomain& dom) {
    Field f(dom.node_count(), 0.0);
    for (int j = 0; j < dom.ny; ++j) {
        for (int i = 0; i < dom.nx; ++i) {
            if (!dom.in_domain(i, j)) continue;
            const double px = dom.x(i);
            const double py = dom.y(j);
            double d;
            if (dom.kind == DomainKind::rectangle)
                d = std::min(dom.R - std::abs(px), dom.L - std::abs(py));
            else
                d = dom.R - std::sqrt(px * px + py * py);
            f[dom.idx(i, j)] = std::max(d, 0.0);
        }
    }
    clamp_dirichlet(f, dom);
    return f;
}

Field coordinate_field(const GridDomain& dom) {
    Field f(dom.node_count(), 0.0);
    for (int j = 0; j < dom.ny; ++j)
        for (int i = 0; i < dom.nx; ++i)
            if (dom.in_domain(i, j)) f[dom.idx(i, j)] = dom.x(i);
    return f;
}

struct ShiftResult {
    double K = 0.0;
    double rel_residual = 0.0;
};

// beta == 1: the constraint map is the step function sum w|u|^a sgn(v-K)
// whose constrained optimum is the weighted median node value exactly.
ShiftResult weighted_median_shift(const Field& log_wa, const Field& v) {
    double max_lw = neg_inf;
    for (std::size_t k = 0; k < v.size(); ++k) max_lw = std::max(max_lw, log_wa[k]);
    std::vector<std::pair<double, double>> items; // (value, relative weight)
    for (std::size_t k = 0; k < v.size(); ++k)
        if (log_wa[k] != neg_inf) items.push_back({v[k], std::exp(log_wa[k] - max_lw)});
    std::sort(items.begin(), items.end());
    double total = 0.0;
    for (const auto& it : items) total += it.second;
    double below = 0.0;
    double best_rel = pos_inf, best_K = items.front().first;
    for (std::size_t j = 0; j < items.size();) {
        // group ties so equal v-values count as one candidate
        std::size_t j2 = j;
        double at = 0.0;
        while (j2 < items.size() && items[j2].first == items[j].first) at += items[j2++].second;
        const double above = total - below - at;
        const double denom = below + above;
        const double rel = denom > 0.0 ? std::abs(above - below) / denom : 0.0;
        if (rel < best_rel) {
            best_rel = rel;
            best_K = items[j].first;
        }
        below += at;
        j = j2;
    }
    return {best_K, best_rel};
}

// Root of the strictly decreasing map K -> int |u|^a |v-K|^{b-2}(v-K), found
// by safeguarded bisection on [min v, max v] (secant candidate when it lands
// inside the bracket).  beta == 1 is handled as an exact weighted median.
ShiftResult shift_internal(const Field& log_wa, const Field& v, double beta,
                           const GridDomain& dom) {
    double lo = pos_inf, hi = neg_inf;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (log_wa[k] == neg_inf) continue;
        lo = std::min(lo, v[k]);
        hi = std::max(hi, v[k]);
    }
    if (!(lo <= hi)) throw std::invalid_argument("shift_constant: u is identically zero");
    if (lo == hi) return {lo, 0.0};
    if (beta == 1.0) return weighted_median_shift(log_wa, v);

    auto eval = [&](double K) { return detail::constraint_split(log_wa, v, K, beta, dom); };

    double flo = eval(lo).rel_residual(); // c(lo) >= 0
    double fhi = -eval(hi).rel_residual();
    double best_K = lo, best_rel = std::abs(flo);
    if (-fhi < best_rel) {
        best_K = hi;
        best_rel = -fhi;
    }
    const double tol_rel = 1e-12;
    for (int it = 0; it < 200 && best_rel > tol_rel; ++it) {
        // secant candidate on even rounds, plain bisection on odd rounds so
        // the bracket provably shrinks
        double mid = 0.5 * (lo + hi);
        if (beta > 1.0 && it % 2 == 0 && flo - fhi > 0.0) {
            const double sec = lo + flo * (hi - lo) / (flo - fhi);
            const double w = hi - lo;
            if (sec > lo + 1e-3 * w && sec < hi - 1e-3 * w) mid = sec;
        }
        if (!(mid > lo && mid < hi)) break; // bracket exhausted in doubles
        const auto split = eval(mid);
        const double rel = split.rel_residual();
        const double val = split.value();
        if (rel < best_rel) {
            best_rel = rel;
            best_K = mid;
        }
        if (val > 0.0) {
            lo = mid;
            flo = rel;
        } else if (val < 0.0) {
            hi = mid;
            fhi = -rel;
        } else {
            return {mid, rel};
        }
    }
    return {best_K, best_rel};
}

double log_mass(const Field& f, double power, const GridDomain& dom) {
    LogSum acc;
    for (std::size_t k = 0; k < f.size(); ++k) {
        const double w = dom.quad_weight[k];
        if (w == 0.0) continue;
        const double a = std::abs(f[k]);
        if (a == 0.0) continue;
        acc.add(std::log(w) + power * std::log(a));
    }
    return acc.log();
}

// coupling of (u, v - K) reusing the precomputed log(w) + alpha*log|u| terms
double log_coupling_from_wa(const Field& log_wa, const Field& v, double K, double beta) {
    LogSum acc;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (log_wa[k] == neg_inf) continue;
        const double d = std::abs(v[k] - K);
        if (d == 0.0) continue;
        acc.add(log_wa[k] + beta * std::log(d));
    }
    return acc.log();
}

struct RelGradients {
    Field d_u, d_v; // relative quotient gradient, zero where the dof is fixed
    double r_u = 0.0, r_v = 0.0;
};

RelGradients relative_gradients(const Field& u, const Field& v, double log_E, double log_C,
                                const Exponents& e, const GridDomain& dom) {
    const std::size_t n = dom.node_count();
    Field ge_u(n, 0.0), ge_v(n, 0.0), gc_u(n, 0.0), gc_v(n, 0.0);
    detail::tri_power_scatter(u, e.p, log_E, dom, ge_u);
    detail::tri_power_scatter(v, e.q, log_E, dom, ge_v);
    detail::coupling_gradient_scaled(u, v, e.alpha, e.beta, log_C, dom, gc_u);
    detail::coupling_gradient_scaled(v, u, e.beta, e.alpha, log_C, dom, gc_v);

    RelGradients out;
    out.d_u.assign(n, 0.0);
    out.d_v.assign(n, 0.0);
    double max_du = 0.0, max_geu = 0.0, max_gcu = 0.0;
    double max_dv = 0.0, max_gev = 0.0, max_gcv = 0.0;
    for (int j = 0; j < dom.ny; ++j) {
        for (int i = 0; i < dom.nx; ++i) {
            const std::size_t k = dom.idx(i, j);
            if (dom.is_interior(i, j)) {
                out.d_u[k] = ge_u[k] - gc_u[k];
                max_du = std::max(max_du, std::abs(out.d_u[k]));
                max_geu = std::max(max_geu, std::abs(ge_u[k]));
                max_gcu = std::max(max_gcu, std::abs(gc_u[k]));
            }
            if (dom.in_domain(i, j)) {
                out.d_v[k] = ge_v[k] - gc_v[k];
                max_dv = std::max(max_dv, std::abs(out.d_v[k]));
                max_gev = std::max(max_gev, std::abs(ge_v[k]));
                max_gcv = std::max(max_gcv, std::abs(gc_v[k]));
            }
        }
    }
    out.r_u = max_du / (max_geu + max_gcu + 1e-300);
    out.r_v = max_dv / (max_gev + max_gcv + 1e-300);
    return out;
}

struct PairState {
    Field u, v;
    double log_Ip = neg_inf; // log int |grad u|^p
    double log_Iq = neg_inf;
    double log_C = neg_inf;
    double log_E = neg_inf;
    double log_lambda = 0.0;
};

void refresh_state(PairState& st, const Exponents& e, const GridDomain& dom) {
    st.log_Ip = detail::log_tri_power_sum(st.u, e.p, dom);
    st.log_Iq = detail::log_tri_power_sum(st.v, e.q, dom);
    st.log_C = detail::log_coupling_sum(st.u, st.v, e.alpha, e.beta, dom);
    st.log_E = log_sum_exp(st.log_Ip - std::log(e.p), st.log_Iq - std::log(e.q));
    st.log_lambda = st.log_E - st.log_C;
}

// spectral step estimate from the last accepted move; <= 0 when unusable
double bb_step(const Field& x, const Field& x_prev, const Field& g, const Field& g_prev) {
    double sxy = 0.0, syy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double dx = x[k] - x_prev[k];
        const double dg = g[k] - g_prev[k];
        sxy += dx * dg;
        syy += dg * dg;
        sxx += dx * dx;
    }
    if (syy > 0.0 && sxy > 0.0) {
        const double eta = sxy / syy;
        if (std::isfinite(eta) && eta > 0.0) return eta;
    }
    if (sxy > 0.0 && sxx > 0.0) {
        const double eta = sxx / sxy;
        if (std::isfinite(eta) && eta > 0.0) return eta;
    }
    return -1.0;
}

double sup_norm(const Field& f) {
    double m = 0.0;
    for (double x : f) m = std::max(m, std::abs(x));
    return m;
}

std::string diag_string(int iter, double lambda, double grad_norm) {
    std::ostringstream os;
    os << "iteration " << iter << ", lambda = " << lambda << ", grad_norm = " << grad_norm;
    return os.str();
}

// probe node on the positive x half-axis used to pin the sign of v
void fix_v_sign(Field& v, const GridDomain& dom) {
    const int jc = (dom.ny - 1) / 2;
    const int ic = (dom.nx - 1) / 2;
    int probe = -1;
    double best = pos_inf;
    for (int i = ic + 1; i < dom.nx; ++i) {
        if (!dom.in_domain(i, jc)) continue;
        const double d = std::abs(dom.x(i) - 0.5 * dom.R);
        if (d < best && v[dom.idx(i, jc)] != 0.0) {
            best = d;
            probe = i;
        }
    }
    if (probe >= 0 && v[dom.idx(probe, jc)] < 0.0)
        for (auto& val : v) val = -val;
}

} // namespace

double shift_constant(const FieldPair& fp, const Exponents& e, const GridDomain& dom) {
    if (!(e.beta > 1.0))
        throw std::invalid_argument("shift_constant requires beta > 1, got " +
                                    std::to_string(e.beta));
    const Field log_wa = detail::make_log_weight_alpha(fp.u, e.alpha, dom);
    return shift_internal(log_wa, fp.v, e.beta, dom).K;
}

Rescale optimal_rescale(const FieldPair& fp, const Exponents& e, const GridDomain& dom) {
    const double log_Ip = detail::log_tri_power_sum(fp.u, e.p, dom);
    const double log_Iq = detail::log_tri_power_sum(fp.v, e.q, dom);
    if (log_Ip == neg_inf)
        throw std::invalid_argument("optimal_rescale: u component is flat (zero gradient energy)");
    if (log_Iq == neg_inf)
        throw std::invalid_argument("optimal_rescale: v component is flat (zero gradient energy)");
    const double log_C = detail::log_coupling_sum(fp.u, fp.v, e.alpha, e.beta, dom);
    if (log_C == neg_inf)
        throw std::invalid_argument("optimal_rescale: coupling integral vanishes");
    const double log_theta = -log_C - (e.alpha / e.p) * (std::log(e.alpha) - log_Ip) -
                             (e.beta / e.q) * (std::log(e.beta) - log_Iq);
    const double a = std::exp((log_theta + std::log(e.alpha) - log_Ip) / e.p);
    const double b = std::exp((log_theta + std::log(e.beta) - log_Iq) / e.q);
    return {a, b};
}

EigenResult solve_first_eigenpair(const GridDomain& dom, const Exponents& e,
                                  const SolverOptions& opts) {
    if (!(e.beta >= 1.0))
        throw std::invalid_argument("solve_first_eigenpair supports beta >= 1, got " +
                                    std::to_string(e.beta));
    if (!(opts.backtrack_factor > 0.0 && opts.backtrack_factor < 1.0))
        throw std::invalid_argument("backtrack_factor must lie in (0,1)");

    // the coupling integrand is kinked in v at beta = 1; a cold start walks
    // there through nearby smooth problems
    if (e.beta == 1.0 && !opts.warm_start) {
        SolverOptions chain = opts;
        for (double frac : {0.5, 0.2, 0.05}) {
            const double beta_s = 1.0 + (e.q - 1.0) * frac;
            const Exponents es = Exponents::make(e.p, e.q, e.p * (1.0 - beta_s / e.q));
            chain.warm_start = solve_first_eigenpair(dom, es, chain).fields;
        }
        return solve_first_eigenpair(dom, e, chain);
    }

    PairState st;
    if (opts.warm_start) {
        st.u = opts.warm_start->u;
        st.v = opts.warm_start->v;
        if (st.u.size() != dom.node_count() || st.v.size() != dom.node_count())
            throw std::invalid_argument("warm start fields do not match the grid");
        clamp_dirichlet(st.u, dom);
    } else {
        std::mt19937_64 rng(opts.seed);
        st.u = distance_profile(dom);
        double umax = 0.0;
        for (double x : st.u) umax = std::max(umax, x);
        st.v = coordinate_field(dom);
        for (int j = 0; j < dom.ny; ++j) {
            for (int i = 0; i < dom.nx; ++i) {
                if (!dom.in_domain(i, j)) continue;
                const std::size_t k = dom.idx(i, j);
                if (dom.is_interior(i, j)) st.u[k] += 0.01 * umax * uniform_sym(rng);
                st.v[k] += 0.01 * dom.R * uniform_sym(rng);
            }
        }
    }

    // project the start onto {constraint = 0, coupling = 1}
    double constraint_rel = 0.0;
    auto project = [&](Field& u, Field& v) {
        const Field log_wa = detail::make_log_weight_alpha(u, e.alpha, dom);
        const ShiftResult sh = shift_internal(log_wa, v, e.beta, dom);
        for (std::size_t k = 0; k < v.size(); ++k)
            if (dom.quad_weight[k] > 0.0) v[k] -= sh.K;
        constraint_rel = sh.rel_residual;
        const Rescale ab = optimal_rescale({u, v}, e, dom);
        for (std::size_t k = 0; k < u.size(); ++k) {
            u[k] *= ab.a;
            v[k] *= ab.b;
        }
    };
    project(st.u, st.v);
    refresh_state(st, e, dom);

    EigenResult res;
    res.quotient_history.push_back(std::exp(st.log_lambda));

    int accepted = 0;
    double grad_norm = pos_inf;
    const double log_p = std::log(e.p);
    const double log_q = std::log(e.q);

    Field prev_u, prev_v, prev_du, prev_dv;
    bool have_prev = false;
    double plateau_ref = st.log_lambda;
    int plateau_iter = 0;

    for (int iter = 0; iter < opts.max_iter; ++iter) {
        const RelGradients g =
            relative_gradients(st.u, st.v, st.log_E, st.log_C, e, dom);
        grad_norm = std::max(g.r_u, g.r_v);
        if (opts.observer)
            opts.observer({iter, std::exp(st.log_lambda), grad_norm, constraint_rel,
                           std::exp(st.log_C)});
        if (grad_norm <= opts.tol_grad) break;
        // floating-point floor: steps still "succeed" but the quotient no
        // longer moves; stop rather than burn the iteration budget
        if (iter - plateau_iter >= 50) {
            if (plateau_ref - st.log_lambda <= 1e-10 * (std::abs(plateau_ref) + 1.0)) break;
            plateau_ref = st.log_lambda;
            plateau_iter = iter;
        }

        // per-block spectral steps; the backtracking below keeps the quotient
        // history monotone regardless
        double eta_u = -1.0, eta_v = -1.0;
        if (have_prev) {
            eta_u = bb_step(st.u, prev_u, g.d_u, prev_du);
            eta_v = bb_step(st.v, prev_v, g.d_v, prev_dv);
        }
        const double du_sup = sup_norm(g.d_u);
        const double dv_sup = sup_norm(g.d_v);
        if (du_sup == 0.0 && dv_sup == 0.0) break;
        if (eta_u <= 0.0) eta_u = du_sup > 0.0 ? opts.step0 / du_sup : 0.0;
        if (eta_v <= 0.0) eta_v = dv_sup > 0.0 ? opts.step0 / dv_sup : 0.0;

        prev_u = st.u;
        prev_v = st.v;
        prev_du = g.d_u;
        prev_dv = g.d_v;
        have_prev = true;

        bool ok = false;
        double t = 1.0;
        Field ut(dom.node_count()), vt(dom.node_count());
        for (int bt = 0; bt < 60; ++bt, t *= opts.backtrack_factor) {
            for (std::size_t k = 0; k < dom.node_count(); ++k) {
                ut[k] = st.u[k] - t * eta_u * g.d_u[k];
                vt[k] = st.v[k] - t * eta_v * g.d_v[k];
            }
            clamp_dirichlet(ut, dom);

            const double log_Ip_t = detail::log_tri_power_sum(ut, e.p, dom);
            if (log_Ip_t == neg_inf) continue;
            const double log_Iq_t = detail::log_tri_power_sum(vt, e.q, dom);
            if (log_Iq_t == neg_inf) continue;

            const Field log_wa = detail::make_log_weight_alpha(ut, e.alpha, dom);
            const ShiftResult sh = shift_internal(log_wa, vt, e.beta, dom);
            const double log_C_t = log_coupling_from_wa(log_wa, vt, sh.K, e.beta);
            if (log_C_t == neg_inf) continue;

            // the rescaled quotient equals the multiplier of the stationarity
            // system, so no extra integral pass is needed for the trial value
            const double log_theta = -log_C_t -
                                     (e.alpha / e.p) * (std::log(e.alpha) - log_Ip_t) -
                                     (e.beta / e.q) * (std::log(e.beta) - log_Iq_t);
            if (!(log_theta < st.log_lambda)) continue;

            const double log_a = (log_theta + std::log(e.alpha) - log_Ip_t) / e.p;
            const double log_b = (log_theta + std::log(e.beta) - log_Iq_t) / e.q;
            const double a = std::exp(log_a), b = std::exp(log_b);
            for (std::size_t k = 0; k < dom.node_count(); ++k) {
                st.u[k] = a * ut[k];
                st.v[k] = b * (vt[k] - (dom.quad_weight[k] > 0.0 ? sh.K : 0.0));
            }
            constraint_rel = sh.rel_residual;
            st.log_Ip = log_Ip_t + e.p * log_a;
            st.log_Iq = log_Iq_t + e.q * log_b;
            st.log_C = log_C_t + e.alpha * log_a + e.beta * log_b;
            st.log_E = log_sum_exp(st.log_Ip - log_p, st.log_Iq - log_q);
            st.log_lambda = st.log_E - st.log_C;
            res.quotient_history.push_back(std::exp(st.log_lambda));
            ++accepted;
            ok = true;
            break;
        }
        if (!ok) {
            // no descent step left: at the numerical floor of the discrete
            // minimum, or genuinely stuck on a large gradient
            const double stall_cap = e.beta == 1.0 ? 0.5 : 1e-3;
            if (grad_norm <= std::max(100.0 * opts.tol_grad, stall_cap)) break;
            throw stagnation_error("solver stagnated: quotient non-decreasing after 60 "
                                   "backtracks at " +
                                   diag_string(iter, std::exp(st.log_lambda), grad_norm));
        }
    }

    fix_v_sign(st.v, dom);
    refresh_state(st, e, dom);

    const RelGradients gf =
        relative_gradients(st.u, st.v, st.log_E, st.log_C, e, dom);
    res.el_residual_u = gf.r_u;
    res.el_residual_v = gf.r_v;
    const Field log_wa = detail::make_log_weight_alpha(st.u, e.alpha, dom);
    res.constraint_residual = detail::constraint_split(log_wa, st.v, 0.0, e.beta, dom).value();
    res.fields = {std::move(st.u), std::move(st.v)};
    res.iterations = accepted;
    res.log_lambda = st.log_lambda;
    res.lambda = std::exp(st.log_lambda);
    res.lambda_root_p = std::exp(st.log_lambda / e.p);
    return res;
}

ElResidual euler_lagrange_residual(const EigenResult& res, const Exponents& e,
                                   const GridDomain& dom) {
    PairState st;
    st.u = res.fields.u;
    st.v = res.fields.v;
    refresh_state(st, e, dom);
    const RelGradients g =
        relative_gradients(st.u, st.v, st.log_E, st.log_C, e, dom);
    return {g.r_u, g.r_v};
}

namespace {

double scalar_eig(const GridDomain& dom, double power, const SolverOptions& opts,
                  bool dirichlet, Field* field_out) {
    if (!(power > 1.0)) throw std::invalid_argument("scalar eigensolver requires exponent > 1");

    std::mt19937_64 rng(opts.seed);
    Field f;
    if (opts.warm_start) {
        // the u slot of the warm-start pair seeds the scalar field
        f = opts.warm_start->u;
        if (f.size() != dom.node_count())
            throw std::invalid_argument("warm start field does not match the grid");
        if (dirichlet) clamp_dirichlet(f, dom);
    } else if (dirichlet) {
        f = distance_profile(dom);
        double fmax = 0.0;
        for (double x : f) fmax = std::max(fmax, x);
        for (int j = 0; j < dom.ny; ++j)
            for (int i = 0; i < dom.nx; ++i)
                if (dom.is_interior(i, j))
                    f[dom.idx(i, j)] += 0.01 * fmax * uniform_sym(rng);
    } else {
        f = coordinate_field(dom);
        for (int j = 0; j < dom.ny; ++j)
            for (int i = 0; i < dom.nx; ++i)
                if (dom.in_domain(i, j)) f[dom.idx(i, j)] += 0.01 * dom.R * uniform_sym(rng);
    }

    Field log_w(dom.node_count(), neg_inf);
    for (std::size_t k = 0; k < dom.node_count(); ++k)
        if (dom.quad_weight[k] > 0.0) log_w[k] = std::log(dom.quad_weight[k]);

    auto shift_and_normalize = [&](Field& g) {
        if (!dirichlet) {
            const ShiftResult sh = shift_internal(log_w, g, power, dom);
            for (std::size_t k = 0; k < g.size(); ++k)
                if (dom.quad_weight[k] > 0.0) g[k] -= sh.K;
        }
        const double lm = log_mass(g, power, dom);
        const double scale = std::exp(-lm / power);
        for (double& x : g) x *= scale;
    };
    shift_and_normalize(f);

    double log_I = detail::log_tri_power_sum(f, power, dom);
    double log_lambda = log_I; // mass normalized to 1

    const std::size_t n = dom.node_count();
    Field ge(n, 0.0), gm(n, 0.0), d(n, 0.0), ft(n, 0.0);
    Field prev_f, prev_d;
    bool have_prev = false;
    double plateau_ref = log_lambda;
    int plateau_iter = 0;

    for (int iter = 0; iter < opts.max_iter; ++iter) {
        if (iter - plateau_iter >= 50) {
            if (plateau_ref - log_lambda <= 1e-10 * (std::abs(plateau_ref) + 1.0)) break;
            plateau_ref = log_lambda;
            plateau_iter = iter;
        }
        std::fill(ge.begin(), ge.end(), 0.0);
        detail::tri_power_scatter(f, power, log_I, dom, ge);
        double max_d = 0.0, max_ge = 0.0, max_gm = 0.0;
        for (int j = 0; j < dom.ny; ++j) {
            for (int i = 0; i < dom.nx; ++i) {
                const std::size_t k = dom.idx(i, j);
                gm[k] = 0.0;
                d[k] = 0.0;
                const bool free_dof = dirichlet ? dom.is_interior(i, j) : dom.in_domain(i, j);
                if (!free_dof) continue;
                const double a = std::abs(f[k]);
                if (a > 0.0 && dom.quad_weight[k] > 0.0)
                    gm[k] = (f[k] > 0.0 ? 1.0 : -1.0) *
                            std::exp(log_w[k] + (power - 1.0) * std::log(a));
                d[k] = ge[k] - gm[k];
                max_d = std::max(max_d, std::abs(d[k]));
                max_ge = std::max(max_ge, std::abs(ge[k]));
                max_gm = std::max(max_gm, std::abs(gm[k]));
            }
        }
        const double r = max_d / (max_ge + max_gm + 1e-300);
        if (r <= opts.tol_grad) break;
        if (max_d == 0.0) break;

        double eta = have_prev ? bb_step(f, prev_f, d, prev_d) : -1.0;
        if (eta <= 0.0) eta = opts.step0 / max_d;
        prev_f = f;
        prev_d = d;
        have_prev = true;

        bool ok = false;
        double t = 1.0;
        for (int bt = 0; bt < 60; ++bt, t *= opts.backtrack_factor) {
            for (std::size_t k = 0; k < n; ++k) ft[k] = f[k] - t * eta * d[k];
            if (dirichlet) clamp_dirichlet(ft, dom);
            const double log_I_t = detail::log_tri_power_sum(ft, power, dom);
            if (log_I_t == neg_inf) continue;
            double shift_K = 0.0;
            if (!dirichlet) shift_K = shift_internal(log_w, ft, power, dom).K;
            Field shifted = ft;
            if (!dirichlet)
                for (std::size_t k = 0; k < n; ++k)
                    if (dom.quad_weight[k] > 0.0) shifted[k] -= shift_K;
            const double log_M_t = log_mass(shifted, power, dom);
            if (log_M_t == neg_inf) continue;
            const double log_lambda_t = log_I_t - log_M_t;
            if (!(log_lambda_t < log_lambda)) continue;
            const double scale = std::exp(-log_M_t / power);
            for (std::size_t k = 0; k < n; ++k) f[k] = shifted[k] * scale;
            log_I = log_I_t + power * std::log(scale);
            log_lambda = log_lambda_t;
            ok = true;
            break;
        }
        if (!ok) {
            if (r <= std::max(100.0 * opts.tol_grad, 1e-3)) break;
            throw stagnation_error("scalar eigensolver stagnated at " +
                                   diag_string(iter, std::exp(log_lambda), r));
        }
    }

    if (field_out) *field_out = f;
    return std::exp(log_lambda);
}

} // namespace

double scalar_dirichlet_eig(const GridDomain& dom, double p, const SolverOptions& opts,
                            Field* eigenfunction) {
    return scalar_eig(dom, p, opts, true, eigenfunction);
}

double scalar_neumann_eig(const GridDomain& dom, double q, const SolverOptions& opts,
                          Field* eigenfunction) {
    return scalar_eig(dom, q, opts, false, eigenfunction);
}

} // namespace pqeig
