#include "pqeig/infinity_limit.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace pqeig {

namespace {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

// golden-section maximizer; f may return -inf at the bracket edges
template <class F>
std::pair<double, double> golden_max(F&& f, double lo, double hi, int iters = 120) {
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double x1 = b - phi * (b - a);
    double x2 = a + phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters; ++i) {
        if (b - a <= 1e-15 * (std::abs(a) + std::abs(b) + 1e-12)) break;
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        }
    }
    return f1 > f2 ? std::pair<double, double>{x1, f1} : std::pair<double, double>{x2, f2};
}

} // namespace

void LimitSpec::validate() const {
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::invalid_argument("limit spec: gamma must lie in (0,1), got " +
                                    std::to_string(gamma));
    if (!(Q > 0.0) || !std::isfinite(Q))
        throw std::invalid_argument("limit spec: Q must be finite and positive");
    if (!(R > 0.0) || !std::isfinite(R))
        throw std::invalid_argument("limit spec: R must be finite and positive");
    if (L) {
        if (!(*L > 0.0) || !std::isfinite(*L))
            throw std::invalid_argument("limit spec: L must be finite and positive");
        if (*L > R)
            throw std::invalid_argument("limit spec: L must satisfy L <= R (got L = " +
                                        std::to_string(*L) + ", R = " + std::to_string(R) + ")");
    }
}

double lambda_inf_ball(const LimitSpec& s) {
    s.validate();
    const double g = s.gamma;
    const double gc = 1.0 - g;
    const double num = g + s.Q * gc;
    return std::exp(g * (std::log(num) - std::log(g * s.R)) +
                    gc * s.Q * (std::log(num) - std::log(s.Q * gc * s.R)));
}

RectangleLimit lambda_inf_rectangle(const LimitSpec& s) {
    s.validate();
    if (!s.L) throw std::invalid_argument("lambda_inf_rectangle needs L");
    RectangleLimit out;
    out.threshold = s.gamma * s.R / (s.Q * (1.0 - s.gamma));
    if (out.threshold <= *s.L) {
        out.branch = 1;
        out.value = lambda_inf_ball(s);
    } else {
        out.branch = 2;
        out.value = std::exp(-s.gamma * std::log(s.R - *s.L) - (1.0 - s.gamma) * std::log(*s.L));
    }
    return out;
}

double optimal_touch_point(const LimitSpec& s) {
    s.validate();
    const double qc = s.Q * (1.0 - s.gamma);
    return qc * s.R / (s.gamma + qc);
}

ProfileMax profile_max_bruteforce(const LimitSpec& s, int n) {
    s.validate();
    if (n < 1000)
        throw std::invalid_argument("profile_max_bruteforce needs n >= 1000, got " +
                                    std::to_string(n));
    const double g = s.gamma;
    const double e2 = (1.0 - g) * s.Q;
    auto lp = [&](double x) {
        if (!(x > 0.0 && x < s.R)) return neg_inf;
        return g * std::log(s.R - x) + e2 * std::log(x);
    };
    int best = 1;
    double best_v = neg_inf;
    for (int i = 0; i <= n; ++i) {
        const double v = lp(s.R * i / n);
        if (v > best_v) {
            best_v = v;
            best = i;
        }
    }
    const double lo = s.R * std::max(0, best - 1) / n;
    const double hi = s.R * std::min(n, best + 1) / n;
    auto [x, v] = golden_max(lp, lo, hi);
    return {x, std::exp(v)};
}

namespace {

// log of max_s (rho - |s-a|)^gamma |s|^((1-gamma)Q) over s in [a-rho, a+rho]
std::pair<double, double> cone_profile_peak(double a, double rho, double gamma, double e2) {
    auto lp = [&](double sv) {
        const double c = rho - std::abs(sv - a);
        if (!(c > 0.0) || sv == 0.0) return neg_inf;
        return gamma * std::log(c) + e2 * std::log(std::abs(sv));
    };
    const int m = 600;
    const double lo = a - rho, hi = a + rho;
    int best = 0;
    double best_v = neg_inf;
    for (int i = 0; i <= m; ++i) {
        const double v = lp(lo + (hi - lo) * i / m);
        if (v > best_v) {
            best_v = v;
            best = i;
        }
    }
    const double blo = lo + (hi - lo) * std::max(0, best - 1) / m;
    const double bhi = lo + (hi - lo) * std::min(m, best + 1) / m;
    auto [sv, v] = golden_max(lp, blo, bhi);
    return {v, sv};
}

} // namespace

AnsatzOracle ansatz_oracle_rectangle(const LimitSpec& s, int n) {
    s.validate();
    if (!s.L) throw std::invalid_argument("ansatz_oracle_rectangle needs a rectangle spec");
    if (n < 16) throw std::invalid_argument("ansatz_oracle_rectangle needs n >= 16");
    const double g = s.gamma;
    const double e2 = (1.0 - g) * s.Q;

    auto peak_at = [&](double a) {
        const double rho = std::min(*s.L, s.R - a);
        return cone_profile_peak(a, rho, g, e2).first;
    };

    int best = 0;
    double best_v = neg_inf;
    for (int j = 0; j < n; ++j) {
        const double v = peak_at(s.R * j / n);
        if (v > best_v) {
            best_v = v;
            best = j;
        }
    }
    const double lo = s.R * std::max(0, best - 1) / n;
    const double hi = std::min(s.R * (best + 1.0) / n, s.R * (1.0 - 1e-12));
    auto [a_star, logM] = golden_max(peak_at, lo, hi);

    AnsatzOracle out;
    out.best.a = a_star;
    out.best.rho = std::min(*s.L, s.R - a_star);
    out.best.touch_s = cone_profile_peak(a_star, out.best.rho, g, e2).second;
    out.best.M = std::exp(logM);
    out.best.k1 = std::exp(-logM);
    out.best.k2 = std::exp(-logM / s.Q);
    out.lambda = out.best.k1;
    return out;
}

AnsatzConfig ansatz_for(const LimitSpec& s, int oracle_samples) {
    s.validate();
    if (s.is_rectangle()) return ansatz_oracle_rectangle(s, oracle_samples).best;
    const double lam = lambda_inf_ball(s);
    AnsatzConfig c;
    c.a = 0.0; // ball cone apex sits at the center
    c.rho = s.R;
    c.touch_s = optimal_touch_point(s);
    const ProfileMax pm = profile_max_bruteforce(s, 4000);
    c.M = pm.M;
    c.k1 = lam;
    c.k2 = std::exp(std::log(lam) / s.Q);
    return c;
}

Field sample_cone(const AnsatzConfig& c, const LimitSpec& s, const GridDomain& dom) {
    Field u(dom.node_count(), 0.0);
    const bool mirrored = s.is_rectangle() && c.a > 0.0;
    for (int j = 0; j < dom.ny; ++j) {
        for (int i = 0; i < dom.nx; ++i) {
            if (!dom.in_domain(i, j)) continue;
            const double px = dom.x(i);
            const double py = dom.y(j);
            const double dp = std::sqrt((px - c.a) * (px - c.a) + py * py);
            double h = c.rho - dp;
            if (mirrored) {
                const double dm = std::sqrt((px + c.a) * (px + c.a) + py * py);
                h = std::max(h, c.rho - dm);
            }
            u[dom.idx(i, j)] = c.k1 * std::max(h, 0.0);
        }
    }
    return u;
}

Field sample_plane(const AnsatzConfig& c, const GridDomain& dom) {
    Field v(dom.node_count(), 0.0);
    for (int j = 0; j < dom.ny; ++j)
        for (int i = 0; i < dom.nx; ++i)
            if (dom.in_domain(i, j)) v[dom.idx(i, j)] = c.k2 * dom.x(i);
    return v;
}

namespace {

void check_domain_matches(const LimitSpec& s, const GridDomain& dom) {
    const bool rect = dom.kind == DomainKind::rectangle;
    if (rect != s.is_rectangle())
        throw std::invalid_argument("limit spec and grid domain disagree on the domain kind");
    if (std::abs(dom.R - s.R) > 1e-12 * s.R)
        throw std::invalid_argument("limit spec and grid domain disagree on R");
    if (rect && std::abs(dom.L - *s.L) > 1e-12 * *s.L)
        throw std::invalid_argument("limit spec and grid domain disagree on L");
}

} // namespace

FieldPair cone_plane_pair(const LimitSpec& s, const GridDomain& dom) {
    s.validate();
    check_domain_matches(s, dom);
    const AnsatzConfig c = ansatz_for(s);
    FieldPair fp;
    fp.u = sample_cone(c, s, dom);
    clamp_dirichlet(fp.u, dom);
    fp.v = sample_plane(c, dom);
    return fp;
}

SweepResult continuation_sweep(const GridDomain& dom, const LimitSpec& s,
                               const std::vector<double>& p_schedule,
                               const SolverOptions& opts) {
    s.validate();
    check_domain_matches(s, dom);
    const double reference = s.is_rectangle() ? lambda_inf_rectangle(s).value
                                              : lambda_inf_ball(s);

    SweepResult out;
    SolverOptions row_opts = opts;
    for (double p : p_schedule) {
        try {
            const Exponents e = Exponents::schedule(p, s.gamma, s.Q);
            if (!e.theory_flag())
                throw std::invalid_argument("schedule row p = " + std::to_string(p) +
                                            " yields beta = " + std::to_string(e.beta) +
                                            " <= 1");
            const EigenResult r = solve_first_eigenpair(dom, e, row_opts);
            SweepRow row;
            row.p = e.p;
            row.q = e.q;
            row.alpha = e.alpha;
            row.beta = e.beta;
            row.lambda = r.lambda;
            row.lambda_root_p = r.lambda_root_p;
            row.reference = reference;
            row.rel_gap = std::abs(r.lambda_root_p - reference) / reference;
            out.rows.push_back(row);
            row_opts.warm_start = r.fields; // continuation
        } catch (const std::exception& ex) {
            out.completed = false;
            out.error = ex.what();
            return out;
        }
    }
    out.completed = true;
    return out;
}

} // namespace pqeig
