#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace pqeig {

/// Exponent quadruple (p, q, alpha, beta) tied by alpha/p + beta/q = 1.
struct Exponents {
    double p = 2.0;
    double q = 2.0;
    double alpha = 1.0;
    double beta = 1.0;

    bool theory_flag() const { return beta > 1.0; }

    double coupling_identity_defect() const { return std::abs(alpha / p + beta / q - 1.0); }

    /// beta is derived as q*(1 - alpha/p).
    static Exponents make(double p, double q, double alpha) {
        if (!(std::isfinite(p) && p > 1.0)) throw std::invalid_argument("exponent p must be > 1");
        if (!(std::isfinite(q) && q > 1.0)) throw std::invalid_argument("exponent q must be > 1");
        if (!(std::isfinite(alpha) && alpha > 0.0))
            throw std::invalid_argument("exponent alpha must be > 0");
        Exponents e;
        e.p = p;
        e.q = q;
        e.alpha = alpha;
        e.beta = q * (1.0 - alpha / p);
        if (!(e.beta > 0.0))
            throw std::invalid_argument("derived beta = q*(1 - alpha/p) must be > 0, got " +
                                        std::to_string(e.beta));
        if (e.coupling_identity_defect() > 1e-12)
            throw std::invalid_argument("alpha/p + beta/q deviates from 1 beyond 1e-12");
        return e;
    }

    /// Schedule form: alpha = gamma*p, q = q_ratio*p, beta = q*(1-gamma).
    static Exponents schedule(double p, double gamma, double q_ratio) {
        if (!(gamma > 0.0 && gamma < 1.0))
            throw std::invalid_argument("schedule gamma must lie in (0,1)");
        if (!(q_ratio > 0.0)) throw std::invalid_argument("schedule ratio q/p must be > 0");
        return make(p, q_ratio * p, gamma * p);
    }
};

} // namespace pqeig
