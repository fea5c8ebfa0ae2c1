#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pqeig/eigensolver.hpp"
#include "pqeig/exponents.hpp"
#include "pqeig/fields.hpp"
#include "pqeig/geometry.hpp"

namespace pqeig {

/// Parameters of the large-exponent limit: alpha/p -> gamma, q/p -> Q.
/// L present means rectangle (-R,R)x(-L,L), absent means the disk of radius R.
struct LimitSpec {
    double gamma = 0.5;
    double Q = 1.0;
    double R = 1.0;
    std::optional<double> L;

    void validate() const;
    bool is_rectangle() const { return L.has_value(); }
};

/// Cone/plane candidate: u = k1 * (rho - |x - (a,0)|)_+ (mirrored at (-a,0)
/// on the rectangle), v = k2 * x1.  Normalized so that
/// k1^gamma * k2^((1-gamma)Q) * M == 1 with M the profile maximum.
struct AnsatzConfig {
    double a = 0.0;       // apex abscissa
    double rho = 0.0;     // cone radius
    double k1 = 0.0;      // cone slope
    double k2 = 0.0;      // plane slope
    double M = 0.0;       // max of (rho-|s-a|)^gamma |s|^((1-gamma)Q)
    double touch_s = 0.0; // abscissa where the profile peaks
};

/// Closed-form limit value on the ball of radius R, evaluated in log domain.
double lambda_inf_ball(const LimitSpec& s);

struct RectangleLimit {
    double value = 0.0;
    int branch = 0;         // 1: ball formula applies, 2: thin-rectangle branch
    double threshold = 0.0; // gamma*R / (Q*(1-gamma)), compared against L
};

/// Two-branch closed form on the rectangle, taken verbatim.
RectangleLimit lambda_inf_rectangle(const LimitSpec& s);

/// Peak abscissa of (R-s)^gamma s^((1-gamma)Q): a = Q(1-gamma)R/(gamma+Q(1-gamma)).
double optimal_touch_point(const LimitSpec& s);

struct ProfileMax {
    double s_star = 0.0;
    double M = 0.0;
};

/// Dense scan of (R-s)^gamma s^((1-gamma)Q) over n+1 samples plus
/// golden-section refinement; n >= 1000 required.
ProfileMax profile_max_bruteforce(const LimitSpec& s, int n);

struct AnsatzOracle {
    AnsatzConfig best;
    double lambda = 0.0; // 1 / max_a M(a)
};

/// Brute-force search over the cone/plane family on the rectangle: apex
/// a in [0,R) with cone radius rho = min(L, R-a); slopes equalized as
/// k1 = k2^Q = 1/M.
AnsatzOracle ansatz_oracle_rectangle(const LimitSpec& s, int n);

/// Config used to sample limit fields on a grid: closed-form construction on
/// the ball; on the rectangle the closed-form branch-1 geometry when it fits,
/// otherwise the oracle's best.
AnsatzConfig ansatz_for(const LimitSpec& s, int oracle_samples = 2000);

/// Raw samples of the cone (not clamped on the boundary set) and the plane.
Field sample_cone(const AnsatzConfig& c, const LimitSpec& s, const GridDomain& dom);
Field sample_plane(const AnsatzConfig& c, const GridDomain& dom);

/// Grid pair for the limit candidate with u clamped on the boundary set so
/// the pair is admissible as a competitor.
FieldPair cone_plane_pair(const LimitSpec& s, const GridDomain& dom);

struct SweepRow {
    double p, q, alpha, beta;
    double lambda;
    double lambda_root_p;
    std::optional<double> reference; // closed-form limit value when available
    std::optional<double> rel_gap;   // |lambda^(1/p) - reference| / reference
};

struct SweepResult {
    std::vector<SweepRow> rows;
    bool completed = false;
    std::string error; // empty unless a row failed
};

/// Warm-started solves along alpha = gamma*p, q = Q*p; a row failure aborts
/// the sweep and the rows solved so far are returned.
SweepResult continuation_sweep(const GridDomain& dom, const LimitSpec& s,
                               const std::vector<double>& p_schedule,
                               const SolverOptions& opts);

} // namespace pqeig
