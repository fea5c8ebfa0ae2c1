#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pqeig/calculus.hpp"
#include "pqeig/exponents.hpp"
#include "pqeig/fields.hpp"
#include "pqeig/geometry.hpp"

namespace pqeig {

struct stagnation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IterationInfo {
    int iter;
    double lambda;
    double grad_norm;       // max of the two relative defects below
    double constraint_rel;  // |c| / int |u|^a |v-K|^{b-1}
    double coupling_value;
};

struct SolverOptions {
    int max_iter = 5000;
    double tol_grad = 1e-6;
    double tol_constraint = 1e-8;
    double step0 = 0.25;
    double backtrack_factor = 0.5;
    std::uint64_t seed = 0;
    std::optional<FieldPair> warm_start;
    std::function<void(const IterationInfo&)> observer; // optional per-iteration hook
};

struct EigenResult {
    double lambda = 0.0;
    double log_lambda = 0.0;
    double lambda_root_p = 0.0; // lambda^(1/p)
    FieldPair fields;           // coupling == 1
    int iterations = 0;
    std::vector<double> quotient_history; // non-increasing
    double constraint_residual = 0.0;     // signed constraint integral at the solution
    double el_residual_u = 0.0;           // relative weak-form defects, dimensionless
    double el_residual_v = 0.0;
};

/// Rescale factors (a, b) minimizing the energy of (a u, b v) subject to
/// coupling(a u, b v) = 1; at the optimum beta*p*a^p*A == alpha*q*b^q*B.
struct Rescale {
    double a;
    double b;
};

/// The unique K with int |u|^alpha |v-K|^{beta-2}(v-K) = 0, by bisection on
/// [min v, max v]; the map is strictly decreasing in K.
double shift_constant(const FieldPair& fp, const Exponents& e, const GridDomain& dom);

Rescale optimal_rescale(const FieldPair& fp, const Exponents& e, const GridDomain& dom);

/// Projected descent for the constrained Rayleigh quotient: gradient step,
/// Dirichlet clamp, constraint shift, coupling rescale, backtracking line
/// search.  beta >= 1 supported (beta = 1 uses the weighted-median shift).
EigenResult solve_first_eigenpair(const GridDomain& dom, const Exponents& e,
                                  const SolverOptions& opts);

struct ElResidual {
    double r_u;
    double r_v;
};

/// Relative dual-norm defects of the weak form over nodal hat tests: u-tests
/// vanish on the boundary set, v-tests are free there (audits the natural
/// Neumann condition).
ElResidual euler_lagrange_residual(const EigenResult& res, const Exponents& e,
                                   const GridDomain& dom);

/// First eigenvalue of the Dirichlet p-Laplacian: min int|grad u|^p / int|u|^p
/// over u vanishing on the boundary set.
double scalar_dirichlet_eig(const GridDomain& dom, double p, const SolverOptions& opts,
                            Field* eigenfunction = nullptr);

/// First nontrivial Neumann q-Laplacian eigenvalue: min int|grad v|^q /
/// int|v|^q over int |v|^{q-2} v = 0.
double scalar_neumann_eig(const GridDomain& dom, double q, const SolverOptions& opts,
                          Field* eigenfunction = nullptr);

} // namespace pqeig
