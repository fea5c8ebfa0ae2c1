#pragma once

#include <stdexcept>

#include "pqeig/exponents.hpp"
#include "pqeig/fields.hpp"
#include "pqeig/geometry.hpp"

namespace pqeig {

/// Raised when a power-law integrand exceeds the double range; the fix is to
/// rescale the fields (all integrands here are homogeneous).
struct scale_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Central differences at nodes with two in-domain neighbours, one-sided at
/// boundary nodes and at masked-edge nodes missing a neighbour.  Outside
/// nodes get zero.
VectorField gradient_field(const Field& f, const GridDomain& dom);

/// Trapezoid-style quadrature: sum of f * quad_weight over in-domain nodes.
double integrate(const Field& f, const GridDomain& dom);

/// E = int |grad u|^p / p + int |grad v|^q / q.  The gradient energy is
/// assembled over piecewise-linear triangle cells (each grid square split
/// along alternating diagonals): the 2h-wide node-centred stencil has a
/// checkerboard null space that lets large-p minimizers hide oscillations
/// from the energy, which collapses the eigenvalue.  Cell powers are
/// evaluated in the log domain (|g|^p = exp(p log|g|), zero cells contribute
/// nothing).
double energy(const FieldPair& fp, const Exponents& e, const GridDomain& dom);

/// int |u|^alpha |v|^beta, per-node product as exp(alpha log|u| + beta log|v|).
double coupling(const FieldPair& fp, const Exponents& e, const GridDomain& dom);

/// int |u|^alpha |v|^{beta-2} v with the continuous-extension value 0 where
/// v = 0.  Requires beta > 1.
double constraint_value(const FieldPair& fp, const Exponents& e, const GridDomain& dom);

/// energy / coupling; throws when the coupling integral vanishes.
double rayleigh_quotient(const FieldPair& fp, const Exponents& e, const GridDomain& dom);

/// <D2f grad f, grad f> via central first/second/cross differences; defined
/// only where the full 9-point stencil lies in the domain.
MaskedField infinity_laplacian(const Field& f, const GridDomain& dom);

/// Exact gradient of the discrete energy w.r.t. nodal values (adjoint of the
/// difference stencils).  Matches finite differences of energy().
FieldPair energy_gradient(const FieldPair& fp, const Exponents& e, const GridDomain& dom);

namespace detail {

// log( int |grad f|^power ) over the triangle cells; -inf when f is flat
double log_tri_power_sum(const Field& f, double power, const GridDomain& dom);

// accumulate into out[k] the adjoint of the triangle-cell gradients applied
// to the flux w_T * exp((power-2)*log|g_T| - log_ref) * g_T
void tri_power_scatter(const Field& f, double power, double log_ref, const GridDomain& dom,
                       Field& out);

// log( int exp(a log|u| + b log|v|) ); -inf when the product vanishes a.e.
double log_coupling_sum(const Field& u, const Field& v, double a, double b,
                        const GridDomain& dom);

// positive/negative parts of int |u|^alpha |v-K|^{beta-2}(v-K), in logs
struct SignedSplit {
    double log_pos;
    double log_neg;
    double value() const;        // pos - neg
    double rel_residual() const; // |pos-neg| / (pos+neg); 0 when both vanish
    double log_scale() const;    // log(pos + neg)
};

// log_wa[k] = log(w_k) + alpha*log|u_k| precomputed by the caller (-inf ok)
SignedSplit constraint_split(const Field& log_wa, const Field& v, double K, double beta,
                             const GridDomain& dom);

Field make_log_weight_alpha(const Field& u, double alpha, const GridDomain& dom);

// relative coupling gradient: out[k] = a*sgn(u_k)*exp(log w + (a-1)log|u| + b log|v| - log_ref)
void coupling_gradient_scaled(const Field& u, const Field& v, double a, double b,
                              double log_ref, const GridDomain& dom, Field& out);

} // namespace detail

} // namespace pqeig
