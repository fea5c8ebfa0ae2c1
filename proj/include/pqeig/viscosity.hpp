#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "pqeig/exponents.hpp"
#include "pqeig/fields.hpp"
#include "pqeig/geometry.hpp"
#include "pqeig/infinity_limit.hpp"

namespace pqeig {

enum class Region : std::uint8_t { v_pos, v_neg, v_zero, boundary, excluded };

/// Pointwise strong-form checks are meaningless on the singular sets (cone
/// apexes, ridge lines), so those neighbourhoods are tagged excluded.
struct ResidualOptions {
    double exclusion_radius = -1.0; // < 0 picks 3h
    std::vector<std::array<double, 2>> exclusion_centers; // default: cone apexes
    double rim_radius = 0.0;      // > 0: exclude the ring |dist-to-apex - rim| <= radius
    double axis_halfwidth = 0.0;  // > 0: exclude the strip |x1| <= halfwidth
    double deadband_kappa = 2.0;  // {v=0} band: |v| <= kappa*h*||grad v||_inf
};

struct ResidualReport {
    Field residual;                     // signed defect field
    std::vector<std::uint8_t> defined;  // stencil-complete nodes (plus boundary)
    std::vector<Region> region;
    double sup_defect = 0.0;          // over defined non-excluded interior tags
    double boundary_sup_defect = 0.0; // over boundary-tagged nodes
    double excluded_radius = 0.0;
};

/// min{ -D_inf u, |grad u| - Lambda u^gamma |v|^((1-gamma)Q) } at interior
/// nodes; boundary nodes report the Dirichlet trace u itself.
ResidualReport h_infinity_residual(const Field& u, const Field& v, double Lambda,
                                   const LimitSpec& s, const GridDomain& dom,
                                   const ResidualOptions& opts = {});

/// Sign-split operator for the Neumann component: min-form in {v>0}, max-form
/// in {v<0}, -D_inf v in the deadband; boundary nodes report <grad v, nu>.
ResidualReport f_infinity_residual(const Field& v, const Field& u, double Lambda,
                                   const LimitSpec& s, const GridDomain& dom,
                                   const ResidualOptions& opts = {});

/// Expanded strong form at finite p (p >= 2), reported as
/// sign(r) * |r|^(1/p) so magnitudes stay comparable across p.  Nodes with
/// |grad u| = 0 are excluded when p < 4 (negative power).
ResidualReport h_p_residual(const Field& u, const Field& v, double lambda,
                            const Exponents& e, const GridDomain& dom,
                            const ResidualOptions& opts = {});

} // namespace pqeig
