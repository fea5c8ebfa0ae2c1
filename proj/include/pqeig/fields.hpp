#pragma once

#include <cstdint>
#include <vector>

#include "pqeig/geometry.hpp"

namespace pqeig {

/// (u, v) pair on a grid: u is the Dirichlet component (zero on the
/// boundary set), v the Neumann component (free boundary values).
struct FieldPair {
    Field u;
    Field v;
};

struct VectorField {
    Field x;
    Field y;
};

/// Grid field with a defined-mask (stencil-deficient nodes are undefined).
struct MaskedField {
    Field value;
    std::vector<std::uint8_t> defined;
};

/// Throws if shapes mismatch, entries are non-finite, or u fails to vanish
/// (|u| <= 1e-14) on the boundary set.
void validate_field_pair(const FieldPair& fp, const GridDomain& dom);

/// Zero out u on the boundary set (Dirichlet enforcement).
void clamp_dirichlet(Field& u, const GridDomain& dom);

} // namespace pqeig
