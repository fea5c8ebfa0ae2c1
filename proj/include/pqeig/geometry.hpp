#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace pqeig {

using Field = std::vector<double>;

enum class DomainKind { rectangle, disk };

/// Discretized 2-D domain on a uniform node grid.
///
/// The rectangle covers (-R,R)x(-L,L) with every perimeter node in the
/// boundary set.  The disk of radius R lives on the square grid of its
/// bounding box: nodes with x^2+y^2 >= R^2 are outside the domain, nodes
/// with x^2+y^2 < R^2 - eps*h form the interior, and the thin ring in
/// between is the boundary set (eps = boundary_band_epsilon).
///
/// Immutable after construction; safe to share across threads.
struct GridDomain {
    DomainKind kind;
    double R = 0.0;     // half-width / radius
    double L = 0.0;     // rectangle half-height (equals R for the disk box)
    int nx = 0, ny = 0; // node counts per axis
    double hx = 0.0, hy = 0.0;

    std::vector<std::uint8_t> interior_mask; // size nx*ny
    std::vector<std::uint8_t> boundary_mask; // size nx*ny, disjoint from interior
    Field normal_x, normal_y;                // unit outward normal on boundary nodes
    Field quad_weight;                       // trapezoid-style weight * hx*hy, 0 outside

    std::size_t node_count() const { return static_cast<std::size_t>(nx) * ny; }
    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
    double x(int i) const { return (i - 0.5 * (nx - 1)) * hx; }
    double y(int j) const { return (j - 0.5 * (ny - 1)) * hy; }

    bool in_grid(int i, int j) const { return i >= 0 && i < nx && j >= 0 && j < ny; }
    bool in_domain(int i, int j) const {
        return in_grid(i, j) && (interior_mask[idx(i, j)] || boundary_mask[idx(i, j)]);
    }
    bool is_interior(int i, int j) const { return in_grid(i, j) && interior_mask[idx(i, j)]; }
    bool is_boundary(int i, int j) const { return in_grid(i, j) && boundary_mask[idx(i, j)]; }

    std::size_t interior_count() const;
    std::size_t boundary_count() const;
};

// half a cell: nodes within this band of the disk rim count as boundary
inline constexpr double boundary_band_epsilon = 0.5;

GridDomain build_rectangle_grid(double R, double L, int nx, int ny);

/// n must be odd (the center has to be a node) and >= 5.
GridDomain build_disk_grid(double R, int n);

} // namespace pqeig
