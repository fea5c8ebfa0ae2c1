#include "pqeig/geometry.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace pqeig {

std::size_t GridDomain::interior_count() const {
    return std::accumulate(interior_mask.begin(), interior_mask.end(), std::size_t{0});
}

std::size_t GridDomain::boundary_count() const {
    return std::accumulate(boundary_mask.begin(), boundary_mask.end(), std::size_t{0});
}

namespace {

void check_extent(double R, double L) {
    if (!std::isfinite(R) || R <= 0.0)
        throw std::invalid_argument("domain half-width R must be finite and positive, got " +
                                    std::to_string(R));
    if (!std::isfinite(L) || L <= 0.0)
        throw std::invalid_argument("domain half-height L must be finite and positive, got " +
                                    std::to_string(L));
}

} // namespace

GridDomain build_rectangle_grid(double R, double L, int nx, int ny) {
    check_extent(R, L);
    if (nx < 3 || ny < 3)
        throw std::invalid_argument("rectangle grid needs nx, ny >= 3, got " +
                                    std::to_string(nx) + "x" + std::to_string(ny));

    GridDomain dom;
    dom.kind = DomainKind::rectangle;
    dom.R = R;
    dom.L = L;
    dom.nx = nx;
    dom.ny = ny;
    dom.hx = 2.0 * R / (nx - 1);
    dom.hy = 2.0 * L / (ny - 1);

    const std::size_t n = dom.node_count();
    dom.interior_mask.assign(n, 0);
    dom.boundary_mask.assign(n, 0);
    dom.normal_x.assign(n, 0.0);
    dom.normal_y.assign(n, 0.0);
    dom.quad_weight.assign(n, 0.0);

    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const std::size_t k = dom.idx(i, j);
            const bool ex = (i == 0 || i == nx - 1);
            const bool ey = (j == 0 || j == ny - 1);
            if (ex || ey) {
                dom.boundary_mask[k] = 1;
                double vx = ex ? (i == 0 ? -1.0 : 1.0) : 0.0;
                double vy = ey ? (j == 0 ? -1.0 : 1.0) : 0.0;
                if (ex && ey) { // corner: normalized diagonal
                    vx *= inv_sqrt2;
                    vy *= inv_sqrt2;
                }
                dom.normal_x[k] = vx;
                dom.normal_y[k] = vy;
            } else {
                dom.interior_mask[k] = 1;
            }
            const double wx = ex ? 0.5 : 1.0;
            const double wy = ey ? 0.5 : 1.0;
            dom.quad_weight[k] = wx * wy * dom.hx * dom.hy;
        }
    }
    return dom;
}

GridDomain build_disk_grid(double R, int n) {
    check_extent(R, R);
    if (n < 5)
        throw std::invalid_argument("disk grid needs n >= 5, got " + std::to_string(n));
    if (n % 2 == 0)
        throw std::invalid_argument("disk grid needs odd n so the center is a node, got " +
                                    std::to_string(n));

    GridDomain dom;
    dom.kind = DomainKind::disk;
    dom.R = R;
    dom.L = R;
    dom.nx = n;
    dom.ny = n;
    dom.hx = 2.0 * R / (n - 1);
    dom.hy = dom.hx;

    const std::size_t nn = dom.node_count();
    dom.interior_mask.assign(nn, 0);
    dom.boundary_mask.assign(nn, 0);
    dom.normal_x.assign(nn, 0.0);
    dom.normal_y.assign(nn, 0.0);
    dom.quad_weight.assign(nn, 0.0);

    const double r2_out = R * R;
    const double r2_int = R * R - boundary_band_epsilon * dom.hx;
    auto in_disk = [&](int i, int j) {
        if (i < 0 || j < 0 || i >= n || j >= n) return false;
        const double px = dom.x(i), py = dom.y(j);
        return px * px + py * py < r2_out;
    };
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const std::size_t k = dom.idx(i, j);
            const double px = dom.x(i);
            const double py = dom.y(j);
            const double r2 = px * px + py * py;
            if (r2 >= r2_out) continue; // outside
            // the boundary set is the half-cell band plus every node whose
            // 4-stencil pokes outside; the band alone is too sparse a ring to
            // anchor the Dirichlet trace on coarse grids
            const bool rim = !(in_disk(i - 1, j) && in_disk(i + 1, j) && in_disk(i, j - 1) &&
                               in_disk(i, j + 1));
            if (r2 < r2_int && !rim) {
                dom.interior_mask[k] = 1;
                dom.quad_weight[k] = dom.hx * dom.hy;
            } else {
                dom.boundary_mask[k] = 1;
                const double r = std::sqrt(r2);
                dom.normal_x[k] = px / r;
                dom.normal_y[k] = py / r;
                dom.quad_weight[k] = 0.5 * dom.hx * dom.hy;
            }
        }
    }
    return dom;
}

} // namespace pqeig
