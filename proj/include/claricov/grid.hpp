#pragma once

#include "claricov/common.hpp"

#include <cmath>
#include <vector>

namespace claricov {

/// Regular rectangular grid of estimation points, row-major with x fastest:
/// linear index i = iy * nx + ix. All coordinates in km.
struct GridSpec {
    Vec2 origin{0.0, 0.0}; ///< position of point (ix=0, iy=0)
    int nx = 1;
    int ny = 1;
    double spacing = 1.0;

    int count() const { return nx * ny; }

    int index(int ix, int iy) const { return iy * nx + ix; }

    Vec2 point(int ix, int iy) const {
        return {origin.x() + ix * spacing, origin.y() + iy * spacing};
    }

    Vec2 point(int i) const { return point(i % nx, i / nx); }

    std::vector<Vec2> points() const {
        std::vector<Vec2> p;
        p.reserve(static_cast<std::size_t>(count()));
        for (int iy = 0; iy < ny; ++iy)
            for (int ix = 0; ix < nx; ++ix)
                p.push_back(point(ix, iy));
        return p;
    }

    /// Bounding box of the grid points themselves.
    DomainBox bounds() const {
        return {origin, point(nx - 1, ny - 1)};
    }

    /// Grid of cell centers covering [0, len_x] x [0, len_y]; this is the
    /// placement used by the simulator so that cell-area quadrature over the
    /// domain is a plain midpoint rule on the grid values.
    static GridSpec cell_centered(double len_x, double len_y, double spacing);
};

inline GridSpec GridSpec::cell_centered(double len_x, double len_y, double spacing) {
    if (!(spacing > 0.0) || !(len_x > 0.0) || !(len_y > 0.0))
        throw ConfigError("cell_centered grid: lengths and spacing must be positive");
    GridSpec g;
    g.spacing = spacing;
    g.nx = std::max(1, static_cast<int>(std::lround(len_x / spacing)));
    g.ny = std::max(1, static_cast<int>(std::lround(len_y / spacing)));
    g.origin = {0.5 * spacing, 0.5 * spacing};
    return g;
}

} // namespace claricov
