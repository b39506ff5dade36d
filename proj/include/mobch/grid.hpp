// grid.hpp
// Uniform 1D/2D cell grids with zero-flux boundaries and the cell-quadrature
// inner product used by every operator and diagnostic.

#ifndef MOBCH_GRID_HPP
#define MOBCH_GRID_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "mobch/errors.hpp"

namespace mobch {

struct Grid {
    int dim = 1;       // 1 or 2
    int n_cells = 1;   // cells per dimension
    double h = 1.0;    // cell width

    Grid() = default;
    Grid(int dim_, int n_cells_, double h_) : dim(dim_), n_cells(n_cells_), h(h_) {
        if (dim != 1 && dim != 2) throw Error("Grid: dim must be 1 or 2");
        if (n_cells < 1) throw Error("Grid: n_cells >= 1 required");
        if (!(h > 0.0)) throw Error("Grid: h > 0 required");
    }

    static Grid make_1d(int n, double extent) { return Grid(1, n, extent / n); }
    static Grid make_2d(int n, double extent) { return Grid(2, n, extent / n); }

    std::size_t cell_count() const {
        return dim == 1 ? static_cast<std::size_t>(n_cells)
                        : static_cast<std::size_t>(n_cells) * n_cells;
    }
    double extent() const { return h * n_cells; }
    double volume() const { return dim == 1 ? extent() : extent() * extent(); }
    double cell_volume() const { return dim == 1 ? h : h * h; }

    bool operator==(const Grid& o) const {
        return dim == o.dim && n_cells == o.n_cells && h == o.h;
    }
};

/// One real value per cell, row-major in 2D.
struct GridFunction {
    Grid grid;
    std::vector<double> values;

    GridFunction() = default;
    explicit GridFunction(const Grid& g, double fill = 0.0)
        : grid(g), values(g.cell_count(), fill) {}
    GridFunction(const Grid& g, std::vector<double> vals)
        : grid(g), values(std::move(vals)) {
        if (values.size() != g.cell_count())
            throw Error("GridFunction: value count does not match the grid");
    }

    std::size_t size() const { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }

    bool all_finite() const {
        for (double v : values)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

namespace detail {
inline void require_same_grid(const GridFunction& a, const GridFunction& b,
                              const char* who) {
    if (!(a.grid == b.grid))
        throw Error(std::string(who) + ": operands live on different grids");
}
} // namespace detail

/// Cell average |Omega|^{-1} <v, 1>; on a uniform grid the arithmetic mean.
inline double mean(const GridFunction& v) {
    if (v.values.empty()) return 0.0;
    double s = 0.0;
    for (double x : v.values) s += x;
    return s / static_cast<double>(v.values.size());
}

/// Cell-quadrature L2 scalar product <v, z> = h^dim * sum(v_i z_i).
inline double inner(const GridFunction& v, const GridFunction& z) {
    detail::require_same_grid(v, z, "inner");
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * z[i];
    return s * v.grid.cell_volume();
}

inline double norm_l2(const GridFunction& v) { return std::sqrt(inner(v, v)); }

inline double norm_l1(const GridFunction& v) {
    double s = 0.0;
    for (double x : v.values) s += std::abs(x);
    return s * v.grid.cell_volume();
}

// elementwise helpers

inline GridFunction operator+(const GridFunction& a, const GridFunction& b) {
    detail::require_same_grid(a, b, "operator+");
    GridFunction out(a.grid);
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

inline GridFunction operator-(const GridFunction& a, const GridFunction& b) {
    detail::require_same_grid(a, b, "operator-");
    GridFunction out(a.grid);
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

inline GridFunction operator*(double c, const GridFunction& a) {
    GridFunction out(a.grid);
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = c * a[i];
    return out;
}

inline GridFunction& axpy(GridFunction& y, double a, const GridFunction& x) {
    detail::require_same_grid(y, x, "axpy");
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
    return y;
}

inline GridFunction shifted(const GridFunction& v, double c) {
    GridFunction out = v;
    for (double& x : out.values) x += c;
    return out;
}

} // namespace mobch

#endif
