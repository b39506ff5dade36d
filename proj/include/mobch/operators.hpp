// operators.hpp
// Discrete elliptic operators on the Neumann grid: B = -Laplacian in
// conservative flux form, the mobility-weighted B_u, its inverse N_u on
// mean-zero data, and the elliptic mollifier (I + B/n)^{-1}.

#ifndef MOBCH_OPERATORS_HPP
#define MOBCH_OPERATORS_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "mobch/errors.hpp"
#include "mobch/grid.hpp"
#include "mobch/mobility.hpp"

namespace mobch {

namespace detail {

/// Visits every interior face once as a pair of flat cell indices (i, j).
template <typename F>
inline void for_each_face(const Grid& g, F&& visit) {
    const int n = g.n_cells;
    if (g.dim == 1) {
        for (int i = 0; i + 1 < n; ++i)
            visit(static_cast<std::size_t>(i), static_cast<std::size_t>(i + 1));
    } else {
        for (int y = 0; y < n; ++y) {
            for (int x = 0; x + 1 < n; ++x) {
                const std::size_t i = static_cast<std::size_t>(y) * n + x;
                visit(i, i + 1);
            }
        }
        for (int y = 0; y + 1 < n; ++y) {
            for (int x = 0; x < n; ++x) {
                const std::size_t i = static_cast<std::size_t>(y) * n + x;
                visit(i, i + static_cast<std::size_t>(n));
            }
        }
    }
}

} // namespace detail

/// B v: negative Laplacian with zero-flux faces; annihilates constants,
/// symmetric and positive semidefinite under the cell inner product.
inline GridFunction laplacian_neumann(const GridFunction& v) {
    GridFunction out(v.grid, 0.0);
    const double inv_h2 = 1.0 / (v.grid.h * v.grid.h);
    detail::for_each_face(v.grid, [&](std::size_t i, std::size_t j) {
        const double q = (v[i] - v[j]) * inv_h2;
        out[i] += q;
        out[j] -= q;
    });
    return out;
}

/// B_u w with cellwise mobility values b_cells; face mobility is the
/// arithmetic (or harmonic) mean of the adjacent cells, so fluxes telescope
/// and the output is mean-free up to roundoff.
inline GridFunction div_b_grad(const MobilitySpec& mob,
                               const GridFunction& b_cells,
                               const GridFunction& w) {
    detail::require_same_grid(b_cells, w, "div_b_grad");
    const double slack = 1e-12 * std::max(1.0, mob.mu_upper);
    for (double bv : b_cells.values) {
        if (bv < mob.alpha - slack || bv > mob.mu_upper + slack)
            throw BoundsViolation("div_b_grad: mobility value " +
                                  std::to_string(bv) + " outside [alpha, mu_upper]");
    }
    GridFunction out(w.grid, 0.0);
    const double inv_h2 = 1.0 / (w.grid.h * w.grid.h);
    detail::for_each_face(w.grid, [&](std::size_t i, std::size_t j) {
        const double q = mob.face_value(b_cells[i], b_cells[j]) * (w[i] - w[j]) * inv_h2;
        out[i] += q;
        out[j] -= q;
    });
    return out;
}

struct Norms {
    double l1 = 0.0;
    double l2 = 0.0;
    double h1_semi = 0.0;     // sqrt(<Bv, v>)
    double h2_discrete = 0.0; // sqrt(||v||^2 + ||Bv||^2)
};

inline Norms norms(const GridFunction& v) {
    Norms out;
    out.l1 = norm_l1(v);
    out.l2 = norm_l2(v);
    const GridFunction bv = laplacian_neumann(v);
    out.h1_semi = std::sqrt(std::max(0.0, inner(bv, v)));
    out.h2_discrete = std::sqrt(out.l2 * out.l2 + inner(bv, bv));
    return out;
}

inline double norm_v(const GridFunction& v) {
    const Norms n = norms(v);
    return std::sqrt(n.l2 * n.l2 + n.h1_semi * n.h1_semi);
}

namespace detail {

/// Jacobi-preconditioned conjugate gradients on a SPD (or SPSD with the
/// mean-zero projection enabled) operator. Residual tolerance is absolute
/// in the discrete L2 norm. Deterministic for fixed inputs.
inline GridFunction conjugate_gradient(
    const std::function<GridFunction(const GridFunction&)>& apply,
    const GridFunction& rhs, const std::vector<double>& jacobi_diag,
    double tol, bool project_mean_zero, long max_iter, const char* who) {
    const Grid& g = rhs.grid;
    GridFunction x(g, 0.0);
    GridFunction r = rhs;
    if (project_mean_zero) {
        const double mr = mean(r);
        for (double& v : r.values) v -= mr;
    }
    auto precond = [&](const GridFunction& res) {
        GridFunction z(g);
        for (std::size_t i = 0; i < res.size(); ++i)
            z[i] = res[i] / jacobi_diag[i];
        if (project_mean_zero) {
            const double mz = mean(z);
            for (double& v : z.values) v -= mz;
        }
        return z;
    };
    if (norm_l2(r) <= tol) return x;
    GridFunction z = precond(r);
    GridFunction p = z;
    double rz = inner(r, z);
    for (long it = 0; it < max_iter; ++it) {
        GridFunction ap = apply(p);
        if (project_mean_zero) {
            const double ma = mean(ap);
            for (double& v : ap.values) v -= ma;
        }
        const double pap = inner(p, ap);
        if (!(pap > 0.0)) {
            // numerically exhausted search direction
            if (norm_l2(r) <= tol) return x;
            throw ConvergenceFailure(std::string(who) +
                                     ": CG search direction became degenerate");
        }
        const double a = rz / pap;
        axpy(x, a, p);
        axpy(r, -a, ap);
        if (project_mean_zero) {
            const double mr = mean(r);
            for (double& v : r.values) v -= mr;
        }
        if (norm_l2(r) <= tol) return x;
        z = precond(r);
        const double rz_new = inner(r, z);
        const double beta_cg = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = z[i] + beta_cg * p[i];
    }
    throw ConvergenceFailure(std::string(who) + ": CG iteration cap exceeded");
}

} // namespace detail

/// N_u rhs: the unique mean-zero zeta with B_u zeta = rhs, for mean-free rhs.
inline GridFunction solve_neumann_inverse(const MobilitySpec& mob,
                                          const GridFunction& b_cells,
                                          const GridFunction& rhs, double tol) {
    if (!(tol > 0.0)) throw Error("solve_neumann_inverse: tol > 0 required");
    if (std::abs(mean(rhs)) > tol)
        throw MeanNotZero("solve_neumann_inverse: rhs mean " +
                          std::to_string(mean(rhs)) + " exceeds tol");
    if (rhs.grid.cell_count() == 1) return GridFunction(rhs.grid, 0.0);

    const double inv_h2 = 1.0 / (rhs.grid.h * rhs.grid.h);
    std::vector<double> diag(rhs.size(), 0.0);
    detail::for_each_face(rhs.grid, [&](std::size_t i, std::size_t j) {
        const double bf = mob.face_value(b_cells[i], b_cells[j]) * inv_h2;
        diag[i] += bf;
        diag[j] += bf;
    });
    const double tol_eff =
        std::min(tol, std::max(1e-11 * norm_l2(rhs), 1e-15));
    const long cap = 60 * static_cast<long>(rhs.size()) + 500;
    GridFunction zeta = detail::conjugate_gradient(
        [&](const GridFunction& v) { return div_b_grad(mob, b_cells, v); }, rhs,
        diag, tol_eff, /*project_mean_zero=*/true, cap, "solve_neumann_inverse");
    const double mz = mean(zeta);
    for (double& v : zeta.values) v -= mz;
    return zeta;
}

/// (I + B/n)^{-1} v: elliptic mollification of initial data. Contracts both
/// the L2 norm and the H1 seminorm; the mean is preserved exactly.
inline GridFunction elliptic_mollify(const GridFunction& v, long n) {
    if (n < 1) throw Error("elliptic_mollify: n >= 1 required");
    if (v.grid.cell_count() == 1) return v;
    const double inv_n = 1.0 / static_cast<double>(n);
    const double inv_h2 = inv_n / (v.grid.h * v.grid.h);
    std::vector<double> diag(v.size(), 1.0);
    detail::for_each_face(v.grid, [&](std::size_t i, std::size_t j) {
        diag[i] += inv_h2;
        diag[j] += inv_h2;
    });
    const double tol = 1e-13 * std::max(1.0, norm_l2(v));
    const long cap = 60 * static_cast<long>(v.size()) + 500;
    GridFunction x = detail::conjugate_gradient(
        [&](const GridFunction& z) {
            GridFunction az = laplacian_neumann(z);
            for (std::size_t i = 0; i < az.size(); ++i)
                az[i] = z[i] + inv_n * az[i];
            return az;
        },
        v, diag, tol, /*project_mean_zero=*/false, cap, "elliptic_mollify");
    const double fix = mean(v) - mean(x);
    for (double& val : x.values) val += fix;
    return x;
}

} // namespace mobch

#endif
