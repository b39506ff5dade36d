// metrics.hpp
// Discrete analogues of the metrics on the finite-energy space V (L2 plus
// an L1 potential gap for singular W) and on the H2-regular space W.

#ifndef MOBCH_METRICS_HPP
#define MOBCH_METRICS_HPP

#include <cmath>

#include "mobch/grid.hpp"
#include "mobch/operators.hpp"
#include "mobch/potential.hpp"

namespace mobch {

namespace detail {
inline void require_interior_values(const PotentialSpec& spec,
                                    const GridFunction& v, const char* who) {
    if (!spec.singular()) return;
    for (double x : v.values)
        if (!spec.contains(x))
            throw DomainViolation(std::string(who) +
                                  ": grid value outside the potential domain");
}
} // namespace detail

/// d_V(v, z) = ||v - z|| + ||W(v) - W(z)||_L1, the potential term kept only
/// for singular W (for polynomial growth with p <= 6 the space V collapses
/// onto H1 and the term is omitted).
inline double dist_V(const GridFunction& v, const GridFunction& z,
                     const PotentialSpec& spec) {
    detail::require_same_grid(v, z, "dist_V");
    detail::require_interior_values(spec, v, "dist_V");
    detail::require_interior_values(spec, z, "dist_V");
    double d = norm_l2(v - z);
    if (spec.dist_v_needs_potential_term()) {
        double s = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i)
            s += std::abs(w_value(spec, v[i]) - w_value(spec, z[i]));
        d += s * v.grid.cell_volume();
    }
    return d;
}

/// d_W(v, z) = ||v - z||_{H2} + ||beta(v) - beta(z)||, the beta term kept
/// only for singular W. The H2 norm is the equivalent (||.||^2 + ||B.||^2)^{1/2}.
inline double dist_W(const GridFunction& v, const GridFunction& z,
                     const PotentialSpec& spec) {
    detail::require_same_grid(v, z, "dist_W");
    detail::require_interior_values(spec, v, "dist_W");
    detail::require_interior_values(spec, z, "dist_W");
    const GridFunction d = v - z;
    double out = norms(d).h2_discrete;
    if (spec.singular()) {
        double s = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double db = beta(spec, v[i]) - beta(spec, z[i]);
            s += db * db;
        }
        out += std::sqrt(s * v.grid.cell_volume());
    }
    return out;
}

/// Variant used on approximate trajectories: falls back to beta_n whenever a
/// snapshot value has left I (finite yosida index lets u exit transiently).
inline double dist_W(const GridFunction& v, const GridFunction& z,
                     const PotentialSpec& spec, const RegularizedPotential& reg) {
    detail::require_same_grid(v, z, "dist_W");
    bool interior = true;
    if (spec.singular()) {
        for (double x : v.values) interior = interior && spec.contains(x);
        for (double x : z.values) interior = interior && spec.contains(x);
    }
    if (interior) return dist_W(v, z, spec);
    const GridFunction d = v - z;
    double out = norms(d).h2_discrete;
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double db = yosida_beta(reg, v[i]) - yosida_beta(reg, z[i]);
        s += db * db;
    }
    return out + std::sqrt(s * v.grid.cell_volume());
}

} // namespace mobch

#endif
