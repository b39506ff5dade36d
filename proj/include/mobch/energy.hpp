// energy.hpp
// The free energy E(v) = int(|grad v|^2/2 + W(v) + f v) and its regularized
// variant E_n with W_n in place of W.

#ifndef MOBCH_ENERGY_HPP
#define MOBCH_ENERGY_HPP

#include "mobch/grid.hpp"
#include "mobch/operators.hpp"
#include "mobch/potential.hpp"

namespace mobch {

inline double energy(const GridFunction& u, const PotentialSpec& spec,
                     const GridFunction& f) {
    double pot = 0.0;
    for (double x : u.values) pot += w_value(spec, x);
    pot *= u.grid.cell_volume();
    const double grad = 0.5 * inner(laplacian_neumann(u), u);
    const double src = f.values.empty() ? 0.0 : inner(f, u);
    return grad + pot + src;
}

/// E_n: same quadrature with the Moreau-regularized potential; defined for
/// fields with values anywhere on R and dominated by E on interior fields.
inline double energy_n(const GridFunction& u, const RegularizedPotential& reg,
                       const GridFunction& f) {
    double pot = 0.0;
    for (double x : u.values) pot += w_n_value(reg, x);
    pot *= u.grid.cell_volume();
    const double grad = 0.5 * inner(laplacian_neumann(u), u);
    const double src = f.values.empty() ? 0.0 : inner(f, u);
    return grad + pot + src;
}

/// Constants (eta_E, c_E) with E(v) >= eta_E * ||v||_V^2 - c_E, derived from
/// the quadratic lower bound of W. Requires lambda > 0.
struct EnergyLowerBound {
    double eta_e = 0.0;
    double c_e = 0.0;
};

inline EnergyLowerBound energy_lower_bound(const PotentialSpec& spec,
                                           double f_l2, double volume) {
    if (!(spec.lambda > 0.0))
        throw Error("energy_lower_bound: lambda > 0 required");
    EnergyLowerBound out;
    out.eta_e = std::min(0.5, 2.0 * spec.lambda);
    out.c_e = spec.c_w * volume + f_l2 * f_l2 / (4.0 * spec.lambda);
    return out;
}

} // namespace mobch

#endif
