// mobility.hpp
// Nondegenerate mobility b with bounds 0 < alpha <= b(r) <= mu_upper.

#ifndef MOBCH_MOBILITY_HPP
#define MOBCH_MOBILITY_HPP

#include <cmath>
#include <functional>
#include <utility>

#include "mobch/errors.hpp"
#include "mobch/grid.hpp"

namespace mobch {

enum class FaceAverage { Arithmetic, Harmonic };

struct MobilitySpec {
    std::function<double(double)> b;
    double alpha = 1.0;    // lower bound
    double mu_upper = 1.0; // upper bound
    double lipschitz = 0.0;
    FaceAverage face_average = FaceAverage::Arithmetic;

    MobilitySpec() : b([](double) { return 1.0; }) {}
    MobilitySpec(std::function<double(double)> fn, double alpha_, double mu_,
                 double lipschitz_)
        : b(std::move(fn)), alpha(alpha_), mu_upper(mu_), lipschitz(lipschitz_) {
        if (!(alpha > 0.0)) throw Error("MobilitySpec: alpha > 0 required");
        if (mu_upper < alpha) throw Error("MobilitySpec: mu_upper >= alpha required");
        if (lipschitz < 0.0) throw Error("MobilitySpec: lipschitz >= 0 required");
    }

    static MobilitySpec constant(double value) {
        return MobilitySpec([value](double) { return value; }, value, value, 0.0);
    }

    /// b(r) = base + amp*sin(r), bounds base -+ |amp|.
    static MobilitySpec sinusoidal(double base, double amp) {
        const double a = std::abs(amp);
        if (!(base - a > 0.0))
            throw Error("MobilitySpec: sinusoidal mobility would degenerate");
        return MobilitySpec([base, amp](double r) { return base + amp * std::sin(r); },
                            base - a, base + a, a);
    }

    /// Cellwise evaluation b(u).
    GridFunction at_cells(const GridFunction& u) const {
        GridFunction out(u.grid);
        for (std::size_t i = 0; i < u.size(); ++i) out[i] = b(u[i]);
        return out;
    }

    double face_value(double bi, double bj) const {
        if (face_average == FaceAverage::Harmonic)
            return 2.0 * bi * bj / (bi + bj);
        return 0.5 * (bi + bj);
    }
};

} // namespace mobch

#endif
