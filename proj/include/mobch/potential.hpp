// potential.hpp
// Configuration potentials W, the monotone part beta = W' + lambda*Id,
// its resolvent and Yosida approximation, and the Moreau-envelope
// regularization W_n.

#ifndef MOBCH_POTENTIAL_HPP
#define MOBCH_POTENTIAL_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "mobch/errors.hpp"

namespace mobch {

enum class PotentialKind { DoubleWellQuartic, PolynomialGrowth, Logarithmic };

/// Immutable description of a configuration potential on an open interval I.
/// Invariants: W in C2(I), W'(0) = 0, W'' >= -lambda, W >= 3*lambda*r^2 - c_w.
struct PotentialSpec {
    PotentialKind kind = PotentialKind::DoubleWellQuartic;
    double lambda = 1.0; // semiconvexity constant
    double c_w = 12.0;   // offset in the quadratic lower bound

    // PolynomialGrowth parameters: W''(r) = eta*|r|^(p-2) - lambda
    double p = 0.0;
    double growth_k = 0.0; // K_W in W''(r) <= K_W*(1 + |r|^(p-2))
    double eta = 0.0;

    // Logarithmic parameter
    double lambda_log = 0.0;

    double domain_lo = -std::numeric_limits<double>::infinity();
    double domain_hi = std::numeric_limits<double>::infinity();

    bool singular() const { return std::isfinite(domain_lo); }
    bool contains(double r) const { return r > domain_lo && r < domain_hi; }

    /// Growth exponent for which (growW) holds; infinity if none applies.
    double growth_exponent() const {
        switch (kind) {
        case PotentialKind::DoubleWellQuartic: return 4.0;
        case PotentialKind::PolynomialGrowth: return p;
        case PotentialKind::Logarithmic:
            return std::numeric_limits<double>::infinity();
        }
        return std::numeric_limits<double>::infinity();
    }

    // The W-term of the V-metric is redundant when polynomial growth holds
    // with p <= 6; it is kept only for singular potentials.
    bool dist_v_needs_potential_term() const { return singular(); }

    /// W(r) = (1/4)(r^2-1)^2.
    static PotentialSpec double_well(double lambda = 1.0) {
        if (lambda < 1.0)
            throw Error("double_well: lambda >= 1 required for W'' >= -lambda");
        PotentialSpec s;
        s.kind = PotentialKind::DoubleWellQuartic;
        s.lambda = lambda;
        s.c_w = 9.0 * lambda * lambda + 3.0 * lambda;
        return s;
    }

    /// W(r) = eta/(p(p-1)) |r|^p - (lambda/2) r^2, so that
    /// W''(r) = eta*|r|^(p-2) - lambda exactly (eq-newW shape).
    static PotentialSpec polynomial(double p, double growth_k, double eta,
                                    double lambda) {
        if (!(p > 2.0 && p <= 6.0))
            throw Error("polynomial: exponent p must lie in (2, 6]");
        if (eta <= 0.0) throw Error("polynomial: eta > 0 required");
        if (growth_k < eta)
            throw Error("polynomial: K_W >= eta required for the growth bound");
        if (lambda < 0.0) throw Error("polynomial: lambda >= 0 required");
        PotentialSpec s;
        s.kind = PotentialKind::PolynomialGrowth;
        s.p = p;
        s.growth_k = growth_k;
        s.eta = eta;
        s.lambda = lambda;
        if (lambda > 0.0) {
            const double a = eta / (p * (p - 1.0));
            const double b = 3.5 * lambda;
            const double s2 = std::pow(2.0 * b / (p * a), 2.0 / (p - 2.0));
            s.c_w = b * s2 * (1.0 - 2.0 / p);
        } else {
            s.c_w = 0.0;
        }
        return s;
    }

    /// W(r) = (1+r)log(1+r) + (1-r)log(1-r) - (lambda_log/2) r^2 on (-1,1).
    /// lambda is set to lambda_log so that beta(r) = log((1+r)/(1-r)).
    static PotentialSpec logarithmic(double lambda_log) {
        if (lambda_log <= 0.0) throw Error("logarithmic: lambda_log > 0 required");
        PotentialSpec s;
        s.kind = PotentialKind::Logarithmic;
        s.lambda_log = lambda_log;
        s.lambda = lambda_log;
        s.c_w = 3.5 * lambda_log;
        s.domain_lo = -1.0;
        s.domain_hi = 1.0;
        return s;
    }
};

namespace detail {
inline void require_interior(const PotentialSpec& spec, double r,
                             const char* who) {
    if (!spec.contains(r))
        throw DomainViolation(std::string(who) + ": argument " +
                              std::to_string(r) + " outside the potential domain");
}
} // namespace detail

inline double w_value(const PotentialSpec& spec, double r) {
    detail::require_interior(spec, r, "w_value");
    switch (spec.kind) {
    case PotentialKind::DoubleWellQuartic: {
        const double q = r * r - 1.0;
        return 0.25 * q * q;
    }
    case PotentialKind::PolynomialGrowth: {
        const double a = spec.eta / (spec.p * (spec.p - 1.0));
        return a * std::pow(std::abs(r), spec.p) - 0.5 * spec.lambda * r * r;
    }
    case PotentialKind::Logarithmic:
        return (1.0 + r) * std::log1p(r) + (1.0 - r) * std::log1p(-r) -
               0.5 * spec.lambda_log * r * r;
    }
    return 0.0;
}

inline double w_prime(const PotentialSpec& spec, double r) {
    detail::require_interior(spec, r, "w_prime");
    switch (spec.kind) {
    case PotentialKind::DoubleWellQuartic:
        return r * (r * r - 1.0);
    case PotentialKind::PolynomialGrowth:
        return spec.eta / (spec.p - 1.0) *
                   std::pow(std::abs(r), spec.p - 2.0) * r -
               spec.lambda * r;
    case PotentialKind::Logarithmic:
        return std::log1p(r) - std::log1p(-r) - spec.lambda_log * r;
    }
    return 0.0;
}

inline double w_second(const PotentialSpec& spec, double r) {
    detail::require_interior(spec, r, "w_second");
    switch (spec.kind) {
    case PotentialKind::DoubleWellQuartic:
        return 3.0 * r * r - 1.0;
    case PotentialKind::PolynomialGrowth:
        return spec.eta * std::pow(std::abs(r), spec.p - 2.0) - spec.lambda;
    case PotentialKind::Logarithmic:
        return 2.0 / ((1.0 + r) * (1.0 - r)) - spec.lambda_log;
    }
    return 0.0;
}

/// Monotone part beta(r) = W'(r) + lambda*r.
inline double beta(const PotentialSpec& spec, double r) {
    detail::require_interior(spec, r, "beta");
    return w_prime(spec, r) + spec.lambda * r;
}

/// beta'(r) = W''(r) + lambda >= 0.
inline double beta_prime(const PotentialSpec& spec, double r) {
    detail::require_interior(spec, r, "beta_prime");
    return w_second(spec, r) + spec.lambda;
}

/// Yosida regularization of index 1/n applied to beta of a base potential.
struct RegularizedPotential {
    PotentialSpec base;
    long n = 1; // Yosida index

    RegularizedPotential(PotentialSpec base_, long n_) : base(base_), n(n_) {
        if (n < 1) throw Error("RegularizedPotential: yosida index n >= 1 required");
    }
};

/// Resolvent v = (Id + beta/n)^{-1}(r): the unique v in I with
/// v + beta(v)/n = r, found by safeguarded Newton with bisection fallback.
/// Defined on all of R even when the potential is singular.
inline double resolvent(const RegularizedPotential& reg, double r) {
    if (r == 0.0) return 0.0;
    const PotentialSpec& spec = reg.base;
    const double n = static_cast<double>(reg.n);
    const auto g = [&](double v) { return v - r + beta(spec, v) / n; };

    // bracket [lo, hi] with g(lo) <= 0 <= g(hi); g is strictly increasing,
    // g(0) = -r, and for r inside I also g(r) = beta(r)/n has the sign of r
    double lo, hi;
    if (r > 0.0) {
        lo = 0.0;
        if (spec.singular() && r >= spec.domain_hi) {
            // walk toward the right endpoint until the bracket closes
            double d = 0.5 * spec.domain_hi;
            hi = spec.domain_hi - d;
            while (g(hi) < 0.0) {
                d *= 0.5;
                const double next = spec.domain_hi - d;
                if (next <= hi || next >= spec.domain_hi)
                    return hi; // double resolution exhausted
                hi = next;
            }
        } else {
            hi = r;
        }
    } else {
        hi = 0.0;
        if (spec.singular() && r <= spec.domain_lo) {
            double d = 0.5 * (-spec.domain_lo);
            lo = spec.domain_lo + d;
            while (g(lo) > 0.0) {
                d *= 0.5;
                const double next = spec.domain_lo + d;
                if (next >= lo || next <= spec.domain_lo) return lo;
                lo = next;
            }
        } else {
            lo = r;
        }
    }

    const double tol = 1e-13;
    double v = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        const double gv = g(v);
        if (std::abs(gv) <= tol) return v;
        if (gv > 0.0) hi = v; else lo = v;
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() *
                           (std::abs(lo) + std::abs(hi) + 1.0))
            return 0.5 * (lo + hi);
        const double gp = 1.0 + beta_prime(spec, v) / n;
        double next = v - gv / gp;
        if (!(next > lo && next < hi) || !std::isfinite(next))
            next = 0.5 * (lo + hi);
        v = next;
    }
    throw ConvergenceFailure("resolvent: iteration cap exceeded at r = " +
                             std::to_string(r));
}

/// beta_n(r) = n*(r - v_n(r)) = beta(v_n(r)); Lipschitz with constant <= n.
inline double yosida_beta(const RegularizedPotential& reg, double r) {
    if (r == 0.0) return 0.0;
    // beta at the resolvent point is the numerically stable branch of the
    // identity n*(r - v) = beta(v)
    return beta(reg.base, resolvent(reg, r));
}

/// d/dr beta_n(r) = n*beta'(v)/(n + beta'(v)) by implicit differentiation.
inline double yosida_beta_prime(const RegularizedPotential& reg, double r) {
    const double v = resolvent(reg, r);
    const double bp = beta_prime(reg.base, v);
    const double n = static_cast<double>(reg.n);
    return n * bp / (n + bp);
}

/// W_n(r) via the Moreau envelope of the convex part Phi = W + lambda/2 r^2:
/// W_n(r) = W(v) + (lambda/2) v^2 + beta(v)^2/(2n) - (lambda/2) r^2, v = v_n(r).
/// Satisfies W_n <= W on I and W_n' = beta_n - lambda*Id.
inline double w_n_value(const RegularizedPotential& reg, double r) {
    const double v = resolvent(reg, r);
    const double bv = beta(reg.base, v);
    const double lam = reg.base.lambda;
    return w_value(reg.base, v) + 0.5 * lam * v * v +
           bv * bv / (2.0 * static_cast<double>(reg.n)) - 0.5 * lam * r * r;
}

inline double w_n_prime(const RegularizedPotential& reg, double r) {
    return yosida_beta(reg, r) - reg.base.lambda * r;
}

/// Sampled check of the sufficient separation bounds
///   beta(r) >= c/(1-r)^3 near +1 and -beta(r) >= c/(1+r)^3 near -1
/// on a geometric ladder 1 - (1-r_start)/2^k, k = 0..samples-1.
inline bool separating_growth_probe(const std::function<double(double)>& beta_fn,
                                    double c_probe, double r_start,
                                    int samples = 30) {
    if (!(r_start > 0.0 && r_start < 1.0))
        throw Error("separating_growth_probe: r_start must lie in (0, 1)");
    if (samples < 1) throw Error("separating_growth_probe: samples >= 1");
    double d = 1.0 - r_start;
    for (int k = 0; k < samples; ++k) {
        if (d < 1e-13) break; // ladder exhausted at double resolution
        const double bound = c_probe / (d * d * d);
        if (beta_fn(1.0 - d) < bound) return false;
        if (-beta_fn(-1.0 + d) < bound) return false;
        d *= 0.5;
    }
    return true;
}

inline bool separating_growth_test(const PotentialSpec& spec, double c_probe,
                                   double r_start, int samples = 30) {
    if (!spec.singular())
        throw DomainViolation(
            "separating_growth_test: potential domain must be (-1, 1)");
    return separating_growth_probe([&](double r) { return beta(spec, r); },
                                   c_probe, r_start, samples);
}

} // namespace mobch

#endif
