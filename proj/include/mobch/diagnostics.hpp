// diagnostics.hpp
// Certification of the quantities the continuous theory controls: the energy
// equality, the dissipativity envelope, the entropy functional and its
// dissipative estimate, and the local H2-regularization windows.

#ifndef MOBCH_DIAGNOSTICS_HPP
#define MOBCH_DIAGNOSTICS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "mobch/energy.hpp"
#include "mobch/errors.hpp"
#include "mobch/metrics.hpp"
#include "mobch/stepper.hpp"

namespace mobch {

// ---------------------------------------------------------------------------
// entropy functional

namespace detail {

template <typename F>
double adaptive_simpson(const F& f, double a, double m, double b, double fa,
                        double fm, double fb, double whole, double tol,
                        int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <typename F>
double integrate(const F& f, double a, double b, double tol) {
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, m, b, fa, fm, fb, whole, tol, 28);
}

} // namespace detail

/// mu(s) = int_0^s dr/b(r).
inline double entropy_mu(const MobilitySpec& mob, double s) {
    const double tol = 1e-10 * std::max(1.0, std::abs(s));
    return detail::integrate([&](double r) { return 1.0 / mob.b(r); }, 0.0, s, tol);
}

/// mu_hat(s) = int_0^s mu(r) dr, evaluated through the single integral
/// int_0^s (s - t)/b(t) dt (Cauchy's repeated-integral identity).
inline double entropy_mu_hat(const MobilitySpec& mob, double s) {
    const double tol = 1e-10 * std::max(1.0, s * s);
    return detail::integrate([&](double t) { return (s - t) / mob.b(t); }, 0.0, s,
                             tol);
}

/// int_Omega mu_hat(u); every cell value is verified against the bracket
/// s^2/(2 mu_upper) <= mu_hat(s) <= s^2/(2 alpha).
inline double entropy_functional(const GridFunction& u, const MobilitySpec& mob) {
    double total = 0.0;
    for (double s : u.values) {
        const double mh = entropy_mu_hat(mob, s);
        const double lo = s * s / (2.0 * mob.mu_upper);
        const double hi = s * s / (2.0 * mob.alpha);
        const double slack = 1e-8 * std::max(1.0, s * s);
        if (mh < lo - slack || mh > hi + slack)
            throw Error("entropy_functional: quadrature escaped the mu-hat bracket");
        total += mh;
    }
    return total * u.grid.cell_volume();
}

// ---------------------------------------------------------------------------
// energy report and the energy equality

struct EnergyReport {
    std::vector<double> times;
    std::vector<double> energy;      // E, or E_n where u leaves I
    std::vector<double> energy_n;
    std::vector<double> dissipation; // cumulative int int b(u)|grad w|^2
    std::vector<double> visc_dissipation; // cumulative eps int ||u_t||^2
    std::vector<double> mass;
    std::vector<double> entropy;
    std::vector<double> h2;
    std::vector<double> residual_energy_eq; // signed defect of the identity
};

namespace detail {

/// <B_u w, w> with the mobility frozen at u.
inline double weighted_dissipation_rate(const StepState& s,
                                        const MobilitySpec& mob) {
    const GridFunction b_cells = mob.at_cells(s.u);
    return inner(div_b_grad(mob, b_cells, s.w), s.w);
}

/// ||u_t||^2 at snapshot k via centered differences (one-sided at the ends).
inline double ut_norm_sq(const std::vector<StepState>& st, std::size_t k,
                         std::size_t first, std::size_t last) {
    const std::size_t km = (k == first) ? k : k - 1;
    const std::size_t kp = (k == last) ? k : k + 1;
    const double dt = st[kp].t - st[km].t;
    if (dt <= 0.0) return 0.0;
    const GridFunction du = st[kp].u - st[km].u;
    const double n = norm_l2(du) / dt;
    return n * n;
}

} // namespace detail

inline EnergyReport build_energy_report(const Trajectory& traj,
                                        const PotentialSpec& spec,
                                        const MobilitySpec& mob,
                                        const RegularizedPotential& reg) {
    const auto& st = traj.states;
    if (st.empty()) throw Error("build_energy_report: empty trajectory");
    const Grid& g = st.front().u.grid;
    const GridFunction f =
        traj.config.f.values.empty() ? GridFunction(g, 0.0) : traj.config.f;
    const double eps = traj.config.effective_epsilon();

    EnergyReport rep;
    const std::size_t n = st.size();
    rep.times.reserve(n);
    double diss = 0.0, visc = 0.0;
    double prev_rate = 0.0, prev_ut = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const StepState& s = st[k];
        rep.times.push_back(s.t);
        rep.mass.push_back(mean(s.u));
        rep.h2.push_back(norms(s.u).h2_discrete);
        rep.entropy.push_back(entropy_functional(s.u, mob));
        const double en = energy_n(s.u, reg, f);
        rep.energy_n.push_back(en);
        bool interior = true;
        for (double x : s.u.values) interior = interior && spec.contains(x);
        rep.energy.push_back(interior ? energy(s.u, spec, f) : en);

        const double rate = detail::weighted_dissipation_rate(s, mob);
        const double ut2 = eps > 0.0 ? detail::ut_norm_sq(st, k, 0, n - 1) : 0.0;
        if (k > 0) {
            const double dt = s.t - st[k - 1].t;
            diss += 0.5 * (prev_rate + rate) * dt;
            visc += 0.5 * eps * (prev_ut + ut2) * dt;
        }
        prev_rate = rate;
        prev_ut = ut2;
        rep.dissipation.push_back(diss);
        rep.visc_dissipation.push_back(visc);
        rep.residual_energy_eq.push_back(en - rep.energy_n.front() + diss + visc);
    }
    return rep;
}

namespace detail {
inline std::size_t snapshot_index(const Trajectory& traj, double t) {
    for (std::size_t k = 0; k < traj.states.size(); ++k)
        if (std::abs(traj.states[k].t - t) <= 1e-12 * std::max(1.0, std::abs(t)))
            return k;
    throw TimesNotInTrajectory("time " + std::to_string(t) +
                               " is not a snapshot time");
}
} // namespace detail

/// Absolute defect of E_n(t2) - E_n(t1) + int int b(u)|grad w|^2
/// + eps int ||u_t||^2 = 0 over [t1, t2], trapezoid quadrature in time.
inline double energy_equality_residual(const Trajectory& traj,
                                       const MobilitySpec& mob,
                                       const RegularizedPotential& reg,
                                       double t1, double t2) {
    if (t2 < t1) throw Error("energy_equality_residual: t1 <= t2 required");
    const std::size_t k1 = detail::snapshot_index(traj, t1);
    const std::size_t k2 = detail::snapshot_index(traj, t2);
    if (k1 == k2) return 0.0;
    const auto& st = traj.states;
    const Grid& g = st.front().u.grid;
    const GridFunction f =
        traj.config.f.values.empty() ? GridFunction(g, 0.0) : traj.config.f;
    const double eps = traj.config.effective_epsilon();

    double diss = 0.0, visc = 0.0;
    double prev_rate = 0.0, prev_ut = 0.0;
    for (std::size_t k = k1; k <= k2; ++k) {
        const double rate = detail::weighted_dissipation_rate(st[k], mob);
        const double ut2 = eps > 0.0 ? detail::ut_norm_sq(st, k, k1, k2) : 0.0;
        if (k > k1) {
            const double dt = st[k].t - st[k - 1].t;
            diss += 0.5 * (prev_rate + rate) * dt;
            visc += 0.5 * eps * (prev_ut + ut2) * dt;
        }
        prev_rate = rate;
        prev_ut = ut2;
    }
    const double de =
        energy_n(st[k2].u, reg, f) - energy_n(st[k1].u, reg, f);
    return std::abs(de + diss + visc);
}

// ---------------------------------------------------------------------------
// dissipativity fit

struct DissipativityFit {
    double kappa = 0.0;
    double c0 = 0.0;
    double margin = -std::numeric_limits<double>::infinity();
    bool valid() const { return margin >= 0.0; }
};

struct FitOptions {
    double c0_cap = std::numeric_limits<double>::infinity();
    double kappa_min = 1e-4;
    double kappa_max = 1e2;
    int kappa_count = 241; // logarithmic grid resolution
    double tail_fraction = 0.25;
};

/// Worst-case slack of E(t) <= e0*exp(-kappa t) + C0 over the series.
inline double fit_margin(const DissipativityFit& fit,
                         const std::vector<double>& times,
                         const std::vector<double>& energies, double e0) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < times.size(); ++k)
        m = std::min(m, e0 * std::exp(-fit.kappa * times[k]) + fit.c0 - energies[k]);
    return m;
}

struct EnergySeries {
    std::vector<double> times;
    std::vector<double> energies;
    double e0 = 0.0; // E(u0) of the run the series came from
};

/// One (kappa, C0) pair validating every series: C0 from the tail levels,
/// kappa the largest grid value keeping all margins nonnegative.
inline DissipativityFit
shared_dissipativity_fit(const std::vector<EnergySeries>& series,
                         const FitOptions& opts = {}) {
    if (series.empty()) throw Error("shared_dissipativity_fit: no series");
    for (const auto& s : series)
        if (s.times.empty() || s.times.size() != s.energies.size())
            throw Error("shared_dissipativity_fit: malformed series");

    double c0 = 0.0;
    for (const auto& s : series) {
        const std::size_t n = s.times.size();
        std::size_t tail =
            n - std::max<std::size_t>(1, static_cast<std::size_t>(
                                             opts.tail_fraction * n));
        for (std::size_t k = tail; k < n; ++k) c0 = std::max(c0, s.energies[k]);
    }
    c0 = std::min(c0, opts.c0_cap);

    DissipativityFit best;
    best.c0 = c0;
    const double lr = std::log(opts.kappa_max / opts.kappa_min) /
                      static_cast<double>(opts.kappa_count - 1);
    for (int i = opts.kappa_count - 1; i >= 0; --i) {
        const double kappa = opts.kappa_min * std::exp(lr * i);
        DissipativityFit cand;
        cand.kappa = kappa;
        cand.c0 = c0;
        double m = std::numeric_limits<double>::infinity();
        for (const auto& s : series)
            m = std::min(m, fit_margin(cand, s.times, s.energies, s.e0));
        if (m >= 0.0) {
            cand.margin = m;
            return cand;
        }
        if (m > best.margin) {
            best = cand;
            best.margin = m;
        }
    }
    throw NoValidFit("shared_dissipativity_fit: no (kappa, C0) pair under cap " +
                     std::to_string(opts.c0_cap) + "; best margin " +
                     std::to_string(best.margin));
}

inline DissipativityFit dissipativity_fit(const std::vector<double>& times,
                                          const std::vector<double>& energies,
                                          double e0,
                                          const FitOptions& opts = {}) {
    return shared_dissipativity_fit({EnergySeries{times, energies, e0}}, opts);
}

inline DissipativityFit dissipativity_fit(const EnergyReport& report, double e0,
                                          const FitOptions& opts = {}) {
    return dissipativity_fit(report.times, report.energy, e0, opts);
}

// ---------------------------------------------------------------------------
// entropy dissipation estimate

/// Discrete-in-time left side of the entropy estimate per snapshot interval:
/// 2 d/dt int mu_hat(u) + 1/2 ||u||_H2^2 + eta int |u|^(p-2) |grad u|^2.
inline std::vector<double> entropy_dissipation_lhs(const Trajectory& traj,
                                                   const MobilitySpec& mob,
                                                   const PotentialSpec& spec) {
    if (spec.kind != PotentialKind::PolynomialGrowth || !(spec.p > 2.0) ||
        !(spec.p < 6.0))
        throw WrongPotentialClass(
            "entropy_dissipation_lhs: polynomial potential with p in (2, 6) required");
    const auto& st = traj.states;
    if (st.size() < 2)
        throw Error("entropy_dissipation_lhs: at least two snapshots required");

    auto spatial = [&](const GridFunction& u) {
        const Norms nm = norms(u);
        double grad_term = 0.0;
        const double inv_h = 1.0 / u.grid.h;
        detail::for_each_face(u.grid, [&](std::size_t i, std::size_t j) {
            const double um = 0.5 * std::abs(u[i] + u[j]);
            const double du = (u[j] - u[i]) * inv_h;
            grad_term += std::pow(um, spec.p - 2.0) * du * du;
        });
        grad_term *= u.grid.cell_volume();
        return 0.5 * nm.h2_discrete * nm.h2_discrete + spec.eta * grad_term;
    };

    std::vector<double> lhs;
    lhs.reserve(st.size() - 1);
    double m_prev = entropy_functional(st[0].u, mob);
    double s_prev = spatial(st[0].u);
    for (std::size_t k = 1; k < st.size(); ++k) {
        const double m_now = entropy_functional(st[k].u, mob);
        const double s_now = spatial(st[k].u);
        const double dt = st[k].t - st[k - 1].t;
        lhs.push_back(2.0 * (m_now - m_prev) / dt + 0.5 * (s_prev + s_now));
        m_prev = m_now;
        s_prev = s_now;
    }
    return lhs;
}

struct EntropyCheck {
    long violations = 0;
    double worst = 0.0; // max over intervals of (lhs - c6)
    double c6 = 0.0;
};

/// With no constant supplied, fits the smallest compliant c6 and reports
/// violations against it (zero by construction); with a shared constant it
/// certifies the trajectory against that constant.
inline EntropyCheck entropy_dissipation_check(
    const Trajectory& traj, const MobilitySpec& mob, const PotentialSpec& spec,
    std::optional<double> c6 = std::nullopt) {
    const std::vector<double> lhs = entropy_dissipation_lhs(traj, mob, spec);
    double peak = -std::numeric_limits<double>::infinity();
    for (double v : lhs) peak = std::max(peak, v);
    EntropyCheck out;
    out.c6 = c6.value_or(peak);
    out.worst = peak - out.c6;
    for (double v : lhs)
        if (v > out.c6 + 1e-12 * std::max(1.0, std::abs(out.c6))) ++out.violations;
    return out;
}

// ---------------------------------------------------------------------------
// local regularization windows

struct RegWindow {
    double onset = 0.0;
    double length = 0.0;
};

/// Maximal snapshot intervals where d_W(u(t), 0) stays below C_bound and
/// whose length reaches the requested window.
inline std::vector<RegWindow>
regularization_window_scan(const Trajectory& traj, const PotentialSpec& spec,
                           double c_bound, double window) {
    const auto& st = traj.states;
    if (st.empty()) throw Error("regularization_window_scan: empty trajectory");
    if (st.back().t - st.front().t < 1.0 - 1e-9)
        throw Error(
            "regularization_window_scan: trajectory must span at least unit time");
    const RegularizedPotential reg(spec, traj.config.yosida_n);
    const GridFunction zero(st.front().u.grid, 0.0);

    std::vector<RegWindow> out;
    std::size_t start = 0;
    bool open = false;
    auto close = [&](std::size_t last) {
        const double len = st[last].t - st[start].t;
        if (len >= window - 1e-12)
            out.push_back(RegWindow{st[start].t, len});
    };
    for (std::size_t k = 0; k < st.size(); ++k) {
        const double d = dist_W(st[k].u, zero, spec, reg);
        if (d <= c_bound) {
            if (!open) {
                open = true;
                start = k;
            }
            if (k + 1 == st.size()) close(k);
        } else if (open) {
            close(k - 1);
            open = false;
        }
    }
    return out;
}

/// The lemma-shaped probe: does some reported window contain a subinterval
/// [T + tau, T + tau + delta] with tau in [0, tau_max]?
inline bool window_exists_at(const std::vector<RegWindow>& windows, double t,
                             double tau_max, double delta) {
    for (const auto& w : windows) {
        const double s = std::max(t, w.onset);
        if (s <= t + tau_max + 1e-12 &&
            s + delta <= w.onset + w.length + 1e-12)
            return true;
    }
    return false;
}

} // namespace mobch

#endif
