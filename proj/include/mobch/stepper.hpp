// stepper.hpp
// Semi-implicit time stepping for u_t + B_u w = 0,
// w = eps*u_t + B u + W_n'(u) + f, with convex splitting: B u and beta_n
// implicit, the concave part -lambda*u explicit, mobility lagged at the
// previous state. Unconditionally energy stable for the regularized energy.

#ifndef MOBCH_STEPPER_HPP
#define MOBCH_STEPPER_HPP

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <utility>
#include <vector>

#include "mobch/energy.hpp"
#include "mobch/errors.hpp"
#include "mobch/grid.hpp"
#include "mobch/mobility.hpp"
#include "mobch/operators.hpp"
#include "mobch/potential.hpp"

namespace mobch {

struct SimConfig {
    double epsilon = 0.0;   // viscosity
    long yosida_n = 10000;  // regularization index
    double dt = 1e-4;
    double t_end = 1.0;
    double newton_tol = 1e-10; // absolute, combined discrete L2 residual
    int newton_max_iter = 30;
    double m = 0.5;         // admissible band for |mean(u)|
    int snapshot_every = 100;
    GridFunction f;         // time-independent source; empty means zero
    bool couple_epsilon_to_n = false; // emulate eps_n = 1/n

    double effective_epsilon() const {
        return couple_epsilon_to_n ? 1.0 / static_cast<double>(yosida_n) : epsilon;
    }

    void validate() const {
        if (epsilon < 0.0) throw Error("SimConfig: epsilon >= 0 required");
        if (yosida_n < 1) throw Error("SimConfig: yosida_n >= 1 required");
        if (!(dt > 0.0)) throw Error("SimConfig: dt > 0 required");
        if (!(t_end >= 0.0)) throw Error("SimConfig: t_end >= 0 required");
        if (!(newton_tol > 0.0)) throw Error("SimConfig: newton_tol > 0 required");
        if (newton_max_iter < 1) throw Error("SimConfig: newton_max_iter >= 1 required");
        if (!(m > 0.0)) throw Error("SimConfig: m > 0 required");
        if (snapshot_every < 1) throw Error("SimConfig: snapshot_every >= 1 required");
    }
};

struct StepState {
    GridFunction u;
    GridFunction w;
    double t = 0.0;
    long step_index = 0;
};

struct TrajectoryStats {
    long total_newton_iters = 0;
    double max_energy_increase = 0.0; // worst E_n(u+) - E_n(u) over all steps
    long energy_violations = 0;       // steps with increase beyond newton_tol
    double max_mass_drift = 0.0;      // |mean(u) - mean(u0)| over all steps
};

struct Trajectory {
    std::vector<StepState> states; // uniform snapshot cadence, first at t = 0
    std::vector<int> newton_iters; // per snapshot: iterations of its last step
    SimConfig config;
    double initial_energy = 0.0;   // E(u0), or E_n(u0) if u0 escapes I
    double initial_energy_n = 0.0; // E_n(u0)
    TrajectoryStats stats;
};

/// Mollify raw initial data through (I + B/n)^{-1} and verify the discrete
/// contraction bounds and the energy inequality of the regularization step.
inline GridFunction prepare_initial(const GridFunction& u0_raw,
                                    const SimConfig& cfg,
                                    const PotentialSpec& spec) {
    cfg.validate();
    for (double x : u0_raw.values)
        if (!spec.contains(x))
            throw DomainViolation("prepare_initial: datum leaves the potential domain");
    const double mu0 = mean(u0_raw);
    if (std::abs(mu0) > cfg.m * (1.0 + 1e-14))
        throw MeanBoundViolation("prepare_initial: |mean(u0)| exceeds the band m");

    GridFunction u0 = elliptic_mollify(u0_raw, cfg.yosida_n);

    const double vn_raw = norm_v(u0_raw);
    if (norm_v(u0) > vn_raw + 1e-10)
        throw Error("prepare_initial: mollifier failed the V-norm contraction");
    if (norm_l2(u0 - u0_raw) >
        vn_raw / std::sqrt(static_cast<double>(cfg.yosida_n)) + 1e-10)
        throw Error("prepare_initial: mollifier failed the L2 distance bound");

    const RegularizedPotential reg(spec, cfg.yosida_n);
    double wn_out = 0.0, w_in = 0.0;
    for (double x : u0.values) wn_out += w_n_value(reg, x);
    for (double x : u0_raw.values) w_in += w_value(spec, x);
    const double cell = u0.grid.cell_volume();
    const double sigma_n = 0.5 * spec.lambda *
                           (norm_l2(u0_raw) * norm_l2(u0_raw) -
                            norm_l2(u0) * norm_l2(u0));
    if (wn_out * cell > w_in * cell + std::max(sigma_n, 0.0) + 1e-8)
        throw Error("prepare_initial: regularized energy exceeded the datum energy");
    return u0;
}

/// One-step solver with cached sparsity pattern; reusable across steps.
class Stepper {
public:
    Stepper(const Grid& grid, const SimConfig& cfg, const MobilitySpec& mob,
            const RegularizedPotential& reg)
        : grid_(grid), cfg_(cfg), mob_(mob), reg_(reg),
          f_(cfg.f.values.empty() ? GridFunction(grid, 0.0) : cfg.f),
          n_(grid.cell_count()) {
        cfg_.validate();
        if (!(f_.grid == grid)) throw Error("Stepper: source f lives on a different grid");
        detail::for_each_face(grid_, [&](std::size_t i, std::size_t j) {
            faces_.emplace_back(i, j);
        });
        face_mob_.resize(faces_.size());
        pattern_ready_ = false;
    }

    /// Advance (u, w) by one time step; returns the new state and the Newton
    /// iteration count. Throws NewtonDivergence when the residual cannot be
    /// brought below newton_tol (halving dt is the usual remedy).
    std::pair<StepState, int> advance(const StepState& s) {
        const double dt = cfg_.dt;
        const double eps = cfg_.effective_epsilon();
        const double lam = reg_.base.lambda;
        const double inv_h2 = 1.0 / (grid_.h * grid_.h);

        // lagged mobility at the previous state
        for (std::size_t k = 0; k < faces_.size(); ++k) {
            const auto [i, j] = faces_[k];
            face_mob_[k] = mob_.face_value(mob_.b(s.u[i]), mob_.b(s.u[j])) * inv_h2;
        }

        // warm start: linear extrapolation from the previous step when the
        // caller advances the same trajectory
        GridFunction u_new;
        if (have_prev_ && prev_step_index_ == s.step_index &&
            prev_u_.grid == s.u.grid) {
            u_new = s.u;
            for (std::size_t i = 0; i < n_; ++i) u_new[i] += s.u[i] - prev_u_[i];
        } else {
            u_new = s.u;
        }
        GridFunction w_new = consistent_w(u_new, s.u, 1.0 / dt);

        auto residual = [&](const GridFunction& u, const GridFunction& w,
                            GridFunction& f1, GridFunction& f2) {
            apply_bu(w, f1);
            for (std::size_t i = 0; i < n_; ++i)
                f1[i] += (u[i] - s.u[i]) / dt;
            apply_b(u, f2);
            for (std::size_t i = 0; i < n_; ++i)
                f2[i] = w[i] - eps * (u[i] - s.u[i]) / dt - f2[i] -
                        yosida_beta(reg_, u[i]) + lam * s.u[i] - f_[i];
            const double r1 = norm_l2(f1), r2 = norm_l2(f2);
            return std::sqrt(r1 * r1 + r2 * r2);
        };

        GridFunction f1(grid_), f2(grid_), f1t(grid_), f2t(grid_);
        double res = residual(u_new, w_new, f1, f2);
        int iters = 0;
        // linearization policy: fresh Jacobian on the first pass, reuse the
        // factorization afterwards, Picard (D = 0) as the stagnation fallback
        enum class Lin { Reuse, Fresh, Picard };
        Lin lin = Lin::Fresh;
        bool picard_tried = false;
        have_prev_ = false; // invalidated until this step completes
        while (res > cfg_.newton_tol) {
            if (iters >= cfg_.newton_max_iter)
                throw NewtonDivergence(
                    "newton residual " + std::to_string(res) +
                        " above tolerance after " + std::to_string(iters) +
                        " iterations; halving dt usually helps",
                    s.step_index + 1);
            if (lin != Lin::Reuse)
                assemble_and_factor(u_new, dt, eps, lin == Lin::Picard);
            solve_direction(f1, f2);
            // safeguarded update: halve until the residual decreases
            double step_len = 1.0;
            bool accepted = false;
            for (int ls = 0; ls < 8; ++ls) {
                GridFunction u_t = u_new, w_t = w_new;
                axpy(u_t, step_len, du_);
                axpy(w_t, step_len, dw_);
                const double res_trial = residual(u_t, w_t, f1t, f2t);
                if (res_trial < res * (1.0 - 1e-12) || res_trial <= cfg_.newton_tol) {
                    u_new = std::move(u_t);
                    w_new = std::move(w_t);
                    std::swap(f1, f1t);
                    std::swap(f2, f2t);
                    res = res_trial;
                    accepted = true;
                    break;
                }
                step_len *= 0.5;
            }
            ++iters;
            if (accepted) {
                lin = Lin::Reuse;
                continue;
            }
            if (lin == Lin::Reuse) {
                lin = Lin::Fresh; // the reused Jacobian went stale
            } else if (!picard_tried) {
                picard_tried = true;
                lin = Lin::Picard;
            } else {
                throw NewtonDivergence(
                    "newton stagnated at residual " + std::to_string(res) +
                        "; halving dt usually helps",
                    s.step_index + 1);
            }
        }

        StepState out;
        out.u = std::move(u_new);
        out.w = std::move(w_new);
        out.t = static_cast<double>(s.step_index + 1) * dt;
        out.step_index = s.step_index + 1;
        prev_u_ = s.u;
        prev_step_index_ = out.step_index;
        have_prev_ = true;
        return {std::move(out), iters};
    }

    /// Chemical potential consistent with a state: eps*du + B u + beta_n(u)
    /// - lambda*u_prev + f, with du the already-scaled (u - u_prev)/dt.
    GridFunction consistent_w(const GridFunction& u, const GridFunction& u_prev,
                              double du_scale) const {
        GridFunction w(grid_);
        GridFunction bu(grid_);
        apply_b(u, bu);
        const double eps = cfg_.effective_epsilon();
        const double lam = reg_.base.lambda;
        for (std::size_t i = 0; i < n_; ++i)
            w[i] = eps * du_scale * (u[i] - u_prev[i]) + bu[i] +
                   yosida_beta(reg_, u[i]) - lam * u_prev[i] + f_[i];
        return w;
    }

private:
    void apply_b(const GridFunction& v, GridFunction& out) const {
        const double inv_h2 = 1.0 / (grid_.h * grid_.h);
        std::fill(out.values.begin(), out.values.end(), 0.0);
        for (const auto& [i, j] : faces_) {
            const double q = (v[i] - v[j]) * inv_h2;
            out[i] += q;
            out[j] -= q;
        }
    }

    void apply_bu(const GridFunction& v, GridFunction& out) const {
        std::fill(out.values.begin(), out.values.end(), 0.0);
        for (std::size_t k = 0; k < faces_.size(); ++k) {
            const auto [i, j] = faces_[k];
            const double q = face_mob_[k] * (v[i] - v[j]);
            out[i] += q;
            out[j] -= q;
        }
    }

    void assemble_and_factor(const GridFunction& u_new, double dt, double eps,
                             bool picard) {
        const double inv_h2 = 1.0 / (grid_.h * grid_.h);
        const long nn = static_cast<long>(n_);
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(4 * n_ + 8 * faces_.size());

        std::vector<double> bu_diag(n_, 0.0), b_diag(n_, 0.0);
        for (std::size_t k = 0; k < faces_.size(); ++k) {
            const auto [i, j] = faces_[k];
            bu_diag[i] += face_mob_[k];
            bu_diag[j] += face_mob_[k];
            b_diag[i] += inv_h2;
            b_diag[j] += inv_h2;
        }
        for (std::size_t k = 0; k < faces_.size(); ++k) {
            const auto [si, sj] = faces_[k];
            const long i = static_cast<long>(si), j = static_cast<long>(sj);
            // rows F1: B_u block in the w columns
            trips.emplace_back(i, nn + j, -face_mob_[k]);
            trips.emplace_back(j, nn + i, -face_mob_[k]);
            // rows F2: -B block in the u columns (off-diagonal of -B is +)
            trips.emplace_back(nn + i, j, inv_h2);
            trips.emplace_back(nn + j, i, inv_h2);
        }
        for (long i = 0; i < nn; ++i) {
            const std::size_t si = static_cast<std::size_t>(i);
            trips.emplace_back(i, i, 1.0 / dt);
            trips.emplace_back(i, nn + i, bu_diag[si]);
            const double d = picard ? 0.0 : yosida_beta_prime(reg_, u_new[si]);
            trips.emplace_back(nn + i, i, -eps / dt - b_diag[si] - d);
            trips.emplace_back(nn + i, nn + i, 1.0);
        }

        Eigen::SparseMatrix<double> a(2 * nn, 2 * nn);
        a.setFromTriplets(trips.begin(), trips.end());
        a.makeCompressed();
        if (!pattern_ready_) {
            lu_.analyzePattern(a);
            pattern_ready_ = true;
        }
        lu_.factorize(a);
        if (lu_.info() != Eigen::Success) {
            lu_.analyzePattern(a); // pattern may differ when D has exact zeros
            lu_.factorize(a);
            if (lu_.info() != Eigen::Success)
                throw Error("Stepper: sparse LU factorization failed");
        }
    }

    void solve_direction(const GridFunction& f1, const GridFunction& f2) {
        const long nn = static_cast<long>(n_);
        Eigen::VectorXd rhs(2 * nn);
        for (long i = 0; i < nn; ++i) {
            rhs[i] = -f1[static_cast<std::size_t>(i)];
            rhs[nn + i] = -f2[static_cast<std::size_t>(i)];
        }
        const Eigen::VectorXd x = lu_.solve(rhs);
        du_ = GridFunction(grid_);
        dw_ = GridFunction(grid_);
        for (long i = 0; i < nn; ++i) {
            du_[static_cast<std::size_t>(i)] = x[i];
            dw_[static_cast<std::size_t>(i)] = x[nn + i];
        }
    }

    Grid grid_;
    SimConfig cfg_;
    MobilitySpec mob_;
    RegularizedPotential reg_;
    GridFunction f_;
    std::size_t n_;
    std::vector<std::pair<std::size_t, std::size_t>> faces_;
    std::vector<double> face_mob_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
    bool pattern_ready_ = false;
    GridFunction du_, dw_;
    GridFunction prev_u_;
    long prev_step_index_ = -1;
    bool have_prev_ = false;
};

/// Single step with a throwaway workspace. For time loops prefer run().
inline StepState step(const StepState& state, const SimConfig& cfg,
                      const MobilitySpec& mob, const RegularizedPotential& reg) {
    Stepper st(state.u.grid, cfg, mob, reg);
    return st.advance(state).first;
}

/// Run from t = 0 to t_end with snapshots every snapshot_every steps.
inline Trajectory run(const GridFunction& u0, const SimConfig& cfg,
                      const MobilitySpec& mob, const RegularizedPotential& reg) {
    cfg.validate();
    const double mean0 = mean(u0);
    if (std::abs(mean0) > cfg.m * (1.0 + 1e-14))
        throw MeanBoundViolation("run: |mean(u0)| exceeds the band m");

    Trajectory traj;
    traj.config = cfg;
    const GridFunction f = cfg.f.values.empty() ? GridFunction(u0.grid, 0.0) : cfg.f;
    traj.initial_energy_n = energy_n(u0, reg, f);
    bool interior = true;
    for (double x : u0.values) interior = interior && reg.base.contains(x);
    traj.initial_energy = interior ? energy(u0, reg.base, f) : traj.initial_energy_n;

    Stepper st(u0.grid, cfg, mob, reg);
    StepState state;
    state.u = u0;
    state.w = st.consistent_w(u0, u0, 0.0);
    state.t = 0.0;
    state.step_index = 0;

    const long total_steps = std::llround(cfg.t_end / cfg.dt);
    traj.states.push_back(state);
    traj.newton_iters.push_back(0);

    double e_prev = traj.initial_energy_n;
    for (long k = 1; k <= total_steps; ++k) {
        std::pair<StepState, int> next = st.advance(state);
        state = std::move(next.first);
        traj.stats.total_newton_iters += next.second;

        const double e_now = energy_n(state.u, reg, f);
        const double incr = e_now - e_prev;
        if (incr > traj.stats.max_energy_increase)
            traj.stats.max_energy_increase = incr;
        if (incr > cfg.newton_tol) ++traj.stats.energy_violations;
        e_prev = e_now;

        const double drift = std::abs(mean(state.u) - mean0);
        if (drift > traj.stats.max_mass_drift) traj.stats.max_mass_drift = drift;

        if (k % cfg.snapshot_every == 0) {
            traj.states.push_back(state);
            traj.newton_iters.push_back(next.second);
        }
    }
    return traj;
}

} // namespace mobch

#endif
