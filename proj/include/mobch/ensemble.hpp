// ensemble.hpp
// Ensembles of trajectories from bounded sets of initial data, with the
// empirical probes for point dissipativity and asymptotic compactness:
// pairwise d_V statistics, greedy covering numbers, steady-state residuals.

#ifndef MOBCH_ENSEMBLE_HPP
#define MOBCH_ENSEMBLE_HPP

#include <atomic>
#include <cmath>
#include <random>
#include <thread>
#include <vector>

#include "mobch/diagnostics.hpp"
#include "mobch/errors.hpp"
#include "mobch/metrics.hpp"
#include "mobch/stepper.hpp"

namespace mobch {

struct EnsembleConfig {
    int count = 2;
    double radius = 2.0;    // bound R on d_V(u0, 0)
    double mean_band = 0.2; // m
    unsigned long seed = 1;
    std::vector<double> sample_times;
    SimConfig base;
    Grid grid;
    std::vector<double> rho_ladder; // absolute radii; empty = scaled default
    bool use_l2_metric = false;     // probe in the plain-L2 (entropy) metric
    double amplitude_floor = 0.2;   // draw amplitudes in [floor, 1] * radius

    void validate() const {
        if (count < 2) throw Error("EnsembleConfig: count >= 2 required");
        if (!(mean_band > 0.0)) throw Error("EnsembleConfig: mean_band > 0 required");
        if (!(amplitude_floor >= 0.0 && amplitude_floor <= 1.0))
            throw Error("EnsembleConfig: amplitude_floor in [0, 1] required");
        for (std::size_t k = 1; k < sample_times.size(); ++k)
            if (!(sample_times[k] > sample_times[k - 1]))
                throw Error("EnsembleConfig: sample_times must increase");
    }
};

struct CompactnessReport {
    std::vector<double> sample_times;
    std::vector<double> rho_values;          // descending ladder actually used
    std::vector<std::vector<long>> covering; // [time][rho]
    std::vector<double> diameter;            // [time]
    std::vector<double> max_residual;        // [time]
    bool compactness_evidence = false; // final diameter <= initial diameter
};

/// sqrt(<B_u w, w>): the mobility-weighted gradient norm of the chemical
/// potential; vanishes exactly at steady states.
inline double steady_state_residual(const StepState& state,
                                    const MobilitySpec& mob) {
    const GridFunction b_cells = mob.at_cells(state.u);
    return std::sqrt(std::max(0.0, inner(div_b_grad(mob, b_cells, state.w), state.w)));
}

/// Deterministic band-limited random fields rescaled into the mean band and
/// the d_V ball of radius R, with values strictly interior to I.
inline std::vector<GridFunction> generate_ensemble(const EnsembleConfig& cfg,
                                                   const PotentialSpec& spec) {
    cfg.validate();
    if (!(cfg.radius > 0.0))
        throw RadiusInfeasible("generate_ensemble: radius must be positive");
    const Grid& g = cfg.grid;
    const double interior_cap =
        spec.singular() ? 0.95 * spec.domain_hi : std::numeric_limits<double>::infinity();

    std::vector<GridFunction> out;
    out.reserve(cfg.count);
    for (int member = 0; member < cfg.count; ++member) {
        std::seed_seq sseq{static_cast<unsigned long>(cfg.seed),
                           static_cast<unsigned long>(member)};
        std::mt19937_64 rng(sseq);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        std::normal_distribution<double> gauss(0.0, 1.0);

        const double target_mean = 0.9 * cfg.mean_band * unif(rng);
        const int modes = std::min(6, std::max(1, g.n_cells / 4));
        std::vector<double> ax(modes), ay(modes);
        for (int k = 0; k < modes; ++k) {
            ax[k] = gauss(rng) / ((k + 1.0) * (k + 1.0));
            ay[k] = g.dim == 2 ? gauss(rng) / ((k + 1.0) * (k + 1.0)) : 0.0;
        }

        GridFunction u(g, 0.0);
        const double L = g.extent();
        for (std::size_t idx = 0; idx < u.size(); ++idx) {
            const int ix = g.dim == 1 ? static_cast<int>(idx)
                                      : static_cast<int>(idx % g.n_cells);
            const int iy = g.dim == 1 ? 0 : static_cast<int>(idx / g.n_cells);
            const double x = (ix + 0.5) * g.h;
            double s = 0.0;
            for (int k = 0; k < modes; ++k) {
                s += ax[k] * std::cos((k + 1) * M_PI * x / L);
                if (g.dim == 2) {
                    const double y = (iy + 0.5) * g.h;
                    s += ay[k] * std::cos((k + 1) * M_PI * y / L);
                }
            }
            u[idx] = s;
        }
        // normalize the fluctuation, then place it on the requested mean
        const double fl = norm_l2(u);
        const double amp =
            (cfg.amplitude_floor + (1.0 - cfg.amplitude_floor) * std::abs(unif(rng))) *
            cfg.radius;
        if (fl > 0.0)
            for (double& x : u.values) x *= amp / fl;
        for (double& x : u.values) x += target_mean;

        bool ok = false;
        for (int shrink = 0; shrink < 300; ++shrink) {
            double peak = 0.0;
            for (double x : u.values) peak = std::max(peak, std::abs(x));
            if (peak < interior_cap &&
                dist_V(u, GridFunction(g, 0.0), spec) <= cfg.radius &&
                std::abs(mean(u)) <= cfg.mean_band) {
                ok = true;
                break;
            }
            for (double& x : u.values) x *= 0.7;
        }
        if (!ok)
            throw RadiusInfeasible(
                "generate_ensemble: radius too small for member " +
                std::to_string(member));
        out.push_back(std::move(u));
    }
    return out;
}

/// Run every member; trajectories are independent and run concurrently.
/// The first failing member aborts the ensemble with its index attached.
inline std::vector<Trajectory> run_ensemble(const EnsembleConfig& cfg,
                                            const PotentialSpec& spec,
                                            const MobilitySpec& mob,
                                            int workers = 0) {
    const std::vector<GridFunction> initials = generate_ensemble(cfg, spec);
    const RegularizedPotential reg(spec, cfg.base.yosida_n);

    std::vector<Trajectory> out(initials.size());
    std::vector<std::exception_ptr> errors(initials.size());
    std::atomic<std::size_t> next{0};

    auto work = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= initials.size()) return;
            try {
                const GridFunction u0 = prepare_initial(initials[i], cfg.base, spec);
                out[i] = run(u0, cfg.base, mob, reg);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };

    unsigned nw = workers > 0 ? static_cast<unsigned>(workers)
                              : std::max(1u, std::thread::hardware_concurrency());
    nw = std::min<unsigned>(nw, static_cast<unsigned>(initials.size()));
    if (nw <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nw);
        for (unsigned t = 0; t < nw; ++t) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }

    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (errors[i]) {
            try {
                std::rethrow_exception(errors[i]);
            } catch (const std::exception& e) {
                throw Error("ensemble member " + std::to_string(i) + " (seed " +
                            std::to_string(cfg.seed) + "): " + e.what());
            }
        }
    }
    return out;
}

namespace detail {

inline std::size_t state_index_at(const Trajectory& traj, double t) {
    for (std::size_t k = 0; k < traj.states.size(); ++k)
        if (std::abs(traj.states[k].t - t) <= 1e-9 * std::max(1.0, std::abs(t)))
            return k;
    throw MismatchedSampling("trajectory has no snapshot at t = " +
                             std::to_string(t));
}

/// Greedy epsilon-net size over a symmetric distance matrix.
inline long greedy_covering(const std::vector<std::vector<double>>& dist,
                            double rho) {
    const std::size_t n = dist.size();
    std::vector<bool> covered(n, false);
    long centers = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (covered[i]) continue;
        ++centers;
        for (std::size_t j = 0; j < n; ++j)
            if (dist[i][j] <= rho) covered[j] = true;
    }
    return centers;
}

} // namespace detail

inline CompactnessReport compactness_probe(const std::vector<Trajectory>& trajs,
                                           const EnsembleConfig& cfg,
                                           const PotentialSpec& spec,
                                           const MobilitySpec& mob) {
    if (trajs.empty()) throw Error("compactness_probe: no trajectories");
    if (cfg.sample_times.empty())
        throw Error("compactness_probe: no sample times configured");

    CompactnessReport rep;
    rep.sample_times = cfg.sample_times;

    auto metric = [&](const GridFunction& a, const GridFunction& b) {
        return cfg.use_l2_metric ? norm_l2(a - b) : dist_V(a, b, spec);
    };

    const std::size_t n = trajs.size();
    for (double t : cfg.sample_times) {
        std::vector<const StepState*> states;
        states.reserve(n);
        for (const auto& traj : trajs)
            states.push_back(&traj.states[detail::state_index_at(traj, t)]);

        std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
        double diam = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                const double d = metric(states[i]->u, states[j]->u);
                dist[i][j] = dist[j][i] = d;
                diam = std::max(diam, d);
            }
        rep.diameter.push_back(diam);

        if (rep.rho_values.empty()) {
            if (!cfg.rho_ladder.empty()) {
                rep.rho_values = cfg.rho_ladder;
            } else {
                const double base = diam > 0.0 ? diam : 1.0;
                rep.rho_values = {0.4 * base, 0.2 * base, 0.1 * base, 0.05 * base};
            }
            std::sort(rep.rho_values.begin(), rep.rho_values.end(),
                      std::greater<double>());
        }

        std::vector<long> cov;
        cov.reserve(rep.rho_values.size());
        for (double rho : rep.rho_values)
            cov.push_back(detail::greedy_covering(dist, rho));
        rep.covering.push_back(std::move(cov));

        double worst = 0.0;
        for (const StepState* s : states)
            worst = std::max(worst, steady_state_residual(*s, mob));
        rep.max_residual.push_back(worst);
    }
    rep.compactness_evidence = rep.diameter.back() <= rep.diameter.front();
    return rep;
}

} // namespace mobch

#endif
