#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "mobch/diagnostics.hpp"

using namespace mobch;

namespace {

GridFunction cosine_field(const Grid& g, double mean_val, double amp, int mode) {
    GridFunction v(g, mean_val);
    for (int i = 0; i < g.n_cells; ++i)
        v[static_cast<std::size_t>(i)] +=
            amp * std::cos(mode * M_PI * (i + 0.5) * g.h / g.extent());
    return v;
}

Trajectory spinodal_run(double dt, double t_end, int n, int snap_every) {
    const Grid g(1, n, 4.0 / n);
    SimConfig cfg;
    cfg.dt = dt;
    cfg.t_end = t_end;
    cfg.snapshot_every = snap_every;
    cfg.yosida_n = 10000;
    const auto spec = PotentialSpec::double_well();
    const RegularizedPotential reg(spec, cfg.yosida_n);
    const auto mob = MobilitySpec::sinusoidal(2.0, 1.0);
    return run(cosine_field(g, 0.0, 0.4, 1), cfg, mob, reg);
}

} // namespace

TEST_CASE("energy on reference fields") {
    const Grid g(1, 10, 0.1); // volume 1
    const auto dw = PotentialSpec::double_well();
    const GridFunction f0(g, 0.0);
    REQUIRE(energy(GridFunction(g, 0.0), dw, f0) == Catch::Approx(0.25).margin(1e-14));
    REQUIRE(energy(GridFunction(g, 1.0), dw, f0) == Catch::Approx(0.0).margin(1e-14));

    // constant source shifts the energy by f*mean(u)*|Omega|
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    GridFunction u(g);
    for (double& x : u.values) x = dist(rng);
    const GridFunction fc(g, 0.7);
    REQUIRE(energy(u, dw, fc) - energy(u, dw, f0) ==
            Catch::Approx(0.7 * mean(u) * g.volume()).margin(1e-13));

    // eq-propEn lower bound with module-computed constants
    const auto lb = energy_lower_bound(dw, norm_l2(fc), g.volume());
    for (unsigned seed = 0; seed < 20; ++seed) {
        std::mt19937 r2(seed);
        GridFunction v(g);
        for (double& x : v.values) x = 3.0 * dist(r2);
        const double nv = norm_v(v);
        REQUIRE(energy(v, dw, fc) >= lb.eta_e * nv * nv - lb.c_e - 1e-10);
    }
}

TEST_CASE("energy_n is dominated by energy and converges") {
    const Grid g(1, 16, 0.25);
    const auto dw = PotentialSpec::double_well();
    const GridFunction f0(g, 0.0);
    const GridFunction u = cosine_field(g, 0.1, 0.6, 2);

    REQUIRE(energy_n(GridFunction(g, 0.0), RegularizedPotential(dw, 17), f0) ==
            Catch::Approx(0.25 * g.volume()).margin(1e-13));

    double prev_gap = std::numeric_limits<double>::infinity();
    for (long n : {10L, 1000L}) {
        const RegularizedPotential reg(dw, n);
        const double en = energy_n(u, reg, f0);
        REQUIRE(en <= energy(u, dw, f0) + 1e-10);
        const double gap = std::abs(en - energy(u, dw, f0));
        REQUIRE(gap <= prev_gap + 1e-12);
        prev_gap = gap;
    }
}

TEST_CASE("energy equality residual: trivial cases and dt order") {
    const auto spec = PotentialSpec::double_well();
    const auto mob = MobilitySpec::sinusoidal(2.0, 1.0);

    // constant trajectory: every term vanishes
    {
        const Grid g(1, 16, 0.25);
        SimConfig cfg;
        cfg.dt = 1e-2;
        cfg.t_end = 1.0;
        cfg.snapshot_every = 10;
        const RegularizedPotential reg(spec, cfg.yosida_n);
        const Trajectory traj = run(GridFunction(g, 0.2), cfg, mob, reg);
        REQUIRE(energy_equality_residual(traj, mob, reg, 0.0, 1.0) == 0.0);
        REQUIRE(energy_equality_residual(traj, mob, reg, 0.5, 0.5) == 0.0);
        REQUIRE_THROWS_AS(energy_equality_residual(traj, mob, reg, 0.0, 0.123),
                          TimesNotInTrajectory);

        // translation invariance: shifting all snapshot times changes nothing
        Trajectory shifted_traj = traj;
        for (auto& s : shifted_traj.states) s.t += 3.0;
        REQUIRE(energy_equality_residual(shifted_traj, mob, reg, 3.0, 4.0) ==
                energy_equality_residual(traj, mob, reg, 0.0, 1.0));
    }

    // first-order decay of the residual under dt halving, on the constant-
    // mobility spinodal scenario; snapshot spacing scales with dt
    const RegularizedPotential reg(spec, 10000);
    const auto unit_mob = MobilitySpec::constant(1.0);
    auto residual_at = [&](double dt) {
        const Grid g(1, 48, 4.0 / 48);
        SimConfig cfg;
        cfg.dt = dt;
        cfg.t_end = 0.5;
        cfg.snapshot_every = std::max(1, static_cast<int>(std::llround(0.5 / dt / 125)));
        const Trajectory t = run(cosine_field(g, 0.0, 0.01, 1), cfg, unit_mob, reg);
        return energy_equality_residual(t, unit_mob, reg, 0.0, 0.5);
    };
    const double r1 = residual_at(8e-4);
    const double r2 = residual_at(4e-4);
    const double r3 = residual_at(2e-4);
    REQUIRE(r1 / r2 > 1.7);
    REQUIRE(r1 / r2 < 2.3);
    REQUIRE(r2 / r3 > 1.7);
    REQUIRE(r2 / r3 < 2.3);
}

TEST_CASE("energy report series are coherent") {
    const auto spec = PotentialSpec::double_well();
    const auto mob = MobilitySpec::sinusoidal(2.0, 1.0);
    const RegularizedPotential reg(spec, 10000);
    const Trajectory traj = spinodal_run(2e-3, 0.5, 48, 25);
    const EnergyReport rep = build_energy_report(traj, spec, mob, reg);

    REQUIRE(rep.times.size() == traj.states.size());
    for (std::size_t k = 1; k < rep.dissipation.size(); ++k) {
        REQUIRE(rep.dissipation[k] >= rep.dissipation[k - 1]);
        REQUIRE(rep.energy_n[k] <= rep.energy_n[k - 1] + 1e-9);
        REQUIRE(rep.energy_n[k] <= rep.energy[k] + 1e-10);
    }
    // the cumulative defect stays first-order small on this horizon
    REQUIRE(std::abs(rep.residual_energy_eq.back()) < 5e-2);
}

TEST_CASE("dissipativity fit on reference series") {
    // constant series: C0 = E*, any kappa valid
    {
        std::vector<double> t, e;
        for (int k = 0; k <= 50; ++k) {
            t.push_back(0.5 * k);
            e.push_back(1.7);
        }
        const DissipativityFit fit = dissipativity_fit(t, e, 1.7);
        REQUIRE(fit.valid());
        REQUIRE(fit.c0 == Catch::Approx(1.7).margin(1e-12));
        REQUIRE(fit.kappa == Catch::Approx(100.0).epsilon(1e-9));
    }
    // analytic series E(t) = 2 exp(-t) + 1 with e0 = 3
    {
        std::vector<double> t, e;
        for (int k = 0; k <= 400; ++k) {
            t.push_back(0.1 * k);
            e.push_back(2.0 * std::exp(-0.1 * k) + 1.0);
        }
        const DissipativityFit fit = dissipativity_fit(t, e, 3.0);
        REQUIRE(fit.valid());
        REQUIRE(fit.kappa > 0.9);
        REQUIRE(fit.kappa < 1.05);
        REQUIRE(fit.c0 == Catch::Approx(1.0).margin(1e-6));
        REQUIRE(fit.margin >= 0.0);
        REQUIRE(fit.margin < 1e-6);

        // validity is preserved under subsampling
        std::vector<double> ts, es;
        for (std::size_t k = 0; k < t.size(); k += 7) {
            ts.push_back(t[k]);
            es.push_back(e[k]);
        }
        REQUIRE(fit_margin(fit, ts, es, 3.0) >= fit.margin);
    }
    // strictly increasing series cannot fit below its supremum
    {
        std::vector<double> t, e;
        for (int k = 0; k <= 50; ++k) {
            t.push_back(0.2 * k);
            e.push_back(0.1 * k);
        }
        FitOptions opts;
        opts.c0_cap = 3.0; // supremum is 5
        REQUIRE_THROWS_AS(dissipativity_fit(t, e, 0.0, opts), NoValidFit);
    }
}

TEST_CASE("entropy functional: closed form, bracket, zero") {
    const Grid g(1, 10, 0.1); // volume 1
    const auto one = MobilitySpec::constant(1.0);
    REQUIRE(entropy_functional(GridFunction(g, 0.0), one) == 0.0);
    // b = 1: mu_hat(s) = s^2/2, so ||u||^2 = 4 gives 2
    REQUIRE(entropy_functional(GridFunction(g, 2.0), one) ==
            Catch::Approx(2.0).margin(1e-10));

    const auto mob = MobilitySpec::sinusoidal(2.0, 1.0);
    const double mh1 = entropy_mu_hat(mob, 1.0);
    REQUIRE(mh1 >= 1.0 / 6.0);
    REQUIRE(mh1 <= 0.5);
    for (int k = -40; k <= 40; ++k) {
        const double s = 5.0 * k / 40.0;
        const double mh = entropy_mu_hat(mob, s);
        REQUIRE(mh >= s * s / (2.0 * mob.mu_upper) - 1e-8);
        REQUIRE(mh <= s * s / (2.0 * mob.alpha) + 1e-8);
    }
}

TEST_CASE("entropy dissipation check") {
    const auto poly = PotentialSpec::polynomial(4.0, 3.0, 3.0, 1.0);
    const auto mob = MobilitySpec::sinusoidal(2.0, 1.0);
    const Grid g(1, 24, 4.0 / 24.0);

    SimConfig cfg;
    cfg.dt = 1e-2;
    cfg.t_end = 1.0;
    cfg.snapshot_every = 10;
    const RegularizedPotential reg(poly, cfg.yosida_n);

    // constant trajectory: bounded left side, no violations
    const Trajectory tconst = run(GridFunction(g, 0.3), cfg, mob, reg);
    const EntropyCheck c1 = entropy_dissipation_check(tconst, mob, poly);
    REQUIRE(c1.violations == 0);
    REQUIRE(c1.worst <= 0.0);

    // u = 0 with unit mobility: the left side vanishes, c6 = 0 suffices
    const auto one = MobilitySpec::constant(1.0);
    const Trajectory tzero = run(GridFunction(g, 0.0), cfg, one, reg);
    const EntropyCheck c2 = entropy_dissipation_check(tzero, one, poly, 0.0);
    REQUIRE(c2.violations == 0);

    REQUIRE_THROWS_AS(
        entropy_dissipation_check(tconst, mob, PotentialSpec::double_well()),
        WrongPotentialClass);
}

TEST_CASE("regularization window scan") {
    const auto spec = PotentialSpec::double_well();
    const auto mob = MobilitySpec::constant(1.0);
    const Grid g(1, 16, 0.25);
    SimConfig cfg;
    cfg.dt = 1e-2;
    cfg.t_end = 2.0;
    cfg.snapshot_every = 5;
    const RegularizedPotential reg(spec, cfg.yosida_n);
    const Trajectory traj = run(GridFunction(g, 0.25), cfg, mob, reg);

    const GridFunction zero(g, 0.0);
    const double d = dist_W(traj.states.front().u, zero, spec);
    const auto windows = regularization_window_scan(traj, spec, d * 1.01, 0.1);
    REQUIRE(windows.size() == 1);
    REQUIRE(windows.front().onset == 0.0);
    REQUIRE(windows.front().length == Catch::Approx(2.0));

    REQUIRE(regularization_window_scan(traj, spec, 0.0, 0.1).empty());

    REQUIRE(window_exists_at(windows, 0.5, 1.5, 0.1));
    REQUIRE_FALSE(window_exists_at(windows, 2.5, 1.5, 0.1));
}
