// cli.hpp
// Subcommand dispatch for the mobch binary: run, ensemble, diagnose,
// potential-table. Exit codes: 0 success, 1 configuration or usage error,
// 2 solver divergence, 3 diagnostic failure. Errors are printed to stderr
// with the machine-greppable prefix "mobch:".

#ifndef MOBCH_CLI_HPP
#define MOBCH_CLI_HPP

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "mobch/config.hpp"
#include "mobch/diagnostics.hpp"
#include "mobch/ensemble.hpp"
#include "mobch/snapshot_io.hpp"

namespace mobch::cli {

namespace detail {

inline int env_threads() {
    const char* s = std::getenv("MOBCH_THREADS");
    if (!s) return 0; // auto
    const int v = std::atoi(s);
    return v > 0 ? v : 1;
}

inline std::string snap_name(const char* field, std::size_t k) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s_%05zu.snap", field, k);
    return buf;
}

inline TrajectorySeries make_series(const Trajectory& traj,
                                    const EnergyReport& rep) {
    TrajectorySeries s;
    s.t = rep.times;
    s.mass = rep.mass;
    s.energy = rep.energy;
    s.energy_n = rep.energy_n;
    s.entropy = rep.entropy;
    s.h2_norm = rep.h2;
    s.newton_iters.assign(traj.newton_iters.begin(), traj.newton_iters.end());
    return s;
}

} // namespace detail

inline int cmd_run(const std::string& config_path, const std::string& out_dir,
                   bool with_snapshots) {
    const RootConfig rc = parse_config(config_path);
    const RegularizedPotential reg(rc.potential, rc.sim.yosida_n);

    const GridFunction u0 =
        prepare_initial(rc.initial_field(), rc.sim, rc.potential);
    const Trajectory traj = run(u0, rc.sim, rc.mobility, reg);
    const EnergyReport rep = build_energy_report(traj, rc.potential, rc.mobility, reg);

    std::filesystem::create_directories(out_dir);
    write_trajectory_csv(out_dir + "/trajectory.csv",
                         detail::make_series(traj, rep));
    if (with_snapshots) {
        for (std::size_t k = 0; k < traj.states.size(); ++k) {
            write_snapshot(out_dir + "/" + detail::snap_name("u", k),
                           traj.states[k].u, traj.states[k].t);
            write_snapshot(out_dir + "/" + detail::snap_name("w", k),
                           traj.states[k].w, traj.states[k].t);
        }
    }
    std::printf("mobch run: steps=%lld snapshots=%zu mass_drift=%s "
                "max_energy_increase=%s newton_iters=%ld\n",
                static_cast<long long>(std::llround(rc.sim.t_end / rc.sim.dt)),
                traj.states.size(),
                mobch::detail::fmt17(traj.stats.max_mass_drift).c_str(),
                mobch::detail::fmt17(traj.stats.max_energy_increase).c_str(),
                traj.stats.total_newton_iters);
    return 0;
}

inline int cmd_ensemble(const std::string& config_path,
                        const std::string& out_dir) {
    const RootConfig rc = parse_config(config_path);
    const std::vector<Trajectory> trajs =
        run_ensemble(rc.ensemble, rc.potential, rc.mobility, detail::env_threads());
    const CompactnessReport rep =
        compactness_probe(trajs, rc.ensemble, rc.potential, rc.mobility);

    std::filesystem::create_directories(out_dir);
    const RegularizedPotential reg(rc.potential, rc.sim.yosida_n);
    for (std::size_t i = 0; i < trajs.size(); ++i) {
        char name[48];
        std::snprintf(name, sizeof(name), "/member_%03zu.csv", i);
        const EnergyReport er =
            build_energy_report(trajs[i], rc.potential, rc.mobility, reg);
        write_trajectory_csv(out_dir + name, detail::make_series(trajs[i], er));
    }
    write_compactness_csv(out_dir + "/compactness.csv", rep);
    std::printf("mobch ensemble: members=%zu sample_times=%zu "
                "initial_diameter=%s final_diameter=%s compactness_evidence=%d\n",
                trajs.size(), rep.sample_times.size(),
                mobch::detail::fmt17(rep.diameter.front()).c_str(),
                mobch::detail::fmt17(rep.diameter.back()).c_str(),
                rep.compactness_evidence ? 1 : 0);
    return 0;
}

inline int cmd_potential_table(const std::string& config_path, double r_min,
                               double r_max, long samples,
                               const std::string& out_path) {
    const RootConfig rc = parse_config(config_path);
    const RegularizedPotential reg(rc.potential, rc.sim.yosida_n);
    if (samples < 1) throw Error("potential-table: samples >= 1 required");
    if (r_max < r_min) throw Error("potential-table: r-max >= r-min required");

    std::string out = "r,W,Wprime,beta,beta_n,W_n\n";
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (long k = 0; k < samples; ++k) {
        const double r =
            samples == 1
                ? r_min
                : r_min + (r_max - r_min) * static_cast<double>(k) /
                              static_cast<double>(samples - 1);
        const bool inside = rc.potential.contains(r);
        using mobch::detail::fmt17;
        out += fmt17(r) + ',' + fmt17(inside ? w_value(rc.potential, r) : nan) +
               ',' + fmt17(inside ? w_prime(rc.potential, r) : nan) + ',' +
               fmt17(inside ? beta(rc.potential, r) : nan) + ',' +
               fmt17(yosida_beta(reg, r)) + ',' + fmt17(w_n_value(reg, r)) + "\n";
    }
    if (out_path.empty()) {
        std::fputs(out.c_str(), stdout);
    } else {
        std::ofstream f(out_path);
        if (!f) throw Error("potential-table: cannot open " + out_path);
        f << out;
    }
    return 0;
}

inline int cmd_diagnose(const std::string& traj_dir,
                        const std::string& config_path) {
    const RootConfig rc = parse_config(config_path);
    const RegularizedPotential reg(rc.potential, rc.sim.yosida_n);
    const TrajectorySeries series = read_trajectory_csv(traj_dir + "/trajectory.csv");
    if (series.size() == 0) throw Error("diagnose: empty trajectory series");

    // rebuild the state trajectory when snapshots are present
    Trajectory traj;
    traj.config = rc.sim;
    bool have_states = true;
    for (std::size_t k = 0; k < series.size(); ++k) {
        const std::string up = traj_dir + "/" + detail::snap_name("u", k);
        const std::string wp = traj_dir + "/" + detail::snap_name("w", k);
        if (!std::filesystem::exists(up) || !std::filesystem::exists(wp)) {
            have_states = false;
            break;
        }
        const Snapshot su = read_snapshot(up);
        const Snapshot sw = read_snapshot(wp);
        StepState st;
        st.u = su.field;
        st.w = sw.field;
        st.t = su.t;
        st.step_index = static_cast<long>(k);
        traj.states.push_back(std::move(st));
    }

    std::string report;
    bool all_pass = true;
    auto check = [&](const char* name, bool ok, const std::string& detail_txt) {
        report += std::string(ok ? "PASS " : "FAIL ") + name + ": " + detail_txt + "\n";
        if (!ok) all_pass = false;
    };

    // mass conservation relative to the initial mean
    double drift = 0.0;
    for (double m : series.mass) drift = std::max(drift, std::abs(m - series.mass[0]));
    const double rel_drift = drift / std::max(1.0, std::abs(series.mass[0]));
    check("mass-conservation", rel_drift <= 1e-10,
          "relative drift " + mobch::detail::fmt17(rel_drift));

    // regularized energy monotone within slack
    double worst_increase = 0.0;
    for (std::size_t k = 1; k < series.size(); ++k)
        worst_increase =
            std::max(worst_increase, series.energy_n[k] - series.energy_n[k - 1]);
    check("energy-dissipation", worst_increase <= 1e-9,
          "worst E_n increase " + mobch::detail::fmt17(worst_increase));

    // dissipativity envelope
    std::string fit_txt;
    bool fit_ok = true;
    try {
        const DissipativityFit fit =
            dissipativity_fit(series.t, series.energy, series.energy[0]);
        fit_txt = "kappa=" + mobch::detail::fmt17(fit.kappa) +
                  " C0=" + mobch::detail::fmt17(fit.c0) +
                  " margin=" + mobch::detail::fmt17(fit.margin);
        fit_ok = fit.valid();
    } catch (const NoValidFit& e) {
        fit_ok = false;
        fit_txt = e.what();
    }
    check("dissipativity-fit", fit_ok, fit_txt);

    if (have_states) {
        const double res = energy_equality_residual(
            traj, rc.mobility, reg, traj.states.front().t, traj.states.back().t);
        report += "INFO energy-equality-residual: " + mobch::detail::fmt17(res) + "\n";

        const GridFunction zero(traj.states.front().u.grid, 0.0);
        double dmax = 0.0;
        for (const auto& s : traj.states)
            dmax = std::max(dmax, dist_W(s.u, zero, rc.potential, reg));
        if (traj.states.back().t - traj.states.front().t >= 1.0) {
            const auto windows =
                regularization_window_scan(traj, rc.potential, 1.05 * dmax, 0.1);
            report += "INFO regularization-windows: " +
                      std::to_string(windows.size()) + " window(s) at C_bound " +
                      mobch::detail::fmt17(1.05 * dmax) + "\n";
        }
        report += "INFO steady-state-residual: " +
                  mobch::detail::fmt17(
                      steady_state_residual(traj.states.back(), rc.mobility)) +
                  "\n";
    } else {
        report += "INFO snapshots not found; state-level diagnostics skipped\n";
    }

    // diagnostics.csv mirrors the series plus the running energy defect
    {
        std::ofstream csv(traj_dir + "/diagnostics.csv");
        if (!csv) throw Error("diagnose: cannot write diagnostics.csv");
        csv << "t,mass,energy,energy_n,entropy,h2_norm\n";
        for (std::size_t k = 0; k < series.size(); ++k) {
            using mobch::detail::fmt17;
            csv << fmt17(series.t[k]) << ',' << fmt17(series.mass[k]) << ','
                << fmt17(series.energy[k]) << ',' << fmt17(series.energy_n[k])
                << ',' << fmt17(series.entropy[k]) << ','
                << fmt17(series.h2_norm[k]) << "\n";
        }
    }
    {
        std::ofstream rf(traj_dir + "/report.txt");
        if (!rf) throw Error("diagnose: cannot write report.txt");
        rf << report;
    }
    std::fputs(report.c_str(), stdout);
    return all_pass ? 0 : 3;
}

inline int dispatch(int argc, char** argv) {
    CLI::App app{"viscous and standard Cahn-Hilliard dynamics with "
                 "nonconstant mobility"};
    app.name("mobch");
    app.require_subcommand(1);

    std::string config_path, out_dir, traj_dir, table_out;
    bool with_snapshots = false;
    double r_min = -0.95, r_max = 0.95;
    long samples = 39;

    CLI::App* c_run = app.add_subcommand("run", "integrate one trajectory");
    c_run->add_option("--config", config_path, "configuration file")->required();
    c_run->add_option("--out", out_dir, "output directory")->required();
    c_run->add_flag("--snapshots", with_snapshots, "write field snapshots");

    CLI::App* c_ens =
        app.add_subcommand("ensemble", "run an ensemble and the compactness probe");
    c_ens->add_option("--config", config_path, "configuration file")->required();
    c_ens->add_option("--out", out_dir, "output directory")->required();

    CLI::App* c_diag =
        app.add_subcommand("diagnose", "certify a stored trajectory");
    c_diag->add_option("--traj", traj_dir, "trajectory directory")->required();
    c_diag->add_option("--config", config_path, "configuration file")->required();

    CLI::App* c_tab = app.add_subcommand(
        "potential-table", "tabulate W, W', beta, beta_n, W_n on an r-grid");
    c_tab->add_option("--config", config_path, "configuration file")->required();
    c_tab->add_option("--r-min", r_min, "left end of the r grid");
    c_tab->add_option("--r-max", r_max, "right end of the r grid");
    c_tab->add_option("--samples", samples, "number of grid points");
    c_tab->add_option("--out", table_out, "output file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "mobch: %s\n", e.what());
        return 1;
    }

    try {
        if (c_run->parsed()) return cmd_run(config_path, out_dir, with_snapshots);
        if (c_ens->parsed()) return cmd_ensemble(config_path, out_dir);
        if (c_diag->parsed()) return cmd_diagnose(traj_dir, config_path);
        if (c_tab->parsed())
            return cmd_potential_table(config_path, r_min, r_max, samples, table_out);
    } catch (const NewtonDivergence& e) {
        std::fprintf(stderr, "mobch: solver divergence: %s\n", e.what());
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "mobch: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "mobch: internal error: %s\n", e.what());
        return 1;
    }
    std::fprintf(stderr, "mobch: no subcommand selected\n");
    return 1;
}

} // namespace mobch::cli

#endif
